#pragma once

#include "unfold/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace unfold::datasets {

/// Synthetic manifold request. Names: swiss-roll-3d, spiral-2d, trefoil-3d,
/// s-curve-3d, hinge-chain.
struct ManifoldSpec {
    std::string name;
    Index n = 100;
    double noise = 0.0;  // standard deviation of isotropic Gaussian noise
    std::uint64_t seed = 0;

    void validate() const;
};

/// Points plus the generating parameters, one column per point: arc length
/// for curves, the (u, v) chart for surfaces.
struct Generated {
    Dataset data;
    Matrix parameters;
    std::vector<std::string> parameter_names;
};

const std::vector<std::string>& manifold_names();

Generated generate(const ManifoldSpec& spec);

/// Swiss roll height range [0, kSwissRollHeight].
inline constexpr double kSwissRollHeight = 10.0;

/// Arc length of the spiral r = θ from θ = 0.
double spiral_arc_length(double theta);
/// Inverse of spiral_arc_length.
double spiral_angle_at(double arc_length);

}  // namespace unfold::datasets
