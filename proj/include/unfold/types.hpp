#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace unfold {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Bad argument or precondition violation.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Data-level failure: disconnected graphs, singular local systems, etc.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The symmetrized neighbor graph has more than one connected component.
class DisconnectedGraph : public DataError {
public:
    DisconnectedGraph(std::vector<std::vector<Index>> components);
    const std::vector<std::vector<Index>>& components() const { return components_; }

private:
    std::vector<std::vector<Index>> components_;
};

/// Numerical solver failure (no strictly feasible start, line search exhausted).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Points stored column-wise: `points` is d x n.
struct Dataset {
    Matrix points;
    std::optional<std::vector<std::string>> labels;
    std::optional<std::vector<std::string>> actions;  // actions[i] takes point i to i+1

    Dataset() = default;
    explicit Dataset(Matrix pts,
                     std::optional<std::vector<std::string>> lbls = std::nullopt,
                     std::optional<std::vector<std::string>> acts = std::nullopt);

    Index size() const { return points.cols(); }
    Index dim() const { return points.rows(); }
    Eigen::Ref<const Vector> point(Index i) const { return points.col(i); }

    /// Throws InvalidArgument when an invariant does not hold.
    void validate() const;
};

/// Distinct labels in first-appearance order, plus per-point class index.
struct ClassIndex {
    std::vector<std::string> names;
    std::vector<Index> of_point;
    std::vector<std::vector<Index>> members;

    Index count() const { return static_cast<Index>(names.size()); }
};

ClassIndex index_classes(const std::vector<std::string>& labels);

}  // namespace unfold
