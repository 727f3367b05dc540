#pragma once

#include "unfold/kernels.hpp"
#include "unfold/types.hpp"

namespace unfold::spectral {

struct Embedding {
    Matrix coordinates;  // p x n
    Vector eigenvalues;  // all n, descending, before clamping
    int p = 0;
    /// Requested dimensions whose eigenvalue was negative (coordinate row set to zero).
    int clamped = 0;
};

Embedding embed_from_kernel(const Matrix& k, int p);
inline Embedding embed_from_kernel(const kernels::KernelMatrix& k, int p) { return embed_from_kernel(k.values, p); }

/// Kernel function usable at unseen points.
struct KernelFunction {
    enum class Kind { linear, rbf } kind = Kind::linear;
    double bandwidth = 1.0;

    static KernelFunction linear() { return {}; }
    static KernelFunction rbf(double sigma) { return {Kind::rbf, sigma}; }
    double operator()(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) const;
};

class EigenfunctionModel {
public:
    EigenfunctionModel(const Dataset& training, KernelFunction kernel);

    Index size() const { return points_.cols(); }
    const Matrix& eigenvectors() const { return vectors_; }
    const Vector& eigenvalues() const { return values_; }
    const Vector& row_means() const { return row_means_; }
    double grand_mean() const { return grand_mean_; }
    const Matrix& training_points() const { return points_; }
    const KernelFunction& kernel() const { return kernel_; }
    int positive_count(double rel_tol = 1e-10) const;

    /// Double-centered kernel column between x and every training point.
    Vector centered_column(const Eigen::Ref<const Vector>& x) const;

private:
    Matrix points_;
    KernelFunction kernel_;
    Matrix vectors_;
    Vector values_;
    Vector row_means_;
    double grand_mean_ = 0.0;
};

/// Nyström eigenfunction f_k(x) = sqrt(n)/δ_k · Σ_i v_ki k̆(x_i, x), k 0-based.
double eval_eigenfunction(const EigenfunctionModel& model, int k, const Eigen::Ref<const Vector>& x);

/// y_k(x) = δ_k^{-1/2} Σ_i v_ki k̆(x_i, x) for the top p dimensions.
Vector embed_out_of_sample(const EigenfunctionModel& model, const Eigen::Ref<const Vector>& x, int p);

/// Smallest p with δ_p / δ_{p+1} >= gap_ratio; a non-positive δ_{p+1} always qualifies.
int intrinsic_dimension(const Vector& eigenvalues, double gap_ratio = 10.0);

}  // namespace unfold::spectral
