#include "unfold/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace unfold {

EigenPairs eigen_descending(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sym));
    if (es.info() != Eigen::Success) throw SolverError("symmetric eigendecomposition failed");
    const Index n = sym.rows();
    EigenPairs out;
    out.values = es.eigenvalues().reverse();
    out.vectors = es.eigenvectors().rowwise().reverse();
    for (Index k = 0; k < n; ++k) {
        Index arg = 0;
        out.vectors.col(k).cwiseAbs().maxCoeff(&arg);
        if (out.vectors(arg, k) < 0.0) out.vectors.col(k) *= -1.0;
    }
    return out;
}

Matrix symmetric_pinv(const Matrix& sym, double rel_cutoff) {
    const EigenPairs ep = eigen_descending(sym);
    const double top = ep.values.cwiseAbs().maxCoeff();
    Vector inv = Vector::Zero(ep.values.size());
    for (Index k = 0; k < inv.size(); ++k) {
        if (std::abs(ep.values(k)) > rel_cutoff * top) inv(k) = 1.0 / ep.values(k);
    }
    return symmetrized(ep.vectors * inv.asDiagonal() * ep.vectors.transpose());
}

double asymmetry(const Matrix& a) {
    if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
    if (a.size() == 0) return 0.0;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

void require_symmetric(const Matrix& a, const char* what, double rel_tol) {
    if (a.rows() != a.cols()) throw InvalidArgument(std::string(what) + " must be square");
    if (asymmetry(a) > rel_tol) throw InvalidArgument(std::string(what) + " must be symmetric");
}

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

Matrix double_center(const Matrix& a) {
    const Vector rows = a.rowwise().mean();
    const Vector cols = a.colwise().mean().transpose();
    const double grand = a.mean();
    Matrix out = a;
    out.colwise() -= rows;
    out.rowwise() -= cols.transpose();
    out.array() += grand;
    return out;
}

Matrix complement_basis(const Vector& v) {
    const Index n = v.size();
    const double norm = v.norm();
    if (!(norm > 0.0)) throw InvalidArgument("complement basis of a zero vector");
    // Householder reflector mapping e_1 to ±v/|v|; its other columns span v⊥.
    Vector u = v / norm;
    const double s = u(0) >= 0.0 ? 1.0 : -1.0;
    u(0) += s;
    const double unorm2 = u.squaredNorm();
    Matrix q = Matrix::Identity(n, n) - (2.0 / unorm2) * u * u.transpose();
    return q.rightCols(n - 1);
}

Matrix centering_basis(Index n) { return complement_basis(Vector::Ones(n)); }

}  // namespace unfold
