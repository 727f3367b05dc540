#pragma once

#include "unfold/types.hpp"

namespace unfold {

/// Eigenpairs of a symmetric matrix in descending eigenvalue order. Each
/// eigenvector is signed so that its largest-magnitude entry is positive.
struct EigenPairs {
    Vector values;
    Matrix vectors;
};

EigenPairs eigen_descending(const Matrix& sym);

/// Moore-Penrose inverse of a symmetric matrix; eigenvalues with
/// |λ| <= rel_cutoff * max|λ| are treated as zero.
Matrix symmetric_pinv(const Matrix& sym, double rel_cutoff = 1e-10);

/// Max |a_ij - a_ji| relative to max(1, max |a_ij|).
double asymmetry(const Matrix& a);
void require_symmetric(const Matrix& a, const char* what, double rel_tol = 1e-9);
Matrix symmetrized(const Matrix& a);

/// H A H with H = I - 11ᵀ/n, computed without forming H.
Matrix double_center(const Matrix& a);

/// Orthonormal basis (n x (n-1)) of the complement of the all-ones vector.
Matrix centering_basis(Index n);
/// Orthonormal basis of the orthogonal complement of a nonzero vector v.
Matrix complement_basis(const Vector& v);

}  // namespace unfold
