#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "nisyn/tolerances.hpp"

namespace nisyn {

enum class EigenvalueClass {
    OpenLeftHalfPlane,
    PurelyImaginaryNonzero,
    Zero,
    OpenRightHalfPlane,
};

/// Eigenvalues of a real square matrix together with their half-plane class
/// and a per-eigenvalue semisimplicity flag (geometric multiplicity equals
/// algebraic multiplicity).
struct SpectralClassification {
    Eigen::VectorXcd eigenvalues;
    std::vector<EigenvalueClass> classes;
    std::vector<bool> semisimple;

    /// All eigenvalues strictly in the open left half-plane.
    bool is_hurwitz() const;

    /// Spectrum in the closed left half-plane with semisimple imaginary-axis
    /// eigenvalues (zero included).
    bool is_lyapunov_stable() const;

    bool has_class(EigenvalueClass c) const;
};

SpectralClassification classify_spectrum(const Eigen::MatrixXd& A, const Tolerances& tol = {});

/// Solves A*Y + Y*A^T = -Q for Hurwitz A and symmetric positive definite Q
/// (controllability-gramian orientation). Schur reduction with block
/// back-substitution; the result is symmetrized and residual-checked.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q,
                               const Tolerances& tol = {});

/// Unique symmetric positive definite square root of a symmetric positive
/// definite matrix.
Eigen::MatrixXd sqrt_pd(const Eigen::MatrixXd& M, const Tolerances& tol = {});

/// Semidefiniteness tests on the symmetrized part of M. M must be symmetric
/// within residual_tol; it is symmetrized before testing.
bool is_psd(const Eigen::MatrixXd& M, const Tolerances& tol = {});
bool is_pd(const Eigen::MatrixXd& M, const Tolerances& tol = {});
bool is_nsd(const Eigen::MatrixXd& M, const Tolerances& tol = {});
bool is_nd(const Eigen::MatrixXd& M, const Tolerances& tol = {});

/// PBH eigenvector tests: rank([lambda*I - A, B]) resp. rank([lambda*I - A; C])
/// at every eigenvalue of A.
bool pbh_controllable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                      const Tolerances& tol = {});
bool pbh_observable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                    const Tolerances& tol = {});

// --- small helpers shared across the library --------------------------------

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M)
{
    return 0.5 * (M + M.transpose());
}

/// Extreme eigenvalues of the symmetrized part of M.
double lambda_min_sym(const Eigen::MatrixXd& M);
double lambda_max_sym(const Eigen::MatrixXd& M);

/// Numerical rank under the relative singular-value cutoff tol.rank_tol.
Eigen::Index numerical_rank(const Eigen::MatrixXcd& M, const Tolerances& tol = {});

/// Smallest singular value.
double sigma_min(const Eigen::MatrixXd& M);

/// True when the square matrix is invertible under the rank tolerance
/// (smallest singular value above rank_tol times the largest).
bool is_invertible(const Eigen::MatrixXd& M, const Tolerances& tol = {});

/// Solves the Sylvester equation A*X - X*B = C by Kronecker vectorization.
/// Requires spec(A) and spec(B) disjoint; sized for desk-scale operands.
Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                const Eigen::MatrixXd& C);

/// Reorders a real Schur decomposition A = Q*T*Q^T in place so that the
/// diagonal blocks whose eigenvalues satisfy `select` come first, by swapping
/// adjacent blocks through orthogonal similarity transforms.
void reorder_schur(Eigen::MatrixXd& T, Eigen::MatrixXd& Q,
                   const std::function<bool(std::complex<double>)>& select,
                   const Tolerances& tol = {});

}  // namespace nisyn
