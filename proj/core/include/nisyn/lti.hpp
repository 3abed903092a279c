#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "nisyn/tolerances.hpp"

namespace nisyn {

/// Continuous-time LTI system x' = A x + B u, y = C x + D u with square
/// input/output dimension p. Plants handled by the synthesis path are
/// strictly proper (D = 0); the verifier accepts symmetric D.
struct StateSpaceModel {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd C;
    Eigen::MatrixXd D;

    StateSpaceModel() = default;
    StateSpaceModel(Eigen::MatrixXd A_, Eigen::MatrixXd B_, Eigen::MatrixXd C_);
    StateSpaceModel(Eigen::MatrixXd A_, Eigen::MatrixXd B_, Eigen::MatrixXd C_, Eigen::MatrixXd D_);

    Eigen::Index order() const { return A.rows(); }     // n
    Eigen::Index channels() const { return C.rows(); }  // p

    /// Throws DimensionError unless (A, B, C, D) dimensions are consistent.
    void validate() const;
};

struct FrequencySample {
    double omega = 0.0;            // rad/s, > 0
    Eigen::MatrixXcd response;     // R(j*omega), p x p
};

struct FrequencySweep {
    std::vector<FrequencySample> samples;  // one per grid point, grid order
    std::vector<double> pole_warnings;     // grid points within tolerance of a pole frequency
};

/// R(s) = C (sI - A)^{-1} B + D. Throws PoleEvaluationError when sI - A is
/// numerically singular, carrying the nearest eigenvalue of A.
Eigen::MatrixXcd eval_tf(const StateSpaceModel& sys, std::complex<double> s,
                         const Tolerances& tol = {});

/// Relative degree of a strictly proper system: 1 when C*B is nonsingular,
/// 2 when C*B vanishes and C*A*B is nonsingular. Anything else throws
/// UnsupportedRelativeDegreeError.
int relative_degree(const StateSpaceModel& sys, const Tolerances& tol = {});

/// D - C A^{-1} B. Throws PoleEvaluationError when A is singular (pole at the
/// origin).
Eigen::MatrixXd dc_gain(const StateSpaceModel& sys, const Tolerances& tol = {});

/// Evaluates the frequency response on a strictly positive, sorted grid.
/// Points within the axis tolerance of an imaginary-axis pole frequency are
/// evaluated anyway (possibly as NaN when exactly singular) and reported in
/// pole_warnings rather than silently skipped.
FrequencySweep freq_sweep(const StateSpaceModel& sys, const std::vector<double>& omega_grid,
                          const Tolerances& tol = {});

/// PBH controllability and observability both hold.
bool is_minimal(const StateSpaceModel& sys, const Tolerances& tol = {});

/// Logarithmically spaced grid with `points` entries from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int points);

/// Numerator/denominator coefficients (descending powers, denominator monic)
/// of a SISO system's transfer function. Denominator by Faddeev-LeVerrier,
/// numerator by exact-degree interpolation.
struct TransferFunctionPoly {
    Eigen::VectorXd numerator;
    Eigen::VectorXd denominator;
};
TransferFunctionPoly siso_polynomials(const StateSpaceModel& sys, const Tolerances& tol = {});

}  // namespace nisyn
