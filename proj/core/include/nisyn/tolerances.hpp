#pragma once

#include <algorithm>

namespace nisyn {

/// Numerical tolerances used throughout the library.
///
/// eig_axis_tol is relative to the matrix scale: an eigenvalue counts as lying
/// on the imaginary axis when |Re| <= eig_axis_tol * max(1, ||A||_F). rank_tol
/// is a relative singular-value cutoff, psd_tol the allowed excursion of an
/// eigenvalue below zero in semidefiniteness tests, and residual_tol bounds
/// equality residuals relative to the operand scale.
struct Tolerances {
    double eig_axis_tol = 1e-8;
    double rank_tol = 1e-10;
    double psd_tol = 1e-9;
    double residual_tol = 1e-9;

    /// Absolute distance-to-axis threshold for a matrix of the given norm.
    double axis_threshold(double matrix_norm) const
    {
        return eig_axis_tol * std::max(1.0, matrix_norm);
    }

    bool valid() const
    {
        return eig_axis_tol >= 0.0 && rank_tol >= 0.0 && psd_tol >= 0.0 && residual_tol >= 0.0;
    }
};

}  // namespace nisyn
