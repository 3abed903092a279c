#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "nisyn/lti.hpp"
#include "nisyn/tolerances.hpp"

namespace nisyn {

/// Special coordinate basis for a relative-degree-one plant:
/// [z; y] = T x with
///   z' = A11 z + A12 y,
///   y' = A21 z + A22 y + CB u.
struct NormalFormRD1 {
    Eigen::MatrixXd T;
    Eigen::MatrixXd A11, A12, A21, A22;
    Eigen::MatrixXd CB;

    Eigen::Index m() const { return A11.rows(); }
    Eigen::Index p() const { return CB.rows(); }

    /// Realization in the transformed coordinates (B = [0; CB], C = [0, I]).
    StateSpaceModel to_state_space() const;
};

/// Special coordinate basis for a relative-degree-two plant:
/// [z; x1; x2] = T x with rows of T given by [Cz; C; C A] and
///   z'  = A11 z + A12 x1 + A13 x2,
///   x1' = x2,
///   x2' = A31 z + A32 x1 + A33 x2 + CAB u.
struct NormalFormRD2 {
    Eigen::MatrixXd T;
    Eigen::MatrixXd A11, A12, A13, A31, A32, A33;
    Eigen::MatrixXd CAB;

    Eigen::Index m() const { return A11.rows(); }
    Eigen::Index p() const { return CAB.rows(); }

    StateSpaceModel to_state_space() const;
};

/// Block split of Lyapunov-stable, nonsingular zero dynamics:
/// S A11 S^{-1} = diag(A11a, A11b) with A11a skew-symmetric (canonical
/// 2x2 blocks [[0, w],[-w, 0]], spectrum on the punctured imaginary axis)
/// and A11b Hurwitz.
struct ModalSplit {
    Eigen::MatrixXd S;
    Eigen::MatrixXd A11a;
    Eigen::MatrixXd A11b;

    Eigen::Index ma() const { return A11a.rows(); }
    Eigen::Index mb() const { return A11b.rows(); }
    Eigen::Index m() const { return ma() + mb(); }
};

NormalFormRD1 to_normal_form_rd1(const StateSpaceModel& sys, const Tolerances& tol = {});
NormalFormRD2 to_normal_form_rd2(const StateSpaceModel& sys, const Tolerances& tol = {});

ModalSplit modal_split(const Eigen::MatrixXd& A11, const Tolerances& tol = {});

struct WeakMinimumPhaseCheck {
    bool pass = false;
    std::string reason;  // empty when pass
    std::vector<std::complex<double>> offending;
};

/// Pass iff the zero dynamics matrix is Lyapunov stable and nonsingular
/// (no zero at the origin). Failures are values, never exceptions.
WeakMinimumPhaseCheck check_weakly_minimum_phase(const Eigen::MatrixXd& A11,
                                                 const Tolerances& tol = {});

}  // namespace nisyn
