#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "nisyn/lti.hpp"
#include "nisyn/synthesis.hpp"
#include "nisyn/tolerances.hpp"

namespace nisyn {

/// Plant x' = A x + B (u + w) with SNI uncertainty w = Delta(s) y, bounded by
/// lambda_max(Delta(0)) <= gamma.
struct UncertainPlant {
    StateSpaceModel nominal;
    double gamma = 1.0;
};

/// Positive feedback interconnection of the synthesized loop R(s) (w -> y)
/// and an uncertainty realization Delta(s) (y -> w).
struct Interconnection {
    StateSpaceModel closed_loop;
    StateSpaceModel delta;
    Eigen::MatrixXd combined_A;
};

/// NI synthesis with the DC gain forced below the uncertainty bound:
/// lambda_max(Y2) < 1/gamma (default Y2 = (0.9/gamma) I). The returned closed
/// loop is the w-to-y map with the state feedback u = Kx x applied.
SynthesisResult synth_robust(const UncertainPlant& up, const SynthesisOptions& opts = {},
                             const Tolerances& tol = {});

Interconnection build_interconnection(const StateSpaceModel& cl, const StateSpaceModel& delta,
                                      const Tolerances& tol = {});

/// Seeded generator of certified-SNI uncertainties: per-channel sums of
/// first-order lags c_k/(s + a_k) with a_k, c_k > 0, diagonal across channels,
/// scaled so that lambda_max(Delta(0)) <= gamma.
StateSpaceModel sample_sni_uncertainty(int p, double gamma, std::uint64_t seed);

struct Trajectory {
    std::vector<double> times;
    Eigen::MatrixXd states;   // n x N
    Eigen::MatrixXd outputs;  // p x N
    bool diverged = false;
    double divergence_time = 0.0;
};

/// Fixed-step fourth-order integration of x' = A x + B u(t), y = C x + D u.
/// A null input callable means zero input. Divergence (non-finite or huge
/// state) truncates the trajectory and is reported as a value, not an error.
Trajectory simulate(const StateSpaceModel& sys, const Eigen::VectorXd& x0,
                    const std::function<Eigen::VectorXd(double)>& input, double dt,
                    double horizon);

/// Default integration step for a system: 1e-3 / max |eigenvalue| (clamped).
double default_time_step(const StateSpaceModel& sys);

}  // namespace nisyn
