#include "nisyn/robust.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "nisyn/errors.hpp"
#include "nisyn/linalg.hpp"
#include "nisyn/verify.hpp"

namespace nisyn {

SynthesisResult synth_robust(const UncertainPlant& up, const SynthesisOptions& opts,
                             const Tolerances& tol)
{
    if (!(up.gamma > 0.0) || !std::isfinite(up.gamma)) {
        throw OptionError("synth_robust: gamma must be positive and finite");
    }
    const Eigen::Index p = up.nominal.channels();

    SynthesisOptions bounded = opts;
    const double limit = 1.0 / up.gamma;
    if (opts.Y2.set()) {
        const Eigen::MatrixXd Y2 = opts.Y2.resolve(p, "Y2");
        if (lambda_max_sym(Y2) >= limit) {
            std::ostringstream oss;
            oss << "synth_robust: lambda_max(Y2) = " << lambda_max_sym(Y2)
                << " must be < 1/gamma = " << limit;
            throw OptionError(oss.str());
        }
    } else {
        bounded.Y2 = MatrixSpec::from_scalar(0.9 * limit);
    }

    SynthesisOutcome outcome =
        synthesize(up.nominal, SynthesisGoal::NegativeImaginary, bounded, tol);
    if (!outcome.gate.eligible) {
        throw PreconditionError(std::string("synth_robust: plant is ineligible (") +
                                to_string(*outcome.gate.reason) + "): " + outcome.gate.detail);
    }
    return std::move(*outcome.result);
}

Interconnection build_interconnection(const StateSpaceModel& cl, const StateSpaceModel& delta,
                                      const Tolerances& tol)
{
    cl.validate();
    delta.validate();
    if (cl.channels() != delta.channels()) {
        throw DimensionError("build_interconnection: channel counts differ");
    }
    const double dd = (cl.D * delta.D).norm();
    if (dd > tol.residual_tol * (1.0 + cl.D.norm() * delta.D.norm())) {
        throw PreconditionError("build_interconnection: R(inf)*Delta(inf) must vanish");
    }
    // With D_cl * D_Delta = 0 the loop y = C x + D_cl w, w = C_d x_d + D_d y is
    // well-posed iff (I - D_cl D_d) is invertible; here it is the identity.
    const Eigen::MatrixXd I_minus = Eigen::MatrixXd::Identity(cl.channels(), cl.channels()) -
                                    cl.D * delta.D;
    if (!is_invertible(I_minus, tol)) {
        throw WellPosednessError("build_interconnection: algebraic loop is ill-posed");
    }

    const Eigen::Index nc = cl.order();
    const Eigen::Index nd = delta.order();
    Interconnection ic;
    ic.closed_loop = cl;
    ic.delta = delta;
    ic.combined_A.resize(nc + nd, nc + nd);
    ic.combined_A.topLeftCorner(nc, nc) = cl.A + cl.B * delta.D * cl.C;
    ic.combined_A.topRightCorner(nc, nd) = cl.B * delta.C;
    ic.combined_A.bottomLeftCorner(nd, nc) = delta.B * cl.C;
    ic.combined_A.bottomRightCorner(nd, nd) = delta.A;
    return ic;
}

StateSpaceModel sample_sni_uncertainty(int p, double gamma, std::uint64_t seed)
{
    if (p < 1) throw OptionError("sample_sni_uncertainty: p must be >= 1");
    if (gamma < 0.0 || !std::isfinite(gamma)) {
        throw OptionError("sample_sni_uncertainty: gamma must be nonnegative and finite");
    }

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> n_terms_dist(1, 3);
    std::uniform_real_distribution<double> pole_dist(0.3, 4.0);
    std::uniform_real_distribution<double> gain_dist(0.2, 1.0);
    std::uniform_real_distribution<double> level_dist(0.5, 0.95);

    std::vector<double> poles, gains;
    std::vector<int> channel_of;
    for (int ch = 0; ch < p; ++ch) {
        const int terms = n_terms_dist(rng);
        double dc = 0.0;
        std::vector<double> a(terms), c(terms);
        for (int k = 0; k < terms; ++k) {
            a[static_cast<std::size_t>(k)] = pole_dist(rng);
            c[static_cast<std::size_t>(k)] = gain_dist(rng);
            dc += c[static_cast<std::size_t>(k)] / a[static_cast<std::size_t>(k)];
        }
        const double target = gamma * level_dist(rng);
        const double scale = dc > 0.0 ? target / dc : 0.0;
        for (int k = 0; k < terms; ++k) {
            poles.push_back(a[static_cast<std::size_t>(k)]);
            gains.push_back(scale * c[static_cast<std::size_t>(k)]);
            channel_of.push_back(ch);
        }
    }

    const Eigen::Index n = static_cast<Eigen::Index>(poles.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, p);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(p, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, i) = -poles[static_cast<std::size_t>(i)];
        B(i, channel_of[static_cast<std::size_t>(i)]) = 1.0;
        C(channel_of[static_cast<std::size_t>(i)], i) = gains[static_cast<std::size_t>(i)];
    }
    StateSpaceModel delta(A, B, C);

    if (gamma > 0.0) {
        const VerificationReport sweep =
            verify_ssni_freq(delta, log_grid(1e-2, 1e2, 60), Tolerances{}, 0.0);
        const CheckItem* strict = sweep.find("frequency_strict_positivity");
        if (strict == nullptr || !strict->passed) {
            throw NumericalError("sample_sni_uncertainty: generated system failed its SNI sweep");
        }
    }
    return delta;
}

double default_time_step(const StateSpaceModel& sys)
{
    double max_eig = 1.0;
    if (sys.order() > 0) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(sys.A, false);
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            max_eig = std::max(max_eig, std::abs(es.eigenvalues()(i)));
        }
    }
    return 1e-3 / max_eig;
}

Trajectory simulate(const StateSpaceModel& sys, const Eigen::VectorXd& x0,
                    const std::function<Eigen::VectorXd(double)>& input, double dt, double horizon)
{
    sys.validate();
    if (!(dt > 0.0)) throw PreconditionError("simulate: dt must be positive");
    if (!(horizon >= dt)) throw PreconditionError("simulate: horizon must be at least dt");
    if (x0.size() != sys.order()) throw DimensionError("simulate: x0 must have length n");

    const Eigen::Index p = sys.channels();
    const Eigen::VectorXd zero_u = Eigen::VectorXd::Zero(p);
    auto u_of = [&](double t) -> Eigen::VectorXd { return input ? input(t) : zero_u; };
    auto f = [&](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return sys.A * x + sys.B * u_of(t);
    };

    const auto steps = static_cast<Eigen::Index>(std::ceil(horizon / dt - 1e-12));
    Trajectory traj;
    traj.times.reserve(static_cast<std::size_t>(steps + 1));
    traj.states.resize(sys.order(), steps + 1);
    traj.outputs.resize(p, steps + 1);

    Eigen::VectorXd x = x0;
    double t = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index k = 0; k <= steps; ++k) {
        traj.times.push_back(t);
        traj.states.col(count) = x;
        traj.outputs.col(count) = sys.C * x + sys.D * u_of(t);
        ++count;
        if (k == steps) break;

        const Eigen::VectorXd k1 = f(t, x);
        const Eigen::VectorXd k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
        const Eigen::VectorXd k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2);
        const Eigen::VectorXd k4 = f(t + dt, x + dt * k3);
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += dt;

        if (!x.allFinite() || x.norm() > 1e100) {
            traj.diverged = true;
            traj.divergence_time = t;
            break;
        }
    }
    traj.states.conservativeResize(Eigen::NoChange, count);
    traj.outputs.conservativeResize(Eigen::NoChange, count);
    return traj;
}

}  // namespace nisyn
