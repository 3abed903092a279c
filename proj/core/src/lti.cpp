#include "nisyn/lti.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nisyn/errors.hpp"
#include "nisyn/linalg.hpp"

namespace nisyn {

StateSpaceModel::StateSpaceModel(Eigen::MatrixXd A_, Eigen::MatrixXd B_, Eigen::MatrixXd C_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_))
{
    D = Eigen::MatrixXd::Zero(C.rows(), C.rows());
    validate();
}

StateSpaceModel::StateSpaceModel(Eigen::MatrixXd A_, Eigen::MatrixXd B_, Eigen::MatrixXd C_,
                                 Eigen::MatrixXd D_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(std::move(D_))
{
    validate();
}

void StateSpaceModel::validate() const
{
    std::ostringstream oss;
    if (A.rows() != A.cols()) {
        oss << "StateSpaceModel: A must be square, got " << A.rows() << "x" << A.cols();
        throw DimensionError(oss.str());
    }
    const Eigen::Index n = A.rows();
    const Eigen::Index p = C.rows();
    if (B.rows() != n || C.cols() != n || B.cols() != p || D.rows() != p || D.cols() != p) {
        oss << "StateSpaceModel: inconsistent dimensions A " << n << "x" << n << ", B " << B.rows()
            << "x" << B.cols() << ", C " << C.rows() << "x" << C.cols() << ", D " << D.rows() << "x"
            << D.cols() << " (square p-channel system expected)";
        throw DimensionError(oss.str());
    }
}

Eigen::MatrixXcd eval_tf(const StateSpaceModel& sys, std::complex<double> s, const Tolerances& tol)
{
    sys.validate();
    const Eigen::Index n = sys.order();
    if (n == 0) return sys.D.cast<std::complex<double>>();

    Eigen::MatrixXcd M = -sys.A.cast<std::complex<double>>();
    M.diagonal().array() += s;

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    if (lu.rcond() < std::max(tol.rank_tol, 1e-14)) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(sys.A, false);
        std::complex<double> nearest = es.eigenvalues()(0);
        for (Eigen::Index i = 1; i < n; ++i) {
            if (std::abs(es.eigenvalues()(i) - s) < std::abs(nearest - s)) {
                nearest = es.eigenvalues()(i);
            }
        }
        std::ostringstream oss;
        oss << "eval_tf: sI - A numerically singular at s = (" << s.real() << ", " << s.imag()
            << "); nearest pole (" << nearest.real() << ", " << nearest.imag() << ")";
        throw PoleEvaluationError(oss.str(), nearest);
    }
    return sys.C.cast<std::complex<double>>() * lu.solve(sys.B.cast<std::complex<double>>())
           + sys.D.cast<std::complex<double>>();
}

int relative_degree(const StateSpaceModel& sys, const Tolerances& tol)
{
    sys.validate();
    if (sys.D.norm() > tol.residual_tol * (1.0 + sys.D.norm())) {
        throw PreconditionError("relative_degree: system must be strictly proper (D = 0)");
    }
    const Eigen::Index p = sys.channels();
    if (p == 0) throw DimensionError("relative_degree: p must be positive");

    const Eigen::MatrixXd CB = sys.C * sys.B;
    const double markov_scale = std::max(1.0, sys.C.norm() * sys.B.norm());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(CB);
    const auto& sv = svd.singularValues();
    if (sv(0) > tol.residual_tol * markov_scale && sv(sv.size() - 1) > tol.rank_tol * sv(0)) {
        return 1;
    }

    if (CB.norm() <= tol.residual_tol * markov_scale) {
        const Eigen::MatrixXd CAB = sys.C * sys.A * sys.B;
        if (is_invertible(CAB, tol) && CAB.norm() > tol.residual_tol * markov_scale) {
            return 2;
        }
        throw UnsupportedRelativeDegreeError(
            "relative_degree: C*B = 0 and C*A*B singular; only relative degree one or two is "
            "supported");
    }
    throw UnsupportedRelativeDegreeError(
        "relative_degree: C*B is nonzero but singular; only relative degree one or two is "
        "supported");
}

Eigen::MatrixXd dc_gain(const StateSpaceModel& sys, const Tolerances& tol)
{
    sys.validate();
    if (sys.order() == 0) return sys.D;
    if (!is_invertible(sys.A, tol)) {
        throw PoleEvaluationError("dc_gain: A is singular (pole at the origin)", {0.0, 0.0});
    }
    return sys.D - sys.C * sys.A.partialPivLu().solve(sys.B);
}

FrequencySweep freq_sweep(const StateSpaceModel& sys, const std::vector<double>& omega_grid,
                          const Tolerances& tol)
{
    sys.validate();
    for (std::size_t i = 0; i < omega_grid.size(); ++i) {
        if (!(omega_grid[i] > 0.0)) {
            throw PreconditionError("freq_sweep: grid must be strictly positive");
        }
        if (i > 0 && omega_grid[i] < omega_grid[i - 1]) {
            throw PreconditionError("freq_sweep: grid must be sorted ascending");
        }
    }

    // Imaginary-axis pole frequencies of the realization.
    const double theta = tol.axis_threshold(sys.A.norm());
    std::vector<double> pole_freqs;
    if (sys.order() > 0) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(sys.A, false);
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            const auto lam = es.eigenvalues()(i);
            if (std::abs(lam.real()) <= theta && lam.imag() > 0.0) {
                pole_freqs.push_back(lam.imag());
            }
        }
    }

    FrequencySweep sweep;
    sweep.samples.reserve(omega_grid.size());
    const Eigen::Index p = sys.channels();
    for (double w : omega_grid) {
        bool near_pole = false;
        for (double pf : pole_freqs) {
            if (std::abs(w - pf) <= theta) {
                near_pole = true;
                break;
            }
        }
        if (near_pole) sweep.pole_warnings.push_back(w);

        FrequencySample sample;
        sample.omega = w;
        try {
            sample.response = eval_tf(sys, {0.0, w}, tol);
        } catch (const PoleEvaluationError&) {
            sample.response = Eigen::MatrixXcd::Constant(
                p, p, std::complex<double>(std::numeric_limits<double>::quiet_NaN(),
                                           std::numeric_limits<double>::quiet_NaN()));
            if (!near_pole) sweep.pole_warnings.push_back(w);
        }
        sweep.samples.push_back(std::move(sample));
    }
    return sweep;
}

bool is_minimal(const StateSpaceModel& sys, const Tolerances& tol)
{
    sys.validate();
    return pbh_controllable(sys.A, sys.B, tol) && pbh_observable(sys.A, sys.C, tol);
}

std::vector<double> log_grid(double lo, double hi, int points)
{
    if (!(lo > 0.0) || !(hi >= lo) || points < 1) {
        throw PreconditionError("log_grid: need 0 < lo <= hi and points >= 1");
    }
    std::vector<double> grid(static_cast<std::size_t>(points));
    if (points == 1) {
        grid[0] = lo;
        return grid;
    }
    const double llo = std::log10(lo);
    const double lhi = std::log10(hi);
    for (int i = 0; i < points; ++i) {
        grid[static_cast<std::size_t>(i)] =
            std::pow(10.0, llo + (lhi - llo) * static_cast<double>(i) / (points - 1));
    }
    return grid;
}

TransferFunctionPoly siso_polynomials(const StateSpaceModel& sys, const Tolerances& tol)
{
    sys.validate();
    if (sys.channels() != 1) {
        throw DimensionError("siso_polynomials: only defined for single-channel systems");
    }
    const Eigen::Index n = sys.order();

    // Characteristic polynomial by the Faddeev-LeVerrier recursion.
    Eigen::VectorXd den(n + 1);
    den(0) = 1.0;
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        const Eigen::MatrixXd AM = sys.A * M;
        den(k) = -AM.trace() / static_cast<double>(k);
        M = AM + den(k) * Eigen::MatrixXd::Identity(n, n);
    }

    auto polyval = [](const Eigen::VectorXd& c, std::complex<double> s) {
        std::complex<double> acc = 0.0;
        for (Eigen::Index i = 0; i < c.size(); ++i) acc = acc * s + c(i);
        return acc;
    };

    // Numerator N(s) = R(s) * den(s) has degree <= n-1 (strictly proper) or n;
    // sample at distinct real points away from the poles and fit.
    const Eigen::Index num_deg = sys.D.isZero(0.0) ? std::max<Eigen::Index>(n - 1, 0) : n;
    const Eigen::Index samples = num_deg + 1;
    Eigen::EigenSolver<Eigen::MatrixXd> es(sys.A, false);

    std::vector<double> pts;
    double t = 0.37;
    while (static_cast<Eigen::Index>(pts.size()) < samples) {
        bool ok = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(std::complex<double>(t, 0.0) - es.eigenvalues()(i)) < 1e-3) {
                ok = false;
                break;
            }
        }
        if (ok) pts.push_back(t);
        t += 0.71;
    }

    Eigen::MatrixXd V(samples, samples);
    Eigen::VectorXd rhs(samples);
    for (Eigen::Index r = 0; r < samples; ++r) {
        const double x = pts[static_cast<std::size_t>(r)];
        double powx = 1.0;
        for (Eigen::Index c = samples - 1; c >= 0; --c) {
            V(r, c) = powx;
            powx *= x;
        }
        const std::complex<double> val =
            eval_tf(sys, {x, 0.0}, tol)(0, 0) * polyval(den, {x, 0.0});
        rhs(r) = val.real();
    }
    TransferFunctionPoly out;
    out.numerator = V.fullPivLu().solve(rhs);
    out.denominator = den;
    return out;
}

}  // namespace nisyn
