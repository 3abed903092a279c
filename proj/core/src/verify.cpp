#include "nisyn/verify.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>

#include "nisyn/errors.hpp"
#include "nisyn/linalg.hpp"

namespace nisyn {

void VerificationReport::add(const std::string& name, double measured, double threshold, bool ok)
{
    checks.push_back({name, measured, threshold, ok});
    passed = passed && ok;
}

const CheckItem* VerificationReport::find(const std::string& name) const
{
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

namespace {

double min_eig_herm(const Eigen::MatrixXcd& M)
{
    if (M.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (M + M.adjoint()),
                                                       Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// Certificate conditions shared by the NI and SSNI lemma checks.
void certificate_common(VerificationReport& rep, const StateSpaceModel& sys,
                        const Eigen::MatrixXd& Y, const Tolerances& tol)
{
    const double y_asym = (Y - Y.transpose()).norm();
    rep.add("Y_symmetric", y_asym, tol.residual_tol * (1.0 + Y.norm()),
            y_asym <= tol.residual_tol * (1.0 + Y.norm()));

    const double y_min = lambda_min_sym(Y);
    rep.add("Y_positive_definite", y_min, tol.psd_tol, y_min > tol.psd_tol);

    const Eigen::MatrixXd coupling = sys.B + sys.A * symmetrize(Y) * sys.C.transpose();
    const double coupling_tol = tol.residual_tol * (1.0 + sys.B.norm());
    rep.add("input_output_coupling", coupling.norm(), coupling_tol,
            coupling.norm() <= coupling_tol);

    const double smin = sigma_min(sys.A);
    const double sthr = sys.order() == 0
                            ? 0.0
                            : tol.rank_tol * std::max(1.0, Eigen::JacobiSVD<Eigen::MatrixXd>(sys.A)
                                                               .singularValues()(0));
    rep.add("A_nonsingular", smin, sthr, sys.order() == 0 || smin > sthr);

    const double d_asym = (sys.D - sys.D.transpose()).norm();
    rep.add("D_symmetric", d_asym, tol.residual_tol * (1.0 + sys.D.norm()),
            d_asym <= tol.residual_tol * (1.0 + sys.D.norm()));
}

}  // namespace

VerificationReport verify_ni_certificate(const StateSpaceModel& sys, const Eigen::MatrixXd& Y,
                                         const Tolerances& tol)
{
    sys.validate();
    if (Y.rows() != sys.order() || Y.cols() != sys.order()) {
        throw DimensionError("verify_ni_certificate: Y must be n x n");
    }
    VerificationReport rep;
    certificate_common(rep, sys, Y, tol);

    const Eigen::MatrixXd lyap = sys.A * symmetrize(Y) + symmetrize(Y) * sys.A.transpose();
    const double lmax = lambda_max_sym(lyap);
    rep.add("lyapunov_nsd", lmax, tol.psd_tol, lmax <= tol.psd_tol);

    rep.add("minimal_realization", is_minimal(sys, tol) ? 1.0 : 0.0, 1.0, is_minimal(sys, tol));
    return rep;
}

VerificationReport verify_ssni_certificate(const StateSpaceModel& sys, const Eigen::MatrixXd& Y,
                                           const Tolerances& tol, double strict_margin)
{
    sys.validate();
    if (Y.rows() != sys.order() || Y.cols() != sys.order()) {
        throw DimensionError("verify_ssni_certificate: Y must be n x n");
    }
    VerificationReport rep;
    certificate_common(rep, sys, Y, tol);

    const Eigen::MatrixXd lyap = sys.A * symmetrize(Y) + symmetrize(Y) * sys.A.transpose();
    const double lmax = lambda_max_sym(lyap);
    rep.add("lyapunov_strict_nd", lmax, -strict_margin, lmax <= -strict_margin);

    const bool hurwitz = classify_spectrum(sys.A, tol).is_hurwitz();
    rep.add("A_hurwitz", hurwitz ? 1.0 : 0.0, 1.0, hurwitz);

    // Normal rank of R(s) + R(-s)^T, sampled at a real non-pole point.
    bool rank_ok = false;
    double rank_measured = 0.0;
    if (hurwitz) {
        double s0 = 0.7318;
        for (int attempt = 0; attempt < 8; ++attempt) {
            try {
                const Eigen::MatrixXcd R = eval_tf(sys, {s0, 0.0}, tol);
                const Eigen::MatrixXcd Rm = eval_tf(sys, {-s0, 0.0}, tol);
                const Eigen::MatrixXcd sumR = R + Rm.transpose();
                const Eigen::Index rank = numerical_rank(sumR, tol);
                rank_measured = static_cast<double>(rank);
                rank_ok = rank == sys.channels();
                break;
            } catch (const PoleEvaluationError&) {
                s0 += 0.317;
            }
        }
    }
    rep.add("full_normal_rank", rank_measured, static_cast<double>(sys.channels()), rank_ok);

    // No observable uncontrollable mode: at every eigenvalue, controllability
    // holds or the mode is unobservable.
    bool modes_ok = true;
    if (sys.order() > 0) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(sys.A, false);
        const Eigen::Index n = sys.order();
        for (Eigen::Index i = 0; i < n && modes_ok; ++i) {
            const std::complex<double> lam = es.eigenvalues()(i);
            Eigen::MatrixXcd ctrl(n, n + sys.B.cols());
            ctrl.leftCols(n) = -sys.A.cast<std::complex<double>>();
            ctrl.leftCols(n).diagonal().array() += lam;
            ctrl.rightCols(sys.B.cols()) = sys.B.cast<std::complex<double>>();
            if (numerical_rank(ctrl, tol) == n) continue;
            Eigen::MatrixXcd obs(n + sys.C.rows(), n);
            obs.topRows(n) = -sys.A.cast<std::complex<double>>();
            obs.topRows(n).diagonal().array() += lam;
            obs.bottomRows(sys.C.rows()) = sys.C.cast<std::complex<double>>();
            if (numerical_rank(obs, tol) == n) modes_ok = false;
        }
    }
    rep.add("no_observable_uncontrollable_modes", modes_ok ? 1.0 : 0.0, 1.0, modes_ok);
    return rep;
}

namespace {

/// Numeric residue estimate of j*R(s) at a purely imaginary pole j*w0:
/// evaluates (s - j*w0) * j * R(s) at four approach points and checks they
/// agree (simple pole) before testing the averaged residue.
void residue_check(VerificationReport& rep, const StateSpaceModel& sys, double w0,
                   const Tolerances& tol)
{
    const std::complex<double> jw0(0.0, w0);
    const double delta = 1e-5 * std::max(1.0, w0);
    const std::complex<double> offsets[4] = {
        {delta, 0.0}, {-delta, 0.0}, {0.0, delta}, {0.0, -delta}};

    std::vector<Eigen::MatrixXcd> estimates;
    for (const auto& off : offsets) {
        const std::complex<double> s = jw0 + off;
        try {
            const Eigen::MatrixXcd R = eval_tf(sys, s, tol);
            estimates.push_back(off * std::complex<double>(0.0, 1.0) * R);
        } catch (const PoleEvaluationError&) {
        }
    }
    if (estimates.size() < 4) {
        rep.add("residue_simple_pole", 0.0, 1.0, false);
        return;
    }
    Eigen::MatrixXcd mean = estimates[0];
    for (std::size_t i = 1; i < estimates.size(); ++i) mean += estimates[i];
    mean /= static_cast<double>(estimates.size());

    double spread = 0.0;
    for (const auto& e : estimates) spread = std::max(spread, (e - mean).norm());
    const double scale = std::max(1.0, mean.norm());
    rep.add("residue_simple_pole", spread, 1e-3 * scale, spread <= 1e-3 * scale);

    const double herm = (mean - mean.adjoint()).norm();
    rep.add("residue_hermitian", herm, 1e-6 * scale, herm <= 1e-6 * scale);
    const double lmin = min_eig_herm(mean);
    rep.add("residue_psd", lmin, -tol.psd_tol * scale, lmin >= -tol.psd_tol * scale);
}

}  // namespace

VerificationReport verify_ni_freq(const StateSpaceModel& sys, const std::vector<double>& grid,
                                  const Tolerances& tol)
{
    sys.validate();
    VerificationReport rep;

    std::vector<double> axis_pole_freqs;
    bool pole_origin = false;
    bool pole_orhp = false;
    if (sys.order() > 0) {
        const SpectralClassification cls = classify_spectrum(sys.A, tol);
        for (std::size_t i = 0; i < cls.classes.size(); ++i) {
            if (cls.classes[i] == EigenvalueClass::Zero) pole_origin = true;
            if (cls.classes[i] == EigenvalueClass::OpenRightHalfPlane) pole_orhp = true;
            if (cls.classes[i] == EigenvalueClass::PurelyImaginaryNonzero &&
                cls.eigenvalues(static_cast<Eigen::Index>(i)).imag() > 0.0) {
                axis_pole_freqs.push_back(cls.eigenvalues(static_cast<Eigen::Index>(i)).imag());
            }
        }
    }
    rep.add("no_pole_at_origin", pole_origin ? 0.0 : 1.0, 1.0, !pole_origin);
    rep.add("no_orhp_poles", pole_orhp ? 0.0 : 1.0, 1.0, !pole_orhp);

    const FrequencySweep sweep = freq_sweep(sys, grid, tol);
    rep.pole_warnings = sweep.pole_warnings;

    double worst_min = 0.0;
    double worst_herm = 0.0;
    bool have_point = false;
    for (const auto& sample : sweep.samples) {
        const bool warned =
            std::find(rep.pole_warnings.begin(), rep.pole_warnings.end(), sample.omega) !=
            rep.pole_warnings.end();
        if (warned) continue;
        const Eigen::MatrixXcd M =
            std::complex<double>(0.0, 1.0) * (sample.response - sample.response.adjoint());
        worst_herm = std::max(worst_herm, (M - M.adjoint()).norm());
        const double lmin = min_eig_herm(M);
        if (!have_point || lmin < worst_min) worst_min = lmin;
        have_point = true;
    }
    rep.add("imaginary_part_hermitian", worst_herm, tol.residual_tol,
            worst_herm <= tol.residual_tol);
    rep.add("frequency_nonnegativity", have_point ? worst_min : 0.0, -tol.psd_tol,
            !have_point || worst_min >= -tol.psd_tol);

    // Distinct imaginary-axis pole frequencies get the residue condition.
    std::sort(axis_pole_freqs.begin(), axis_pole_freqs.end());
    axis_pole_freqs.erase(std::unique(axis_pole_freqs.begin(), axis_pole_freqs.end(),
                                      [&](double a, double b) {
                                          return std::abs(a - b) <=
                                                 tol.axis_threshold(sys.A.norm());
                                      }),
                          axis_pole_freqs.end());
    for (double w0 : axis_pole_freqs) residue_check(rep, sys, w0, tol);
    return rep;
}

VerificationReport verify_ssni_freq(const StateSpaceModel& sys, const std::vector<double>& grid,
                                    const Tolerances& tol, double strict_margin)
{
    sys.validate();
    if (grid.empty()) throw PreconditionError("verify_ssni_freq: grid must be nonempty");
    VerificationReport rep;

    const bool hurwitz =
        sys.order() == 0 || classify_spectrum(sys.A, tol).is_hurwitz();
    rep.add("A_hurwitz", hurwitz ? 1.0 : 0.0, 1.0, hurwitz);

    const FrequencySweep sweep = freq_sweep(sys, grid, tol);
    rep.pole_warnings = sweep.pole_warnings;

    double worst = 0.0;
    bool have_point = false;
    for (const auto& sample : sweep.samples) {
        const Eigen::MatrixXcd M =
            std::complex<double>(0.0, 1.0) * (sample.response - sample.response.adjoint());
        const double lmin = min_eig_herm(M);
        if (!have_point || lmin < worst) worst = lmin;
        have_point = true;
    }
    rep.add("frequency_strict_positivity", have_point ? worst : 0.0, strict_margin,
            have_point && worst >= strict_margin);

    const auto M_of = [&](const FrequencySample& s) {
        return (std::complex<double>(0.0, 1.0) * (s.response - s.response.adjoint())).eval();
    };
    const FrequencySample& lo = sweep.samples.front();
    const FrequencySample& hi = sweep.samples.back();
    const double lim_zero = min_eig_herm(M_of(lo) / lo.omega);
    rep.add("limit_at_zero", lim_zero, strict_margin, lim_zero >= strict_margin);
    const double lim_inf = min_eig_herm(hi.omega * M_of(hi));
    rep.add("limit_at_infinity", lim_inf, strict_margin, lim_inf >= strict_margin);
    return rep;
}

VerificationReport dc_gain_stability(const StateSpaceModel& R, const StateSpaceModel& Delta,
                                     const Tolerances& tol, double margin)
{
    R.validate();
    Delta.validate();
    if (R.channels() != Delta.channels()) {
        throw DimensionError("dc_gain_stability: loop and uncertainty dimensions differ");
    }
    VerificationReport rep;

    // Hypotheses of the DC-gain lemma on the feedthroughs.
    const double dproduct = (R.D * Delta.D).norm();
    rep.add("R_inf_Delta_inf_zero", dproduct, tol.residual_tol, dproduct <= tol.residual_tol);
    const double d_delta_asym = (Delta.D - Delta.D.transpose()).norm();
    const bool delta_inf_psd = d_delta_asym <= tol.residual_tol * (1.0 + Delta.D.norm()) &&
                               lambda_min_sym(Delta.D) >= -tol.psd_tol;
    rep.add("Delta_inf_psd", lambda_min_sym(Delta.D), -tol.psd_tol, delta_inf_psd);

    // Re-check the frequency-domain properties on a default grid.
    const std::vector<double> grid = log_grid(1e-3, 1e3, 200);
    const VerificationReport ni = verify_ni_freq(R, grid, tol);
    rep.add("loop_is_ni", ni.passed ? 1.0 : 0.0, 1.0, ni.passed);
    const VerificationReport sni = verify_ssni_freq(Delta, grid, tol, 0.0);
    const CheckItem* strict = sni.find("frequency_strict_positivity");
    const CheckItem* dhur = sni.find("A_hurwitz");
    const bool delta_sni = strict != nullptr && strict->passed && dhur != nullptr && dhur->passed;
    rep.add("uncertainty_is_sni", delta_sni ? 1.0 : 0.0, 1.0, delta_sni);

    double loop_gain = 0.0;
    bool real_ok = false;
    bool gain_ok = false;
    try {
        const Eigen::MatrixXd product = dc_gain(R, tol) * dc_gain(Delta, tol);
        if (product.rows() == 0) {
            real_ok = true;
            gain_ok = true;
        } else {
            Eigen::EigenSolver<Eigen::MatrixXd> es(product, false);
            double max_imag = 0.0;
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
                max_imag = std::max(max_imag, std::abs(es.eigenvalues()(i).imag()));
                loop_gain = std::max(loop_gain, es.eigenvalues()(i).real());
            }
            real_ok = max_imag <= tol.residual_tol * (1.0 + product.norm());
            gain_ok = loop_gain < 1.0 - margin;
        }
    } catch (const PoleEvaluationError&) {
        real_ok = false;
        gain_ok = false;
    }
    rep.add("dc_product_spectrum_real", real_ok ? 1.0 : 0.0, 1.0, real_ok);
    rep.add("dc_loop_gain", loop_gain, 1.0 - margin, gain_ok);
    return rep;
}

}  // namespace nisyn
