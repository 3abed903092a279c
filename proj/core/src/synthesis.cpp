#include "nisyn/synthesis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <random>
#include <sstream>
#include <utility>

#include "nisyn/errors.hpp"
#include "nisyn/linalg.hpp"

namespace nisyn {

namespace {

Eigen::MatrixXd blkdiag2(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B)
{
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(A.rows() + B.rows(), A.cols() + B.cols());
    M.topLeftCorner(A.rows(), A.cols()) = A;
    M.bottomRightCorner(B.rows(), B.cols()) = B;
    return M;
}

void require_symmetric_pd(const Eigen::MatrixXd& M, const char* name, const Tolerances& tol)
{
    if (M.rows() != M.cols()) throw OptionError(std::string(name) + " must be square");
    if ((M - M.transpose()).norm() > tol.residual_tol * (1.0 + M.norm())) {
        throw OptionError(std::string(name) + " must be symmetric");
    }
    if (M.rows() > 0 && lambda_min_sym(M) <= tol.psd_tol) {
        throw OptionError(std::string(name) + " must be positive definite");
    }
}

struct HbSearch {
    Eigen::MatrixXd Hb;
    int attempts = 0;
};

/// Finds Hb with Hb^T Hb <= bound_factor * Qb making (A11_modal, K1(Hb))
/// observable. Hb = 0 is always admissible; the randomized fallback draws
/// Gaussian matrices scaled into the admissible ball (seeded, deterministic).
template <typename MakeK1>
HbSearch find_admissible_hb(const Eigen::MatrixXd& A11_modal, const MakeK1& make_k1,
                            Eigen::Index p, Eigen::Index mb, const Eigen::MatrixXd& Qb,
                            double bound_factor, const SynthesisOptions& opts,
                            const Tolerances& tol)
{
    HbSearch search;
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const double bound = mb > 0 ? bound_factor * lambda_min_sym(Qb) : 0.0;

    auto try_candidate = [&](const Eigen::MatrixXd& Hb) {
        ++search.attempts;
        const Eigen::MatrixXd K1 = make_k1(Hb);
        return pbh_observable(A11_modal, K1, tol);
    };

    if (opts.hb_strategy != HbStrategy::RandomOnly) {
        Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(p, mb);
        if (try_candidate(zero) || mb == 0) {
            search.Hb = std::move(zero);
            return search;
        }
        if (opts.hb_strategy == HbStrategy::ZeroOnly) {
            throw SynthesisError(
                "synthesis: Hb = 0 does not make (A11, K1) observable and retries are disabled");
        }
    }

    for (int t = 0; t < opts.max_tries; ++t) {
        Eigen::MatrixXd G(p, mb);
        for (Eigen::Index i = 0; i < p; ++i) {
            for (Eigen::Index j = 0; j < mb; ++j) G(i, j) = gauss(rng);
        }
        const double smax = G.norm() > 0.0 ? Eigen::JacobiSVD<Eigen::MatrixXd>(G).singularValues()(0)
                                           : 1.0;
        const Eigen::MatrixXd Hb = (0.99 * std::sqrt(std::max(bound, 0.0)) / smax) * G;
        if (try_candidate(Hb)) {
            // Membership in the admissible set, asserted as a matrix inequality.
            if (mb > 0 &&
                lambda_min_sym(bound_factor * Qb - Hb.transpose() * Hb) < -tol.psd_tol) {
                throw NumericalError("synthesis: constructed Hb violates its admissible set");
            }
            search.Hb = Hb;
            return search;
        }
    }
    std::ostringstream oss;
    oss << "synthesis: no admissible Hb found after " << search.attempts
        << " attempts (seed " << opts.seed << ")";
    throw SynthesisError(oss.str());
}

/// Mandatory post-construction self-check; a certificate that fails here is an
/// internal numerical failure, never a returned result.
void self_verify(SynthesisResult& res, bool strict, const Tolerances& tol)
{
    res.construction_check =
        strict ? verify_ssni_certificate(res.certificate_system, res.certificate_Y, tol)
               : verify_ni_certificate(res.certificate_system, res.certificate_Y, tol);
    if (!res.construction_check.passed) {
        std::ostringstream oss;
        oss << "synthesis: constructed certificate failed self-verification:";
        for (const auto& c : res.construction_check.checks) {
            if (!c.passed) oss << " " << c.name << " (measured " << c.measured << ")";
        }
        throw NumericalError(oss.str());
    }
}

struct RdOneGains {
    Eigen::MatrixXd K1_modal;
    Eigen::MatrixXd K2;
};

}  // namespace

Eigen::MatrixXd MatrixSpec::resolve(Eigen::Index dim, const char* name) const
{
    if (matrix) {
        if (matrix->rows() != dim || matrix->cols() != dim) {
            std::ostringstream oss;
            oss << name << ": expected a " << dim << "x" << dim << " matrix, got "
                << matrix->rows() << "x" << matrix->cols();
            throw OptionError(oss.str());
        }
        return *matrix;
    }
    if (scalar) return *scalar * Eigen::MatrixXd::Identity(dim, dim);
    throw OptionError(std::string(name) + ": option not set");
}

Eigen::MatrixXd MatrixSpec::resolve_or_identity(Eigen::Index dim, const char* name) const
{
    if (!set()) return Eigen::MatrixXd::Identity(dim, dim);
    return resolve(dim, name);
}

MatrixSpec MatrixSpec::from_scalar(double v)
{
    MatrixSpec s;
    s.scalar = v;
    return s;
}

MatrixSpec MatrixSpec::from_matrix(Eigen::MatrixXd M)
{
    MatrixSpec s;
    s.matrix = std::move(M);
    return s;
}

const char* to_string(IneligibilityReason r)
{
    switch (r) {
        case IneligibilityReason::BadRelativeDegree: return "bad-relative-degree";
        case IneligibilityReason::Uncontrollable: return "uncontrollable";
        case IneligibilityReason::ZeroAtOrigin: return "zero-at-origin";
        case IneligibilityReason::NotWeaklyMinimumPhase: return "not-weakly-minimum-phase";
    }
    return "unknown";
}

GateResult gate_feedback_equivalence(const StateSpaceModel& sys, const Tolerances& tol)
{
    GateResult gate;
    int r = 0;
    try {
        r = relative_degree(sys, tol);
    } catch (const UnsupportedRelativeDegreeError& e) {
        gate.reason = IneligibilityReason::BadRelativeDegree;
        gate.detail = e.what();
        return gate;
    }
    gate.relative_degree = r;

    Eigen::MatrixXd A11, reduced_input;
    if (r == 1) {
        gate.nf1 = to_normal_form_rd1(sys, tol);
        A11 = gate.nf1->A11;
        reduced_input = gate.nf1->A12;
    } else {
        gate.nf2 = to_normal_form_rd2(sys, tol);
        A11 = gate.nf2->A11;
        reduced_input = gate.nf2->A11 * gate.nf2->A13 + gate.nf2->A12;
    }

    const SpectralClassification cls = classify_spectrum(A11, tol);
    for (Eigen::Index i = 0; i < cls.eigenvalues.size(); ++i) {
        gate.zero_dynamics_eigenvalues.push_back(cls.eigenvalues(i));
    }
    gate.weakly_minimum_phase = cls.is_lyapunov_stable() && !cls.has_class(EigenvalueClass::Zero);

    gate.controllable_reduced = pbh_controllable(A11, reduced_input, tol);
    gate.controllable_full = pbh_controllable(sys.A, sys.B, tol);
    if (gate.controllable_reduced != gate.controllable_full) {
        throw NumericalError(
            "gate_feedback_equivalence: full-state and reduced-pair PBH tests disagree");
    }

    if (cls.has_class(EigenvalueClass::Zero)) {
        gate.reason = IneligibilityReason::ZeroAtOrigin;
        gate.detail = "zero dynamics has an eigenvalue at the origin";
        return gate;
    }
    if (!cls.is_lyapunov_stable()) {
        gate.reason = IneligibilityReason::NotWeaklyMinimumPhase;
        gate.detail = "zero dynamics matrix is not Lyapunov stable";
        return gate;
    }
    if (!gate.controllable_reduced) {
        gate.reason = IneligibilityReason::Uncontrollable;
        gate.detail = r == 1 ? "(A11, A12) is not controllable"
                             : "(A11, A11*A13 + A12) is not controllable";
        return gate;
    }
    gate.eligible = true;
    return gate;
}

namespace {

/// Shared state for the relative-degree-one and -two constructions in modal
/// coordinates.
struct ModalWorkspace {
    ModalSplit split;
    Eigen::MatrixXd A11_modal;          // exact blkdiag(A11a, A11b)
    Eigen::MatrixXd A11_modal_inv;
    Eigen::MatrixXd A12_modal, A12a, A12b;
    Eigen::MatrixXd A13_modal, A13a, A13b;  // relative degree two only
    Eigen::MatrixXd Qb, Y1b, Y1;            // Y1 = diag(y1a I, Y1b)
};

ModalWorkspace build_modal_workspace(const Eigen::MatrixXd& A11, const Eigen::MatrixXd& A12,
                                     const Eigen::MatrixXd* A13, const SynthesisOptions& opts,
                                     const Tolerances& tol)
{
    if (!is_invertible(A11, tol)) {
        throw PreconditionError("synthesis: zero dynamics matrix is singular (zero at the origin)");
    }
    if (opts.y1a <= 0.0) throw OptionError("y1a must be positive");

    ModalWorkspace ws;
    ws.split = modal_split(A11, tol);
    const Eigen::Index ma = ws.split.ma();
    const Eigen::Index mb = ws.split.mb();

    ws.A11_modal = blkdiag2(ws.split.A11a, ws.split.A11b);
    Eigen::MatrixXd A11a_inv(ma, ma);
    Eigen::MatrixXd A11b_inv(mb, mb);
    if (ma > 0) A11a_inv = ws.split.A11a.partialPivLu().inverse();
    if (mb > 0) A11b_inv = ws.split.A11b.partialPivLu().inverse();
    ws.A11_modal_inv = blkdiag2(A11a_inv, A11b_inv);

    ws.A12_modal = ws.split.S * A12;
    ws.A12a = ws.A12_modal.topRows(ma);
    ws.A12b = ws.A12_modal.bottomRows(mb);
    if (A13 != nullptr) {
        ws.A13_modal = ws.split.S * (*A13);
        ws.A13a = ws.A13_modal.topRows(ma);
        ws.A13b = ws.A13_modal.bottomRows(mb);
    }

    if (opts.Y1b.set()) {
        ws.Y1b = opts.Y1b.resolve(mb, "Y1b");
        require_symmetric_pd(ws.Y1b, "Y1b", tol);
        ws.Qb = -(ws.split.A11b * ws.Y1b + ws.Y1b * ws.split.A11b.transpose());
        if (mb > 0 && lambda_min_sym(ws.Qb) <= tol.psd_tol) {
            throw OptionError(
                "Y1b override does not satisfy A11b*Y1b + Y1b*A11b^T < 0 for this plant");
        }
        ws.Qb = symmetrize(ws.Qb);
    } else {
        ws.Qb = opts.Qb.resolve_or_identity(mb, "Qb");
        require_symmetric_pd(ws.Qb, "Qb", tol);
        ws.Y1b = mb > 0 ? solve_lyapunov(ws.split.A11b, ws.Qb, tol) : Eigen::MatrixXd(0, 0);
    }
    ws.Y1 = blkdiag2(opts.y1a * Eigen::MatrixXd::Identity(ma, ma), ws.Y1b);
    return ws;
}

/// Certificate of the negative imaginary lemma in modal coordinates:
/// [[Y1 + G Y2 G^T, -G Y2],[-Y2 G^T, Y2]] with G = A11^{-1} A12.
Eigen::MatrixXd internal_certificate(const ModalWorkspace& ws, const Eigen::MatrixXd& Y2)
{
    const Eigen::Index m = ws.A11_modal.rows();
    const Eigen::Index p = Y2.rows();
    const Eigen::MatrixXd G = ws.A11_modal_inv * ws.A12_modal;
    Eigen::MatrixXd Y(m + p, m + p);
    Y.topLeftCorner(m, m) = ws.Y1 + G * Y2 * G.transpose();
    Y.topRightCorner(m, p) = -G * Y2;
    Y.bottomLeftCorner(p, m) = Y.topRightCorner(m, p).transpose();
    Y.bottomRightCorner(p, p) = Y2;
    return symmetrize(Y);
}

}  // namespace

SynthesisResult synth_ni_rd1(const NormalFormRD1& nf, const SynthesisOptions& opts,
                             const Tolerances& tol)
{
    const Eigen::Index p = nf.p();
    if (nf.m() == 0) return synth_ni_rd1_m0(nf.A22, nf.CB, opts, tol);

    if (!classify_spectrum(nf.A11, tol).is_lyapunov_stable()) {
        throw PreconditionError("synth_ni_rd1: A11 must be Lyapunov stable");
    }
    if (!pbh_controllable(nf.A11, nf.A12, tol)) {
        throw PreconditionError("synth_ni_rd1: (A11, A12) must be controllable");
    }

    ModalWorkspace ws = build_modal_workspace(nf.A11, nf.A12, nullptr, opts, tol);
    const Eigen::Index ma = ws.split.ma();
    const Eigen::Index mb = ws.split.mb();
    const Eigen::Index m = ma + mb;

    const Eigen::MatrixXd Y2 = opts.Y2.resolve_or_identity(p, "Y2");
    require_symmetric_pd(Y2, "Y2", tol);
    const Eigen::MatrixXd Y2inv = Y2.partialPivLu().inverse();
    const Eigen::MatrixXd Y1b_inv =
        mb > 0 ? ws.Y1b.partialPivLu().inverse() : Eigen::MatrixXd(0, 0);

    const Eigen::MatrixXd A11a_invT = ws.A11_modal_inv.topLeftCorner(ma, ma).transpose();
    const Eigen::MatrixXd A11b_invT = ws.A11_modal_inv.bottomRightCorner(mb, mb).transpose();

    // K1a scaled consistently with the y1a certificate block (equal to the
    // unscaled gain at the default y1a = 1).
    const Eigen::MatrixXd K1a = (-1.0 / opts.y1a) * ws.A12a.transpose() * A11a_invT;

    auto make_k1 = [&](const Eigen::MatrixXd& Hb) {
        Eigen::MatrixXd K1(p, m);
        K1.leftCols(ma) = K1a;
        K1.rightCols(mb) = (-ws.A12b.transpose() * A11b_invT + Hb) * Y1b_inv;
        return K1;
    };

    const HbSearch search =
        find_admissible_hb(ws.A11_modal, make_k1, p, mb, ws.Qb, 2.0, opts, tol);

    SynthesisResult res;
    res.kind = SynthesisKind::NiRd1;
    res.relative_degree = 1;
    res.modal = ws.split;
    res.Hb_used = search.Hb;
    res.Qb_used = ws.Qb;
    res.Y1_used = ws.Y1;
    res.Y2_used = Y2;
    res.options_used = opts;

    const Eigen::MatrixXd K1_modal = make_k1(search.Hb);
    res.K2 = K1_modal * ws.A11_modal_inv * ws.A12_modal - Y2inv;
    res.K1 = K1_modal * ws.split.S;

    res.certificate_Y = internal_certificate(ws, Y2);

    Eigen::MatrixXd Am(m + p, m + p);
    Am.topLeftCorner(m, m) = ws.A11_modal;
    Am.topRightCorner(m, p) = ws.A12_modal;
    Am.bottomLeftCorner(p, m) = K1_modal;
    Am.bottomRightCorner(p, p) = res.K2;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m + p, p);
    B.bottomRows(p).setIdentity();
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(p, m + p);
    C.rightCols(p).setIdentity();
    res.certificate_system = StateSpaceModel(Am, B, C);

    Eigen::MatrixXd An = Am;
    An.topLeftCorner(m, m) = nf.A11;
    An.topRightCorner(m, p) = nf.A12;
    An.bottomLeftCorner(p, m) = res.K1;
    res.closed_loop = StateSpaceModel(An, B, C);

    res.cert_from_nf = blkdiag2(ws.split.S, Eigen::MatrixXd::Identity(p, p));
    self_verify(res, /*strict=*/false, tol);
    return res;
}

SynthesisResult synth_ni_rd1_m0(const Eigen::MatrixXd& A22, const Eigen::MatrixXd& CB,
                                const SynthesisOptions& opts, const Tolerances& tol)
{
    const Eigen::Index p = A22.rows();
    if (A22.rows() != A22.cols() || CB.rows() != p || CB.cols() != p) {
        throw DimensionError("synth_ni_rd1_m0: A22 and CB must be p x p");
    }
    const Eigen::MatrixXd Y2 = opts.Y2.resolve_or_identity(p, "Y2");
    require_symmetric_pd(Y2, "Y2", tol);

    SynthesisResult res;
    res.kind = SynthesisKind::NiRd1M0;
    res.relative_degree = 1;
    res.K1.resize(p, 0);
    res.K2 = -symmetrize(Y2.partialPivLu().inverse());  // K0 = K0^T < 0
    res.Y2_used = Y2;
    res.Y1_used.resize(0, 0);
    res.Qb_used.resize(0, 0);
    res.Hb_used.resize(p, 0);
    res.options_used = opts;
    res.modal.S.resize(0, 0);
    res.modal.A11a.resize(0, 0);
    res.modal.A11b.resize(0, 0);

    res.certificate_Y = Y2;  // Y0 = -K0^{-1}
    res.certificate_system =
        StateSpaceModel(res.K2, Eigen::MatrixXd::Identity(p, p), Eigen::MatrixXd::Identity(p, p));
    res.closed_loop = res.certificate_system;
    res.cert_from_nf = Eigen::MatrixXd::Identity(p, p);
    self_verify(res, /*strict=*/false, tol);
    return res;
}

SynthesisResult synth_ni_rd2(const NormalFormRD2& nf, const SynthesisOptions& opts,
                             const Tolerances& tol)
{
    const Eigen::Index p = nf.p();
    if (nf.m() == 0) return synth_ni_rd2_m0(nf.A32, nf.A33, nf.CAB, opts, tol);

    if (!classify_spectrum(nf.A11, tol).is_lyapunov_stable()) {
        throw PreconditionError("synth_ni_rd2: A11 must be Lyapunov stable");
    }
    if (!pbh_controllable(nf.A11, nf.A11 * nf.A13 + nf.A12, tol)) {
        throw PreconditionError("synth_ni_rd2: (A11, A11*A13 + A12) must be controllable");
    }

    Eigen::MatrixXd K3 = -Eigen::MatrixXd::Identity(p, p);
    if (opts.K3.set()) K3 = opts.K3.resolve(p, "K3");
    if (lambda_max_sym(K3 + K3.transpose()) >= -tol.psd_tol) {
        throw OptionError("K3 must satisfy K3 + K3^T < 0");
    }
    const Eigen::MatrixXd E = sqrt_pd(-(K3 + K3.transpose()), tol);

    ModalWorkspace ws = build_modal_workspace(nf.A11, nf.A12, &nf.A13, opts, tol);
    const Eigen::Index ma = ws.split.ma();
    const Eigen::Index mb = ws.split.mb();
    const Eigen::Index m = ma + mb;

    const Eigen::MatrixXd Y2 = opts.Y2.resolve_or_identity(p, "Y2");
    require_symmetric_pd(Y2, "Y2", tol);
    const Eigen::MatrixXd Y2inv = Y2.partialPivLu().inverse();
    const Eigen::MatrixXd Y1b_inv =
        mb > 0 ? ws.Y1b.partialPivLu().inverse() : Eigen::MatrixXd(0, 0);

    const Eigen::MatrixXd A11a_invT = ws.A11_modal_inv.topLeftCorner(ma, ma).transpose();
    const Eigen::MatrixXd A11b_invT = ws.A11_modal_inv.bottomRightCorner(mb, mb).transpose();

    const Eigen::MatrixXd K1a =
        (1.0 / opts.y1a) * (-ws.A12a.transpose() * A11a_invT - ws.A13a.transpose());

    auto make_k1 = [&](const Eigen::MatrixXd& Hb) {
        Eigen::MatrixXd K1(p, m);
        K1.leftCols(ma) = K1a;
        K1.rightCols(mb) =
            (-ws.A12b.transpose() * A11b_invT - ws.A13b.transpose() + E * Hb) * Y1b_inv;
        return K1;
    };

    const HbSearch search =
        find_admissible_hb(ws.A11_modal, make_k1, p, mb, ws.Qb, 1.0, opts, tol);

    SynthesisResult res;
    res.kind = SynthesisKind::NiRd2;
    res.relative_degree = 2;
    res.modal = ws.split;
    res.Hb_used = search.Hb;
    res.Qb_used = ws.Qb;
    res.Y1_used = ws.Y1;
    res.Y2_used = Y2;
    res.K3 = K3;
    res.options_used = opts;

    const Eigen::MatrixXd K1_modal = make_k1(search.Hb);
    res.K2 = K1_modal * ws.A11_modal_inv * ws.A12_modal - Y2inv;
    res.K1 = K1_modal * ws.split.S;

    const Eigen::Index n = m + 2 * p;
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, n);
    Y.topLeftCorner(m + p, m + p) = internal_certificate(ws, Y2);
    Y.bottomRightCorner(p, p).setIdentity();
    res.certificate_Y = Y;

    Eigen::MatrixXd Am = Eigen::MatrixXd::Zero(n, n);
    Am.topLeftCorner(m, m) = ws.A11_modal;
    Am.block(0, m, m, p) = ws.A12_modal;
    Am.block(0, m + p, m, p) = ws.A13_modal;
    Am.block(m, m + p, p, p).setIdentity();
    Am.block(m + p, 0, p, m) = K1_modal;
    Am.block(m + p, m, p, p) = res.K2;
    Am.block(m + p, m + p, p, p) = K3;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, p);
    B.bottomRows(p).setIdentity();
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(p, n);
    C.middleCols(m, p).setIdentity();
    res.certificate_system = StateSpaceModel(Am, B, C);

    Eigen::MatrixXd An = Am;
    An.topLeftCorner(m, m) = nf.A11;
    An.block(0, m, m, p) = nf.A12;
    An.block(0, m + p, m, p) = nf.A13;
    An.block(m + p, 0, p, m) = res.K1;
    res.closed_loop = StateSpaceModel(An, B, C);

    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    M.topLeftCorner(m, m) = ws.split.S;
    res.cert_from_nf = M;
    self_verify(res, /*strict=*/false, tol);
    return res;
}

SynthesisResult synth_ni_rd2_m0(const Eigen::MatrixXd& A32, const Eigen::MatrixXd& A33,
                                const Eigen::MatrixXd& CAB, const SynthesisOptions& opts,
                                const Tolerances& tol)
{
    const Eigen::Index p = A32.rows();
    if (A32.cols() != p || A33.rows() != p || A33.cols() != p || CAB.rows() != p ||
        CAB.cols() != p) {
        throw DimensionError("synth_ni_rd2_m0: A32, A33, CAB must be p x p");
    }
    const Eigen::MatrixXd Y2 = opts.Y2.resolve_or_identity(p, "Y2");
    require_symmetric_pd(Y2, "Y2", tol);
    Eigen::MatrixXd K02 = -Eigen::MatrixXd::Identity(p, p);
    if (opts.K3.set()) K02 = opts.K3.resolve(p, "K3");
    if (lambda_max_sym(K02 + K02.transpose()) >= -tol.psd_tol) {
        throw OptionError("K3 (used as K02) must satisfy K02 + K02^T < 0");
    }

    SynthesisResult res;
    res.kind = SynthesisKind::NiRd2M0;
    res.relative_degree = 2;
    res.K1.resize(p, 0);
    res.K2 = -symmetrize(Y2.partialPivLu().inverse());  // K01
    res.K3 = K02;
    res.Y2_used = Y2;
    res.Y1_used.resize(0, 0);
    res.Qb_used.resize(0, 0);
    res.Hb_used.resize(p, 0);
    res.options_used = opts;
    res.modal.S.resize(0, 0);
    res.modal.A11a.resize(0, 0);
    res.modal.A11b.resize(0, 0);

    Eigen::MatrixXd Am = Eigen::MatrixXd::Zero(2 * p, 2 * p);
    Am.topRightCorner(p, p).setIdentity();
    Am.bottomLeftCorner(p, p) = res.K2;
    Am.bottomRightCorner(p, p) = K02;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2 * p, p);
    B.bottomRows(p).setIdentity();
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(p, 2 * p);
    C.leftCols(p).setIdentity();

    res.certificate_Y = blkdiag2(Y2, Eigen::MatrixXd::Identity(p, p));
    res.certificate_system = StateSpaceModel(Am, B, C);
    res.closed_loop = res.certificate_system;
    res.cert_from_nf = Eigen::MatrixXd::Identity(2 * p, 2 * p);
    self_verify(res, /*strict=*/false, tol);
    return res;
}

SynthesisResult synth_ssni_rd1(const NormalFormRD1& nf, const SynthesisOptions& opts,
                               const Tolerances& tol)
{
    const Eigen::Index p = nf.p();
    const Eigen::Index m = nf.m();

    if (m == 0) {
        SynthesisResult res = synth_ni_rd1_m0(nf.A22, nf.CB, opts, tol);
        res.kind = SynthesisKind::SsniRd1;
        self_verify(res, /*strict=*/true, tol);
        return res;
    }

    if (!classify_spectrum(nf.A11, tol).is_hurwitz()) {
        throw PreconditionError(
            "synth_ssni_rd1: A11 must be Hurwitz (the plant must be minimum phase)");
    }
    if (!pbh_controllable(nf.A11, nf.A12, tol)) {
        throw PreconditionError("synth_ssni_rd1: (A11, A12) must be controllable");
    }

    Eigen::MatrixXd Y1, Q;
    if (opts.Y1b.set()) {
        Y1 = opts.Y1b.resolve(m, "Y1b");
        require_symmetric_pd(Y1, "Y1b", tol);
        Q = -(nf.A11 * Y1 + Y1 * nf.A11.transpose());
        if (lambda_min_sym(Q) <= tol.psd_tol) {
            throw OptionError("Y1b override does not satisfy A11*Y1 + Y1*A11^T < 0");
        }
    } else {
        Q = opts.Qb.resolve_or_identity(m, "Qb");
        require_symmetric_pd(Q, "Qb", tol);
        Y1 = solve_lyapunov(nf.A11, Q, tol);
    }

    const Eigen::MatrixXd Y2 = opts.Y2.resolve_or_identity(p, "Y2");
    require_symmetric_pd(Y2, "Y2", tol);

    SynthesisResult res;
    res.kind = SynthesisKind::SsniRd1;
    res.relative_degree = 1;
    res.Y1_used = Y1;
    res.Y2_used = Y2;
    res.Qb_used = Q;
    res.Hb_used = Eigen::MatrixXd::Zero(p, 0);
    res.options_used = opts;
    res.modal.S = Eigen::MatrixXd::Identity(m, m);  // no modal split: A11 is Hurwitz
    res.modal.A11a.resize(0, 0);
    res.modal.A11b = nf.A11;

    const Eigen::MatrixXd A11_inv_T = nf.A11.transpose().partialPivLu().inverse();
    res.K1 = -nf.A12.transpose() * A11_inv_T * Y1.partialPivLu().inverse();
    res.K2 = res.K1 * nf.A11.partialPivLu().solve(nf.A12) - Y2.partialPivLu().inverse();

    const Eigen::MatrixXd G = nf.A11.partialPivLu().solve(nf.A12);
    Eigen::MatrixXd Y(m + p, m + p);
    Y.topLeftCorner(m, m) = Y1 + G * Y2 * G.transpose();
    Y.topRightCorner(m, p) = -G * Y2;
    Y.bottomLeftCorner(p, m) = Y.topRightCorner(m, p).transpose();
    Y.bottomRightCorner(p, p) = Y2;
    res.certificate_Y = symmetrize(Y);

    Eigen::MatrixXd Am(m + p, m + p);
    Am.topLeftCorner(m, m) = nf.A11;
    Am.topRightCorner(m, p) = nf.A12;
    Am.bottomLeftCorner(p, m) = res.K1;
    Am.bottomRightCorner(p, p) = res.K2;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m + p, p);
    B.bottomRows(p).setIdentity();
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(p, m + p);
    C.rightCols(p).setIdentity();
    res.certificate_system = StateSpaceModel(Am, B, C);
    res.closed_loop = res.certificate_system;
    res.cert_from_nf = Eigen::MatrixXd::Identity(m + p, m + p);

    self_verify(res, /*strict=*/true, tol);
    return res;
}

SsniRefusal ssni_rd2_refusal()
{
    SsniRefusal refusal;
    refusal.code = "ssni-relative-degree-two";
    refusal.reason =
        "a relative-degree-two closed loop cannot be strongly strictly negative imaginary: "
        "the input/output structure forces a zero diagonal block in A*Y through "
        "B + A*Y*C^T = 0, so A*Y + Y*A^T cannot be sign definite";
    return refusal;
}

FeedbackLaw compose_original_feedback(const NormalFormRD1& nf, const SynthesisResult& gains)
{
    const Eigen::Index p = nf.p();
    const Eigen::Index m = nf.m();
    if (gains.K1.rows() != p || gains.K1.cols() != m || gains.K2.rows() != p ||
        gains.K2.cols() != p) {
        throw DimensionError("compose_original_feedback: gain dimensions do not match the form");
    }
    FeedbackLaw law;
    law.Kv = nf.CB.partialPivLu().inverse();
    Eigen::MatrixXd delta(p, m + p);
    delta.leftCols(m) = gains.K1 - nf.A21;
    delta.rightCols(p) = gains.K2 - nf.A22;
    law.Kx = law.Kv * delta * nf.T;
    return law;
}

FeedbackLaw compose_original_feedback(const NormalFormRD2& nf, const SynthesisResult& gains)
{
    const Eigen::Index p = nf.p();
    const Eigen::Index m = nf.m();
    if (gains.K1.rows() != p || gains.K1.cols() != m || gains.K2.rows() != p ||
        gains.K2.cols() != p || gains.K3.rows() != p || gains.K3.cols() != p) {
        throw DimensionError("compose_original_feedback: gain dimensions do not match the form");
    }
    FeedbackLaw law;
    law.Kv = nf.CAB.partialPivLu().inverse();
    Eigen::MatrixXd delta(p, m + 2 * p);
    delta.leftCols(m) = gains.K1 - nf.A31;
    delta.middleCols(m, p) = gains.K2 - nf.A32;
    delta.rightCols(p) = gains.K3 - nf.A33;
    law.Kx = law.Kv * delta * nf.T;
    return law;
}

SynthesisOutcome synthesize(const StateSpaceModel& plant, SynthesisGoal goal,
                            const SynthesisOptions& opts, const Tolerances& tol)
{
    SynthesisOutcome outcome;
    outcome.gate = gate_feedback_equivalence(plant, tol);
    if (!outcome.gate.eligible) return outcome;

    const bool want_ssni = goal == SynthesisGoal::StronglyStrictNegativeImaginary;
    if (want_ssni && outcome.gate.relative_degree == 2) {
        outcome.refusal = ssni_rd2_refusal();
        return outcome;
    }

    if (outcome.gate.relative_degree == 1) {
        const NormalFormRD1& nf = *outcome.gate.nf1;
        if (want_ssni && nf.m() > 0 && !classify_spectrum(nf.A11, tol).is_hurwitz()) {
            SsniRefusal refusal;
            refusal.code = "ssni-not-minimum-phase";
            refusal.reason =
                "strongly strict negative imaginary synthesis requires asymptotically stable "
                "zero dynamics (Hurwitz A11); this plant is only weakly minimum phase";
            outcome.refusal = refusal;
            return outcome;
        }
        SynthesisResult res = want_ssni ? synth_ssni_rd1(nf, opts, tol)
                                        : synth_ni_rd1(nf, opts, tol);
        const FeedbackLaw law = compose_original_feedback(nf, res);
        res.Kx = law.Kx;
        res.Kv = law.Kv;
        outcome.result = std::move(res);
    } else {
        const NormalFormRD2& nf = *outcome.gate.nf2;
        SynthesisResult res = synth_ni_rd2(nf, opts, tol);
        const FeedbackLaw law = compose_original_feedback(nf, res);
        res.Kx = law.Kx;
        res.Kv = law.Kv;
        outcome.result = std::move(res);
    }
    return outcome;
}

}  // namespace nisyn
