#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

#include "nisyn/lti.hpp"
#include "nisyn/normal_form.hpp"
#include "nisyn/tolerances.hpp"
#include "nisyn/verify.hpp"

namespace nisyn {

/// Matrix-valued option that may be given as a scalar shorthand (resolved to
/// scalar * I at the dimension required by the use site).
struct MatrixSpec {
    std::optional<Eigen::MatrixXd> matrix;
    std::optional<double> scalar;

    bool set() const { return matrix.has_value() || scalar.has_value(); }
    Eigen::MatrixXd resolve(Eigen::Index dim, const char* name) const;
    Eigen::MatrixXd resolve_or_identity(Eigen::Index dim, const char* name) const;

    static MatrixSpec from_scalar(double v);
    static MatrixSpec from_matrix(Eigen::MatrixXd M);
};

enum class HbStrategy {
    ZeroFirst,   // try Hb = 0, then seeded random draws
    RandomOnly,  // seeded random draws only
    ZeroOnly,    // Hb = 0, no retries
};

struct SynthesisOptions {
    MatrixSpec Qb;             // symmetric PD, default identity
    MatrixSpec Y1b;            // override: bypasses the Lyapunov solve for Y1b
    double y1a = 1.0;          // scalar weight of the lossless certificate block
    MatrixSpec Y2;             // symmetric PD, default identity
    MatrixSpec K3;             // K3 + K3^T < 0, default -identity (relative degree two)
    HbStrategy hb_strategy = HbStrategy::ZeroFirst;
    std::uint64_t seed = 0;
    int max_tries = 64;
};

enum class SynthesisKind {
    NiRd1,
    NiRd1M0,
    NiRd2,
    NiRd2M0,
    SsniRd1,
};

/// Everything produced by a successful gain construction. Gains are stored in
/// the normal-form coordinates; the certificate Y lives in the modal
/// coordinates of `certificate_system`, with `cert_from_nf` mapping
/// normal-form states into certificate states (x_cert = cert_from_nf * x_nf).
struct SynthesisResult {
    SynthesisKind kind = SynthesisKind::NiRd1;
    int relative_degree = 1;

    Eigen::MatrixXd K1;  // p x m (empty when m = 0)
    Eigen::MatrixXd K2;  // p x p (K0 resp. K01 in the m = 0 cases)
    Eigen::MatrixXd K3;  // p x p (relative degree two; K02 in the m = 0 case)

    Eigen::MatrixXd Kx;  // p x n original-coordinate gain (set by compose step)
    Eigen::MatrixXd Kv;  // p x p input-channel gain (CB)^{-1} or (CAB)^{-1}

    Eigen::MatrixXd certificate_Y;
    StateSpaceModel certificate_system;
    Eigen::MatrixXd cert_from_nf;
    StateSpaceModel closed_loop;  // normal-form coordinates, input v

    ModalSplit modal;
    Eigen::MatrixXd Hb_used;   // p x m_b
    Eigen::MatrixXd Qb_used;   // m_b x m_b
    Eigen::MatrixXd Y1_used;   // m x m, diag(y1a I, Y1b) in modal coordinates
    Eigen::MatrixXd Y2_used;   // p x p
    SynthesisOptions options_used;

    VerificationReport construction_check;
};

enum class IneligibilityReason {
    BadRelativeDegree,
    Uncontrollable,
    ZeroAtOrigin,
    NotWeaklyMinimumPhase,
};

const char* to_string(IneligibilityReason r);

/// Outcome of the feedback-equivalence gate: eligibility with the normal form
/// attached, or a machine-readable refusal reason. Never throws for domain
/// ineligibility.
struct GateResult {
    bool eligible = false;
    int relative_degree = 0;  // 0 when the relative degree itself is unsupported
    std::optional<NormalFormRD1> nf1;
    std::optional<NormalFormRD2> nf2;
    std::optional<IneligibilityReason> reason;
    std::string detail;

    // Diagnostics for reporting.
    bool controllable_full = false;
    bool controllable_reduced = false;
    std::vector<std::complex<double>> zero_dynamics_eigenvalues;
    bool weakly_minimum_phase = false;

    Eigen::Index m() const { return nf1 ? nf1->m() : (nf2 ? nf2->m() : 0); }
};

GateResult gate_feedback_equivalence(const StateSpaceModel& sys, const Tolerances& tol = {});

SynthesisResult synth_ni_rd1(const NormalFormRD1& nf, const SynthesisOptions& opts = {},
                             const Tolerances& tol = {});
SynthesisResult synth_ni_rd1_m0(const Eigen::MatrixXd& A22, const Eigen::MatrixXd& CB,
                                const SynthesisOptions& opts = {}, const Tolerances& tol = {});
SynthesisResult synth_ni_rd2(const NormalFormRD2& nf, const SynthesisOptions& opts = {},
                             const Tolerances& tol = {});
SynthesisResult synth_ni_rd2_m0(const Eigen::MatrixXd& A32, const Eigen::MatrixXd& A33,
                                const Eigen::MatrixXd& CAB, const SynthesisOptions& opts = {},
                                const Tolerances& tol = {});
SynthesisResult synth_ssni_rd1(const NormalFormRD1& nf, const SynthesisOptions& opts = {},
                               const Tolerances& tol = {});

/// Typed impossibility result for SSNI requests on relative-degree-two
/// plants: the output equation forces a zero diagonal block in A*Y, so
/// A*Y + Y*A^T can never be sign definite.
struct SsniRefusal {
    std::string code;    // "ssni-relative-degree-two"
    std::string reason;
};
SsniRefusal ssni_rd2_refusal();

/// Original-coordinate feedback u = Kx x + Kv v realizing the normal-form
/// gains through the state transformation T.
struct FeedbackLaw {
    Eigen::MatrixXd Kx;
    Eigen::MatrixXd Kv;
};
FeedbackLaw compose_original_feedback(const NormalFormRD1& nf, const SynthesisResult& gains);
FeedbackLaw compose_original_feedback(const NormalFormRD2& nf, const SynthesisResult& gains);

enum class SynthesisGoal { NegativeImaginary, StronglyStrictNegativeImaginary };

/// Gate + dispatch + original-coordinate composition in one call. Exactly one
/// of `result` / `refusal` is set when the gate passes; neither when it fails.
struct SynthesisOutcome {
    GateResult gate;
    std::optional<SynthesisResult> result;
    std::optional<SsniRefusal> refusal;
};
SynthesisOutcome synthesize(const StateSpaceModel& plant,
                            SynthesisGoal goal = SynthesisGoal::NegativeImaginary,
                            const SynthesisOptions& opts = {}, const Tolerances& tol = {});

}  // namespace nisyn
