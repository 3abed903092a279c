#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "nisyn/lti.hpp"
#include "nisyn/tolerances.hpp"

namespace nisyn {

struct CheckItem {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool passed = false;
};

struct VerificationReport {
    bool passed = true;
    std::vector<CheckItem> checks;
    std::vector<double> pole_warnings;

    void add(const std::string& name, double measured, double threshold, bool ok);
    const CheckItem* find(const std::string& name) const;
};

/// Negative imaginary lemma check against a caller-supplied certificate Y:
/// Y = Y^T > 0, A Y + Y A^T <= 0, B + A Y C^T = 0, det(A) != 0, D = D^T,
/// minimal realization. All outcomes are report entries, never exceptions.
VerificationReport verify_ni_certificate(const StateSpaceModel& sys, const Eigen::MatrixXd& Y,
                                         const Tolerances& tol = {});

/// Strict variant: A Y + Y A^T < 0 (margin), A Hurwitz, R(s) + R(-s)^T of
/// full normal rank, no observable uncontrollable modes.
VerificationReport verify_ssni_certificate(const StateSpaceModel& sys, const Eigen::MatrixXd& Y,
                                           const Tolerances& tol = {},
                                           double strict_margin = 1e-10);

/// Frequency-domain definition check: j[R(jw) - R(jw)*] >= 0 on the grid,
/// no poles at the origin or in the open right half-plane; grid points near
/// imaginary-axis pole frequencies are excluded from the semidefiniteness
/// test and listed in pole_warnings; imaginary-axis poles, when present,
/// must be simple with Hermitian PSD residue (estimated numerically).
VerificationReport verify_ni_freq(const StateSpaceModel& sys, const std::vector<double>& grid,
                                  const Tolerances& tol = {});

/// Strict frequency check plus the limit conditions, approximated at the grid
/// extremes: lambda_min(w*M(w)) at the largest and lambda_min(M(w)/w) at the
/// smallest grid point must both clear the margin; A must be Hurwitz.
VerificationReport verify_ssni_freq(const StateSpaceModel& sys, const std::vector<double>& grid,
                                    const Tolerances& tol = {}, double strict_margin = 1e-10);

/// DC-gain internal-stability test for the positive feedback interconnection
/// of an NI loop R and an SNI uncertainty Delta:
/// R(inf)*Delta(inf) = 0, Delta(inf) >= 0, lambda_max(R(0) Delta(0)) < 1 - margin,
/// with both frequency-domain properties re-checked on a default grid.
VerificationReport dc_gain_stability(const StateSpaceModel& R, const StateSpaceModel& Delta,
                                     const Tolerances& tol = {}, double margin = 1e-9);

}  // namespace nisyn
