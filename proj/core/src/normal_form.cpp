#include "nisyn/normal_form.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "nisyn/errors.hpp"
#include "nisyn/linalg.hpp"

namespace nisyn {

namespace {

/// Orthonormal basis of the left null space of M (rows x of x^T M = 0),
/// returned as a (rows(M) - rank) x rows(M) matrix with SVD ordering.
Eigen::MatrixXd left_null_basis(const Eigen::MatrixXd& M, Eigen::Index expected_dim)
{
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU);
    return svd.matrixU().rightCols(expected_dim).transpose();
}

/// Deterministic sign convention: flip each row so that its entry of largest
/// magnitude (first among ties) is positive.
void normalize_row_signs(Eigen::MatrixXd& rows)
{
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        Eigen::Index imax = 0;
        double best = 0.0;
        for (Eigen::Index c = 0; c < rows.cols(); ++c) {
            if (std::abs(rows(r, c)) > best + 1e-14) {
                best = std::abs(rows(r, c));
                imax = c;
            }
        }
        if (rows(r, imax) < 0.0) rows.row(r) = -rows.row(r);
    }
}

void check_block_residual(const Eigen::MatrixXd& measured, const char* what, double scale,
                          const Tolerances& tol)
{
    if (measured.size() > 0 && measured.norm() > tol.residual_tol * std::max(1.0, scale)) {
        std::ostringstream oss;
        oss << "normal form construction: " << what << " residual " << measured.norm()
            << " exceeds tolerance";
        throw ConstructionError(oss.str());
    }
}

}  // namespace

StateSpaceModel NormalFormRD1::to_state_space() const
{
    const Eigen::Index mm = m();
    const Eigen::Index pp = p();
    Eigen::MatrixXd A(mm + pp, mm + pp);
    A.topLeftCorner(mm, mm) = A11;
    A.topRightCorner(mm, pp) = A12;
    A.bottomLeftCorner(pp, mm) = A21;
    A.bottomRightCorner(pp, pp) = A22;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(mm + pp, pp);
    B.bottomRows(pp) = CB;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(pp, mm + pp);
    C.rightCols(pp).setIdentity();
    return StateSpaceModel(std::move(A), std::move(B), std::move(C));
}

StateSpaceModel NormalFormRD2::to_state_space() const
{
    const Eigen::Index mm = m();
    const Eigen::Index pp = p();
    const Eigen::Index n = mm + 2 * pp;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    A.topLeftCorner(mm, mm) = A11;
    A.block(0, mm, mm, pp) = A12;
    A.block(0, mm + pp, mm, pp) = A13;
    A.block(mm, mm + pp, pp, pp).setIdentity();
    A.block(mm + pp, 0, pp, mm) = A31;
    A.block(mm + pp, mm, pp, pp) = A32;
    A.block(mm + pp, mm + pp, pp, pp) = A33;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, pp);
    B.bottomRows(pp) = CAB;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(pp, n);
    C.middleCols(mm, pp).setIdentity();
    return StateSpaceModel(std::move(A), std::move(B), std::move(C));
}

NormalFormRD1 to_normal_form_rd1(const StateSpaceModel& sys, const Tolerances& tol)
{
    if (relative_degree(sys, tol) != 1) {
        throw PreconditionError("to_normal_form_rd1: system does not have relative degree one");
    }
    const Eigen::Index n = sys.order();
    const Eigen::Index p = sys.channels();
    const Eigen::Index m = n - p;

    NormalFormRD1 nf;
    nf.CB = sys.C * sys.B;
    nf.T.resize(n, n);
    if (m > 0) {
        Eigen::MatrixXd Cz = left_null_basis(sys.B, m);
        normalize_row_signs(Cz);
        nf.T.topRows(m) = Cz;
    }
    nf.T.bottomRows(p) = sys.C;

    if (!is_invertible(nf.T, tol)) {
        throw ConstructionError("to_normal_form_rd1: transformation matrix is singular");
    }
    const Eigen::MatrixXd Tinv = nf.T.partialPivLu().inverse();
    const Eigen::MatrixXd M = nf.T * sys.A * Tinv;

    nf.A11 = M.topLeftCorner(m, m);
    nf.A12 = M.topRightCorner(m, p);
    nf.A21 = M.bottomLeftCorner(p, m);
    nf.A22 = M.bottomRightCorner(p, p);

    const double scale = std::max(sys.A.norm(), sys.B.norm());
    check_block_residual((nf.T * sys.B).topRows(m), "T*B top block", scale, tol);
    Eigen::MatrixXd CTinv = sys.C * Tinv;
    CTinv.rightCols(p) -= Eigen::MatrixXd::Identity(p, p);
    check_block_residual(CTinv, "C*T^{-1} structure", std::max(1.0, sys.C.norm()), tol);
    return nf;
}

NormalFormRD2 to_normal_form_rd2(const StateSpaceModel& sys, const Tolerances& tol)
{
    if (relative_degree(sys, tol) != 2) {
        throw PreconditionError("to_normal_form_rd2: system does not have relative degree two");
    }
    const Eigen::Index n = sys.order();
    const Eigen::Index p = sys.channels();
    const Eigen::Index m = n - 2 * p;
    if (m < 0) {
        throw ConstructionError("to_normal_form_rd2: n < 2p is impossible for relative degree two");
    }

    NormalFormRD2 nf;
    nf.CAB = sys.C * sys.A * sys.B;
    nf.T.resize(n, n);
    if (m > 0) {
        // Rows orthogonal to both the columns of B and the rows of C; since
        // C B = 0 these complete [Cz; C] to a basis of the left null space of B.
        Eigen::MatrixXd W(n, 2 * p);
        W.leftCols(p) = sys.B;
        W.rightCols(p) = sys.C.transpose();
        Eigen::MatrixXd Cz = left_null_basis(W, m);
        normalize_row_signs(Cz);
        nf.T.topRows(m) = Cz;
    }
    nf.T.middleRows(m, p) = sys.C;
    nf.T.bottomRows(p) = sys.C * sys.A;

    if (!is_invertible(nf.T, tol)) {
        throw ConstructionError("to_normal_form_rd2: transformation matrix is singular");
    }
    const Eigen::MatrixXd Tinv = nf.T.partialPivLu().inverse();
    const Eigen::MatrixXd M = nf.T * sys.A * Tinv;

    nf.A11 = M.topLeftCorner(m, m);
    nf.A12 = M.block(0, m, m, p);
    nf.A13 = M.block(0, m + p, m, p);
    nf.A31 = M.block(m + p, 0, p, m);
    nf.A32 = M.block(m + p, m, p, p);
    nf.A33 = M.block(m + p, m + p, p, p);

    const double scale = std::max({sys.A.norm(), sys.B.norm(), 1.0});
    check_block_residual((nf.T * sys.B).topRows(m + p), "T*B top blocks", scale, tol);
    Eigen::MatrixXd chain = M.middleRows(m, p);
    chain.middleCols(m + p, p) -= Eigen::MatrixXd::Identity(p, p);
    check_block_residual(chain, "integrator chain row", scale, tol);
    return nf;
}

namespace {

/// Canonical real basis for the invariant subspace of one purely imaginary
/// conjugate pair: columns (vr, vi) of the complex eigenvector v = vr + j vi,
/// rotated so vr and vi are orthogonal and scaled to unit geometric mean.
void canonical_pair_basis(Eigen::VectorXcd v, Eigen::VectorXd& vr, Eigen::VectorXd& vi)
{
    const Eigen::VectorXd re = v.real();
    const Eigen::VectorXd im = v.imag();
    const double a = re.squaredNorm() - im.squaredNorm();
    const double b = 2.0 * re.dot(im);
    const double phi = 0.5 * std::atan2(-b, a);
    v *= std::complex<double>(std::cos(phi), std::sin(phi));
    vr = v.real();
    vi = v.imag();
    const double scale = std::sqrt(std::max(vr.norm() * vi.norm(), 1e-300));
    vr /= scale;
    vi /= scale;
}

}  // namespace

ModalSplit modal_split(const Eigen::MatrixXd& A11, const Tolerances& tol)
{
    if (A11.rows() != A11.cols()) throw DimensionError("modal_split: A11 must be square");
    const Eigen::Index m = A11.rows();

    ModalSplit split;
    if (m == 0) {
        split.S.resize(0, 0);
        split.A11a.resize(0, 0);
        split.A11b.resize(0, 0);
        return split;
    }

    const SpectralClassification cls = classify_spectrum(A11, tol);
    if (cls.has_class(EigenvalueClass::Zero)) {
        throw PreconditionError("modal_split: zero dynamics has an eigenvalue at the origin");
    }
    if (!cls.is_lyapunov_stable()) {
        throw PreconditionError("modal_split: zero dynamics matrix is not Lyapunov stable");
    }

    Eigen::RealSchur<Eigen::MatrixXd> schur(A11);
    if (schur.info() != Eigen::Success) throw NumericalError("modal_split: Schur decomposition failed");
    Eigen::MatrixXd T = schur.matrixT();
    Eigen::MatrixXd Q = schur.matrixU();

    const double theta = tol.axis_threshold(A11.norm());
    const auto on_axis = [theta](std::complex<double> lam) {
        return std::abs(lam.real()) <= theta;
    };
    reorder_schur(T, Q, on_axis, tol);

    // Leading block sizes selected onto the imaginary axis.
    Eigen::Index ma = 0;
    {
        Eigen::Index i = 0;
        while (i < m) {
            const int sz = (i + 1 < m && T(i + 1, i) != 0.0) ? 2 : 1;
            std::complex<double> lam;
            if (sz == 1) {
                lam = {T(i, i), 0.0};
            } else {
                // Only the real part matters for the axis selection.
                lam = {0.5 * (T(i, i) + T(i + 1, i + 1)), 1.0};
            }
            if (on_axis(lam)) {
                if (ma != i) {
                    throw NumericalError("modal_split: Schur reordering left clusters interleaved");
                }
                ma += sz;
            }
            i += sz;
        }
    }
    const Eigen::Index mb = m - ma;

    // Decouple the off-diagonal coupling between the two clusters.
    Eigen::MatrixXd W = Q;
    Eigen::MatrixXd T22 = T.bottomRightCorner(mb, mb);
    Eigen::MatrixXd T11 = T.topLeftCorner(ma, ma);
    if (ma > 0 && mb > 0) {
        const Eigen::MatrixXd X = solve_sylvester(T11, T22, -T.topRightCorner(ma, mb));
        // W <- Q * [[I, X],[0, I]] applied columnwise.
        W.rightCols(mb) += W.leftCols(ma) * X;
    }

    // Canonicalize the imaginary cluster into skew 2x2 blocks.
    Eigen::MatrixXd A11a = Eigen::MatrixXd::Zero(ma, ma);
    if (ma > 0) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(T11);
        if (es.info() != Eigen::Success) throw NumericalError("modal_split: eigensolver failed");

        std::vector<std::pair<double, Eigen::Index>> pairs;  // (omega, eigen index)
        for (Eigen::Index i = 0; i < ma; ++i) {
            if (es.eigenvalues()(i).imag() > 0.0) pairs.emplace_back(es.eigenvalues()(i).imag(), i);
        }
        std::sort(pairs.begin(), pairs.end());
        if (static_cast<Eigen::Index>(pairs.size()) * 2 != ma) {
            throw NumericalError("modal_split: imaginary cluster does not consist of conjugate pairs");
        }

        Eigen::MatrixXd P(ma, ma);
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const double omega = pairs[k].first;
            Eigen::VectorXd vr, vi;
            canonical_pair_basis(es.eigenvectors().col(pairs[k].second), vr, vi);
            P.col(2 * static_cast<Eigen::Index>(k)) = vr;
            P.col(2 * static_cast<Eigen::Index>(k) + 1) = vi;
            A11a(2 * k, 2 * k + 1) = omega;
            A11a(2 * k + 1, 2 * k) = -omega;
        }
        if (!is_invertible(P, tol)) {
            throw NumericalError(
                "modal_split: imaginary-axis eigenvector basis is numerically singular "
                "(repeated pair?)");
        }
        W.leftCols(ma) = W.leftCols(ma) * P;
    }

    split.S = W.partialPivLu().inverse();
    split.A11a = A11a;
    split.A11b = T22;

    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m, m);
    D.topLeftCorner(ma, ma) = split.A11a;
    D.bottomRightCorner(mb, mb) = split.A11b;
    const double resid = (split.S * A11 * W - D).norm();
    if (resid > std::max(tol.residual_tol, 1e-12) * std::max(1.0, A11.norm())
                    * split.S.norm() * W.norm()) {
        throw NumericalError("modal_split: block-diagonalization residual too large");
    }
    return split;
}

WeakMinimumPhaseCheck check_weakly_minimum_phase(const Eigen::MatrixXd& A11, const Tolerances& tol)
{
    WeakMinimumPhaseCheck out;
    if (A11.rows() != A11.cols()) throw DimensionError("check_weakly_minimum_phase: A11 must be square");
    if (A11.rows() == 0) {
        out.pass = true;
        return out;
    }

    const SpectralClassification cls = classify_spectrum(A11, tol);
    for (std::size_t i = 0; i < cls.classes.size(); ++i) {
        const auto lam = cls.eigenvalues(static_cast<Eigen::Index>(i));
        if (cls.classes[i] == EigenvalueClass::Zero) {
            out.offending.push_back(lam);
            out.reason = "zero dynamics has a zero at the origin";
        } else if (cls.classes[i] == EigenvalueClass::OpenRightHalfPlane) {
            out.offending.push_back(lam);
            if (out.reason.empty()) out.reason = "zero dynamics has an open right-half-plane eigenvalue";
        } else if (cls.classes[i] == EigenvalueClass::PurelyImaginaryNonzero && !cls.semisimple[i]) {
            out.offending.push_back(lam);
            if (out.reason.empty()) {
                out.reason = "zero dynamics has a non-semisimple imaginary-axis eigenvalue";
            }
        }
    }
    out.pass = out.offending.empty();
    return out;
}

}  // namespace nisyn
