#include "nisyn/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "nisyn/errors.hpp"

namespace nisyn {

namespace {

void require_square(const Eigen::MatrixXd& A, const char* who)
{
    if (A.rows() != A.cols()) {
        std::ostringstream oss;
        oss << who << ": matrix must be square, got " << A.rows() << "x" << A.cols();
        throw DimensionError(oss.str());
    }
}

/// Clusters eigenvalues that coincide within `radius` and returns, for each
/// eigenvalue index, the algebraic multiplicity of its cluster.
std::vector<int> cluster_multiplicities(const Eigen::VectorXcd& eig, double radius)
{
    const Eigen::Index n = eig.size();
    std::vector<int> mult(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        int count = 0;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (std::abs(eig(i) - eig(k)) <= radius) ++count;
        }
        mult[static_cast<std::size_t>(i)] = count;
    }
    return mult;
}

Eigen::Index nullity(const Eigen::MatrixXcd& M, const Tolerances& tol)
{
    return M.cols() - numerical_rank(M, tol);
}

}  // namespace

bool SpectralClassification::is_hurwitz() const
{
    return std::all_of(classes.begin(), classes.end(),
                       [](EigenvalueClass c) { return c == EigenvalueClass::OpenLeftHalfPlane; });
}

bool SpectralClassification::is_lyapunov_stable() const
{
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i] == EigenvalueClass::OpenRightHalfPlane) return false;
        const bool on_axis = classes[i] == EigenvalueClass::PurelyImaginaryNonzero ||
                             classes[i] == EigenvalueClass::Zero;
        if (on_axis && !semisimple[i]) return false;
    }
    return true;
}

bool SpectralClassification::has_class(EigenvalueClass c) const
{
    return std::find(classes.begin(), classes.end(), c) != classes.end();
}

SpectralClassification classify_spectrum(const Eigen::MatrixXd& A, const Tolerances& tol)
{
    require_square(A, "classify_spectrum");
    SpectralClassification out;
    const Eigen::Index n = A.rows();
    if (n == 0) return out;

    Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) {
        throw NumericalError("classify_spectrum: eigensolver did not converge (Eigen::EigenSolver info="
                             + std::to_string(static_cast<int>(es.info())) + ")");
    }
    out.eigenvalues = es.eigenvalues();

    const double theta = tol.axis_threshold(A.norm());
    out.classes.resize(static_cast<std::size_t>(n));
    out.semisimple.assign(static_cast<std::size_t>(n), true);

    const std::vector<int> mult = cluster_multiplicities(out.eigenvalues, theta);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::complex<double> lam = out.eigenvalues(i);
        EigenvalueClass cls;
        if (std::abs(lam) <= theta) {
            cls = EigenvalueClass::Zero;
        } else if (std::abs(lam.real()) <= theta) {
            cls = EigenvalueClass::PurelyImaginaryNonzero;
        } else if (lam.real() < 0.0) {
            cls = EigenvalueClass::OpenLeftHalfPlane;
        } else {
            cls = EigenvalueClass::OpenRightHalfPlane;
        }
        out.classes[static_cast<std::size_t>(i)] = cls;

        const int algebraic = mult[static_cast<std::size_t>(i)];
        if (algebraic > 1) {
            Eigen::MatrixXcd shifted = A.cast<std::complex<double>>();
            shifted.diagonal().array() -= lam;
            out.semisimple[static_cast<std::size_t>(i)] = nullity(shifted, tol) >= algebraic;
        }
    }
    return out;
}

double lambda_min_sym(const Eigen::MatrixXd& M)
{
    if (M.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(M), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double lambda_max_sym(const Eigen::MatrixXd& M)
{
    if (M.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(M), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

Eigen::Index numerical_rank(const Eigen::MatrixXcd& M, const Tolerances& tol)
{
    if (M.rows() == 0 || M.cols() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    const auto& sv = svd.singularValues();
    const double cutoff = tol.rank_tol * sv(0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff) ++rank;
    }
    return rank;
}

double sigma_min(const Eigen::MatrixXd& M)
{
    if (M.rows() == 0 || M.cols() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    return svd.singularValues().minCoeff();
}

bool is_invertible(const Eigen::MatrixXd& M, const Tolerances& tol)
{
    require_square(M, "is_invertible");
    if (M.rows() == 0) return true;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    return sv(sv.size() - 1) > tol.rank_tol * sv(0) && sv(sv.size() - 1) > 0.0;
}

namespace {

bool check_symmetric(const Eigen::MatrixXd& M, const Tolerances& tol)
{
    return (M - M.transpose()).norm() <= tol.residual_tol * (1.0 + M.norm());
}

bool psd_test(const Eigen::MatrixXd& M, const Tolerances& tol, bool strict, bool negate)
{
    if (M.rows() != M.cols()) throw DimensionError("definiteness test: matrix must be square");
    if (!check_symmetric(M, tol)) {
        throw PreconditionError("definiteness test: matrix is not symmetric within residual_tol");
    }
    if (M.rows() == 0) return !strict;
    Eigen::MatrixXd S = symmetrize(M);
    if (negate) S = -S;
    const double lmin = lambda_min_sym(S);
    return strict ? lmin > tol.psd_tol : lmin >= -tol.psd_tol;
}

}  // namespace

bool is_psd(const Eigen::MatrixXd& M, const Tolerances& tol) { return psd_test(M, tol, false, false); }
bool is_pd(const Eigen::MatrixXd& M, const Tolerances& tol) { return psd_test(M, tol, true, false); }
bool is_nsd(const Eigen::MatrixXd& M, const Tolerances& tol) { return psd_test(M, tol, false, true); }
bool is_nd(const Eigen::MatrixXd& M, const Tolerances& tol) { return psd_test(M, tol, true, true); }

bool pbh_controllable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Tolerances& tol)
{
    require_square(A, "pbh_controllable");
    if (B.rows() != A.rows()) {
        throw DimensionError("pbh_controllable: B must have as many rows as A");
    }
    const Eigen::Index n = A.rows();
    if (n == 0) return true;

    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    if (es.info() != Eigen::Success) throw NumericalError("pbh_controllable: eigensolver failed");

    Eigen::MatrixXcd pencil(n, n + B.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::complex<double> lam = es.eigenvalues()(i);
        pencil.leftCols(n) = -A.cast<std::complex<double>>();
        pencil.leftCols(n).diagonal().array() += lam;
        pencil.rightCols(B.cols()) = B.cast<std::complex<double>>();
        if (numerical_rank(pencil, tol) < n) return false;
    }
    return true;
}

bool pbh_observable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C, const Tolerances& tol)
{
    return pbh_controllable(A.transpose(), C.transpose(), tol);
}

Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                const Eigen::MatrixXd& C)
{
    require_square(A, "solve_sylvester");
    require_square(B, "solve_sylvester");
    const Eigen::Index m = A.rows();
    const Eigen::Index k = B.rows();
    if (C.rows() != m || C.cols() != k) {
        throw DimensionError("solve_sylvester: C must be rows(A) x rows(B)");
    }
    if (m == 0 || k == 0) return Eigen::MatrixXd::Zero(m, k);

    // vec(A X - X B) = (I (x) A - B^T (x) I) vec(X)
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m * k, m * k);
    for (Eigen::Index j = 0; j < k; ++j) {
        K.block(j * m, j * m, m, m) += A;
        for (Eigen::Index l = 0; l < k; ++l) {
            K.block(j * m, l * m, m, m).diagonal().array() -= B(l, j);
        }
    }
    Eigen::VectorXd rhs(m * k);
    for (Eigen::Index j = 0; j < k; ++j) rhs.segment(j * m, m) = C.col(j);

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
    if (lu.rcond() < 1e-13) {
        throw NumericalError("solve_sylvester: operator nearly singular (spectra of A and B overlap?)");
    }
    Eigen::VectorXd x = lu.solve(rhs);
    Eigen::MatrixXd X(m, k);
    for (Eigen::Index j = 0; j < k; ++j) X.col(j) = x.segment(j * m, m);
    return X;
}

namespace {

/// Sizes of the 1x1/2x2 diagonal blocks of a real quasi-triangular matrix.
std::vector<int> schur_block_sizes(const Eigen::MatrixXd& T)
{
    std::vector<int> sizes;
    const Eigen::Index n = T.rows();
    Eigen::Index i = 0;
    while (i < n) {
        if (i + 1 < n && T(i + 1, i) != 0.0) {
            sizes.push_back(2);
            i += 2;
        } else {
            sizes.push_back(1);
            i += 1;
        }
    }
    return sizes;
}

std::complex<double> block_eigenvalue(const Eigen::MatrixXd& T, Eigen::Index start, int size)
{
    if (size == 1) return {T(start, start), 0.0};
    const double a = T(start, start);
    const double b = T(start, start + 1);
    const double c = T(start + 1, start);
    const double d = T(start + 1, start + 1);
    const double mean = 0.5 * (a + d);
    const double disc = 0.25 * (a - d) * (a - d) + b * c;
    if (disc >= 0.0) return {mean + std::sqrt(disc), 0.0};
    return {mean, std::sqrt(-disc)};
}

/// Swaps the adjacent diagonal blocks T[i..i+p1) and T[i+p1..i+p1+p2) of a
/// real Schur form by the direct method: solve the small Sylvester equation
/// for the invariant subspace of the trailing block and re-orthogonalize.
void swap_adjacent_schur_blocks(Eigen::MatrixXd& T, Eigen::MatrixXd& Q, Eigen::Index i, int p1,
                                int p2, double residual_tol)
{
    const int s = p1 + p2;
    const Eigen::MatrixXd A1 = T.block(i, i, p1, p1);
    const Eigen::MatrixXd B1 = T.block(i + p1, i + p1, p2, p2);
    const Eigen::MatrixXd C1 = T.block(i, i + p1, p1, p2);

    // A1*X - X*B1 = -C1, so that [X; I] spans the B1-invariant subspace.
    const Eigen::MatrixXd X = solve_sylvester(A1, B1, -C1);

    Eigen::MatrixXd Z(s, p2);
    Z.topRows(p1) = X;
    Z.bottomRows(p2) = Eigen::MatrixXd::Identity(p2, p2);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z);
    const Eigen::MatrixXd W = qr.householderQ();

    T.middleRows(i, s) = W.transpose() * T.middleRows(i, s);
    T.middleCols(i, s) = T.middleCols(i, s) * W;
    Q.middleCols(i, s) = Q.middleCols(i, s) * W;

    const double scale = std::max(1.0, T.norm());
    if (T.block(i + p2, i, p1, p2).norm() > std::max(residual_tol, 1e-12) * scale) {
        throw NumericalError("reorder_schur: block swap left a non-negligible subdiagonal residual");
    }
    T.block(i + p2, i, p1, p2).setZero();
}

}  // namespace

void reorder_schur(Eigen::MatrixXd& T, Eigen::MatrixXd& Q,
                   const std::function<bool(std::complex<double>)>& select, const Tolerances& tol)
{
    require_square(T, "reorder_schur");
    if (Q.rows() != T.rows() || Q.cols() != T.cols()) {
        throw DimensionError("reorder_schur: Q and T must have matching dimensions");
    }

    // Bubble selected blocks to the top, swapping adjacent (unselected, selected) pairs.
    bool moved = true;
    while (moved) {
        moved = false;
        std::vector<int> sizes = schur_block_sizes(T);
        Eigen::Index start = 0;
        std::vector<Eigen::Index> starts;
        for (int sz : sizes) {
            starts.push_back(start);
            start += sz;
        }
        for (std::size_t b = 0; b + 1 < sizes.size(); ++b) {
            const bool sel_here = select(block_eigenvalue(T, starts[b], sizes[b]));
            const bool sel_next = select(block_eigenvalue(T, starts[b + 1], sizes[b + 1]));
            if (!sel_here && sel_next) {
                swap_adjacent_schur_blocks(T, Q, starts[b], sizes[b], sizes[b + 1],
                                           tol.residual_tol);
                moved = true;
                break;
            }
        }
    }
}

Eigen::MatrixXd sqrt_pd(const Eigen::MatrixXd& M, const Tolerances& tol)
{
    require_square(M, "sqrt_pd");
    if (!check_symmetric(M, tol)) {
        throw PreconditionError("sqrt_pd: matrix is not symmetric within residual_tol");
    }
    if (M.rows() == 0) return M;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(M));
    if (es.info() != Eigen::Success) throw NumericalError("sqrt_pd: eigensolver failed");
    const Eigen::VectorXd lam = es.eigenvalues();
    if (lam.minCoeff() < -tol.psd_tol) {
        throw PreconditionError("sqrt_pd: matrix is not positive definite (min eigenvalue "
                                + std::to_string(lam.minCoeff()) + ")");
    }
    Eigen::VectorXd root = lam.cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd S = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
    S = symmetrize(S);

    if ((S * S - M).norm() > tol.residual_tol * M.norm()) {
        throw NumericalError("sqrt_pd: residual exceeds tolerance");
    }
    return S;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q,
                               const Tolerances& tol)
{
    require_square(A, "solve_lyapunov");
    if (Q.rows() != A.rows() || Q.cols() != A.cols()) {
        throw DimensionError("solve_lyapunov: Q must match A");
    }
    const Eigen::Index n = A.rows();
    if (n == 0) return Eigen::MatrixXd(0, 0);

    if (!check_symmetric(Q, tol)) {
        throw PreconditionError("solve_lyapunov: Q must be symmetric");
    }
    if (!classify_spectrum(A, tol).is_hurwitz()) {
        throw PreconditionError("solve_lyapunov: A must be Hurwitz");
    }

    // Schur reduction: with A = U T U^T, solve T Z + Z T^T = -U^T Q U blockwise.
    Eigen::RealSchur<Eigen::MatrixXd> schur(A);
    if (schur.info() != Eigen::Success) throw NumericalError("solve_lyapunov: Schur decomposition failed");
    const Eigen::MatrixXd U = schur.matrixU();
    const Eigen::MatrixXd T = schur.matrixT();
    const Eigen::MatrixXd Qt = U.transpose() * symmetrize(Q) * U;

    const std::vector<int> sizes = schur_block_sizes(T);
    std::vector<Eigen::Index> starts;
    Eigen::Index acc = 0;
    for (int sz : sizes) {
        starts.push_back(acc);
        acc += sz;
    }
    const int nb = static_cast<int>(sizes.size());

    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, n);
    for (int j = nb - 1; j >= 0; --j) {
        for (int i = nb - 1; i >= 0; --i) {
            const Eigen::Index ri = starts[i];
            const Eigen::Index cj = starts[j];
            const int pi = sizes[i];
            const int pj = sizes[j];

            Eigen::MatrixXd rhs = -Qt.block(ri, cj, pi, pj);
            // Contributions from already-computed blocks of Z.
            for (int k = i + 1; k < nb; ++k) {
                rhs -= T.block(ri, starts[k], pi, sizes[k]) * Z.block(starts[k], cj, sizes[k], pj);
            }
            for (int k = j + 1; k < nb; ++k) {
                rhs -= Z.block(ri, starts[k], pi, sizes[k]) *
                       T.block(cj, starts[k], pj, sizes[k]).transpose();
            }
            // T_ii * Zij + Zij * T_jj^T = rhs.
            Z.block(ri, cj, pi, pj) =
                solve_sylvester(T.block(ri, ri, pi, pi), -T.block(cj, cj, pj, pj).transpose(), rhs);
        }
    }

    Eigen::MatrixXd Y = symmetrize(U * Z * U.transpose());
    const double resid = (A * Y + Y * A.transpose() + Q).norm();
    if (resid > tol.residual_tol * (1.0 + Q.norm())) {
        throw NumericalError("solve_lyapunov: residual " + std::to_string(resid)
                             + " exceeds tolerance (ill-conditioned problem?)");
    }
    return Y;
}

}  // namespace nisyn
