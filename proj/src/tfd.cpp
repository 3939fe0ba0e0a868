#include "htrs/tfd.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace htrs {

namespace {

// Eigenbasis of rho with a deterministic gauge: each column's
// largest-magnitude entry made real positive.
Matrix gauge_fixed_eigenbasis(const Matrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    Matrix w = es.eigenvectors();
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
        Eigen::Index imax = 0;
        w.col(c).cwiseAbs().maxCoeff(&imax);
        cplx pivot = w(imax, c);
        if (std::abs(pivot) > 0) w.col(c) *= std::conj(pivot) / std::abs(pivot);
    }
    return w;
}

double min_relative_gap(const Eigen::VectorXd& p) {
    double scale = std::max(p.cwiseAbs().maxCoeff(), 1e-300);
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 1; i < p.size(); ++i)
        gap = std::min(gap, std::abs(p(i) - p(i - 1)) / scale);
    return gap;
}

}  // namespace

AntiUnitary AntiUnitary::k_z(Operator v, const Tolerances& tol) {
    AntiUnitary t;
    t.V = std::move(v);
    t.basis = Basis::computational;
    if (t.unitarity_defect() > tol.herm * 10)
        throw std::invalid_argument("AntiUnitary: V not unitary, defect " +
                                    std::to_string(t.unitarity_defect()));
    return t;
}

AntiUnitary AntiUnitary::k_rho(Operator v, const DensityMatrix& rho, const Tolerances& tol) {
    AntiUnitary t;
    t.V = std::move(v);
    t.basis = Basis::rho_eigenbasis;
    t.eigenbasis = gauge_fixed_eigenbasis(rho.matrix());
    if (t.unitarity_defect() > tol.herm * 10)
        throw std::invalid_argument("AntiUnitary: V not unitary");
    return t;
}

AntiUnitary AntiUnitary::conjugation(const HilbertSpace& space) {
    return k_z(identity_op(space));
}

Matrix AntiUnitary::canonical_v() const {
    if (basis == Basis::computational) return V.matrix;
    // K_rho x = W W^T conj(x)
    return V.matrix * eigenbasis * eigenbasis.transpose();
}

Matrix AntiUnitary::conjugate_op(const Matrix& x) const {
    const Matrix vc = canonical_v();
    return vc * x.conjugate() * vc.adjoint();
}

Vector AntiUnitary::apply(const Vector& x) const {
    return canonical_v() * x.conjugate();
}

double AntiUnitary::unitarity_defect() const {
    const Matrix& v = V.matrix;
    return (v.adjoint() * v - Matrix::Identity(v.rows(), v.cols())).norm();
}

double check_trs_invariance(const DensityMatrix& rho_ss, const AntiUnitary& t) {
    return (t.conjugate_op(rho_ss.matrix()) - rho_ss.matrix()).norm();
}

// ---------------------------------------------------------------------------

StateVector TfdState::as_state() const {
    const int d = dim();
    // |psi> = sum_ij Psi_ij |i>_A |j>_B, index i*d + j
    Vector v(d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) v(i * d + j) = psi(i, j);
    return StateVector(HilbertSpace::doubled(d), std::move(v));
}

TfdState build_tfd(const DensityMatrix& rho_ss, const AntiUnitary& t,
                   const Tolerances& tol, const TfdOptions& opts) {
    Eigen::VectorXd p = herm_eigenvalues(rho_ss.matrix());
    if (p.minCoeff() <= tol.rank)
        throw NumericsError("build_tfd: rho_ss rank deficient, smallest eigenvalue " +
                            std::to_string(p.minCoeff()));
    const double gap = min_relative_gap(p);
    TfdState out;
    out.degenerate_spectrum = gap < tol.degeneracy;
    if (out.degenerate_spectrum && !opts.allow_degenerate)
        throw NumericsError("build_tfd: degenerate rho_ss spectrum (relative gap " +
                            std::to_string(gap) + "); pass allow_degenerate to proceed");
    out.rho_ss = rho_ss;
    out.T = t;
    out.psi = psd_sqrt(rho_ss.matrix()) * t.canonical_v().transpose();
    out.psi /= out.psi.norm();
    return out;
}

// ---------------------------------------------------------------------------

ExchangeSuperop::ExchangeSuperop(const DensityMatrix& rho_ss, const AntiUnitary& t,
                                 const Tolerances& tol) {
    const Matrix vc = t.canonical_v();
    left_ = psd_sqrt(rho_ss.matrix()) * vc;
    right_ = vc.adjoint() * psd_inv_sqrt(rho_ss.matrix(), tol.rank);
    // J[X] = rho^{1/2} (V X* V^dag)^dag rho^{-1/2} = (rho^{1/2} V) X^T (V^dag rho^{-1/2})
}

Matrix ExchangeSuperop::superop_matrix() const {
    const int d = dim();
    // vec(L X^T R) = (R^T (x) L) K vec(X), K the commutation matrix
    Matrix k = Matrix::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) k(i + j * d, j + i * d) = 1.0;
    return kron(right_.transpose(), left_) * k;
}

ExchangeSuperop exchange_superop(const DensityMatrix& rho_ss, const AntiUnitary& t,
                                 const Tolerances& tol) {
    return ExchangeSuperop(rho_ss, t, tol);
}

// ---------------------------------------------------------------------------

namespace {

struct BranchOps {
    Matrix m_total;
    Matrix m_classical;
};

// Tr_B(Y_B |psi><psi|) = Psi Y^T Psi^dag and its pointer-diagonal restriction.
BranchOps branch_operators(const TfdState& tfd, const Matrix& y, const Matrix& w) {
    BranchOps b;
    b.m_total = tfd.psi * y.transpose() * tfd.psi.adjoint();
    Matrix in_basis = w.adjoint() * b.m_total * w;
    b.m_classical = w * in_basis.diagonal().asDiagonal() * w.adjoint();
    return b;
}

}  // namespace

TfdCorrelator tfd_correlator(const SpectralCorrelator& engine, const TfdState& tfd,
                             const Operator& X, const Operator& Y,
                             const Eigen::VectorXd& times, bool connected) {
    for (Eigen::Index i = 1; i < times.size(); ++i)
        if (times(i) <= times(i - 1))
            throw std::invalid_argument("tfd_correlator: times not strictly increasing");
    if (!(X.space == tfd.rho_ss.space()) || !(Y.space == tfd.rho_ss.space()))
        throw std::invalid_argument("tfd_correlator: operator space mismatch");

    const Matrix w = gauge_fixed_eigenbasis(tfd.rho_ss.matrix());

    std::vector<double> neg, pos;
    for (Eigen::Index i = 0; i < times.size(); ++i)
        (times(i) < 0 ? neg : pos).push_back(times(i));
    Eigen::VectorXd tneg(neg.size()), tpos(pos.size());
    for (size_t i = 0; i < neg.size(); ++i) tneg(i) = -neg[neg.size() - 1 - i];
    for (size_t i = 0; i < pos.size(); ++i) tpos(i) = pos[i];

    TfdCorrelator out;
    out.times = times;
    out.total.resize(times.size());
    out.classical.resize(times.size());

    auto run_branch = [&](const Matrix& front, const Matrix& back, const Eigen::VectorXd& ts,
                          auto&& store) {
        if (ts.size() == 0) return;
        BranchOps ops = branch_operators(tfd, back, w);
        Vector tot = engine.evolved_trace(front, ops.m_total, ts);
        Vector cl = engine.evolved_trace(front, ops.m_classical, ts);
        if (connected) {
            // t -> inf asymptote: <front> Tr(M); the diagonal projection
            // preserves the trace, so both branches share it.
            cplx asym_tot = engine.expectation(front) * ops.m_total.trace();
            cplx asym_cl = engine.expectation(front) * ops.m_classical.trace();
            tot.array() -= asym_tot;
            cl.array() -= asym_cl;
        }
        store(tot, cl);
    };

    run_branch(X.matrix, Y.matrix, tpos, [&](const Vector& tot, const Vector& cl) {
        out.total.tail(tpos.size()) = tot;
        out.classical.tail(tpos.size()) = cl;
    });
    run_branch(Y.matrix, X.matrix, tneg, [&](const Vector& tot, const Vector& cl) {
        for (Eigen::Index i = 0; i < tneg.size(); ++i) {
            out.total(tneg.size() - 1 - i) = tot(i);
            out.classical(tneg.size() - 1 - i) = cl(i);
        }
    });

    out.entanglement = out.total - out.classical;
    return out;
}

TfdCorrelator tfd_correlator(const LindbladModel& model, const TfdState& tfd,
                             const Operator& X, const Operator& Y,
                             const Eigen::VectorXd& times, bool connected,
                             const Tolerances& tol) {
    auto engine = SpectralCorrelator::make(model, tol);
    if (rel_fro(engine.steady().rho.matrix(), tfd.rho_ss.matrix()) > 100 * tol.match)
        throw std::invalid_argument("tfd_correlator: TFD not built from this model's steady state");
    return tfd_correlator(engine, tfd, X, Y, times, connected);
}

CorrelatorTrace two_sided_correlator(const LindbladModel& model, const Operator& X,
                                     const Operator& Y, const AntiUnitary& t,
                                     const Eigen::VectorXd& times, bool connected,
                                     const Tolerances& tol) {
    CorrelatorTrace trace = two_sided_correlator(model, X, Y, t.conjugate_op(X.matrix),
                                                 t.conjugate_op(Y.matrix), times, connected,
                                                 tol);
    auto ss = steady_state(model, tol);
    const double inv = check_trs_invariance(ss.rho, t);
    if (inv > 1e-8 * std::max(1.0, ss.rho.matrix().norm()))
        trace.warning = "T does not leave rho_ss invariant (residual " +
                        std::to_string(inv) + ")";
    return trace;
}

}  // namespace htrs
