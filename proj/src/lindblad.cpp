#include "htrs/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace htrs {

LindbladModel LindbladModel::make(Operator H, std::vector<Operator> jumps,
                                  const Tolerances& tol) {
    const double hscale = std::max(H.matrix.norm(), 1e-300);
    if ((H.matrix - H.matrix.adjoint()).norm() / hscale > tol.herm)
        throw std::invalid_argument("LindbladModel: Hamiltonian not Hermitian");
    LindbladModel m;
    m.space = H.space;
    const int d = m.space.total_dim;
    Matrix h = 0.5 * (H.matrix + H.matrix.adjoint());
    m.jump_trace_shifts.reserve(jumps.size());
    for (auto& c : jumps) {
        if (!(c.space == m.space))
            throw std::invalid_argument("LindbladModel: jump on a different space");
        const cplx alpha = c.matrix.trace() / double(d);
        Matrix cp = c.matrix - alpha * Matrix::Identity(d, d);
        // D[c' + alpha] = D[c'] - i[(i/2)(conj(alpha) c' - alpha c'^dag), .]
        h += 0.5 * I_UNIT * (std::conj(alpha) * cp - alpha * cp.adjoint());
        m.jump_trace_shifts.push_back(alpha);
        m.jumps.emplace_back(m.space, std::move(cp));
    }
    m.H = Operator(m.space, 0.5 * (h + h.adjoint()));
    return m;
}

Operator effective_hamiltonian(const LindbladModel& model) {
    Matrix heff = model.H.matrix;
    for (const auto& c : model.jumps)
        heff -= 0.5 * I_UNIT * (c.matrix.adjoint() * c.matrix);
    return Operator(model.space, std::move(heff));
}

Superoperator build_liouvillian(const LindbladModel& model) {
    const int d = model.dim();
    const Matrix id = Matrix::Identity(d, d);
    const Matrix heff = effective_hamiltonian(model).matrix;
    // vec(A X) = (I (x) A) vec(X), vec(X B) = (B^T (x) I) vec(X)
    Matrix L = -I_UNIT * (kron(id, heff) - kron(heff.conjugate(), id));
    for (const auto& c : model.jumps) L += kron(c.matrix.conjugate(), c.matrix);
    return Superoperator{model.space, std::move(L)};
}

Superoperator build_adjoint(const LindbladModel& model) {
    const int d = model.dim();
    const Matrix id = Matrix::Identity(d, d);
    const Matrix heff = effective_hamiltonian(model).matrix;
    Matrix L = I_UNIT * (kron(id, heff.adjoint()) - kron(heff.transpose(), id));
    for (const auto& c : model.jumps)
        L += kron(c.matrix.transpose(), c.matrix.adjoint());
    return Superoperator{model.space, std::move(L)};
}

Matrix apply_liouvillian(const LindbladModel& model, const Matrix& rho) {
    const Matrix heff = effective_hamiltonian(model).matrix;
    Matrix out = -I_UNIT * (heff * rho - rho * heff.adjoint());
    for (const auto& c : model.jumps) out += c.matrix * rho * c.matrix.adjoint();
    return out;
}

Matrix apply_adjoint(const LindbladModel& model, const Matrix& a) {
    const Matrix heff = effective_hamiltonian(model).matrix;
    Matrix out = I_UNIT * (heff.adjoint() * a - a * heff);
    for (const auto& c : model.jumps) out += c.matrix.adjoint() * a * c.matrix;
    return out;
}

namespace {

// Orthonormal basis of Hermitian kernel elements (HS inner product) from raw
// null vectors; the Lindblad kernel is closed under X -> X^dag.
std::vector<Matrix> hermitian_kernel_basis(const std::vector<Vector>& null_vecs, int want) {
    std::vector<Matrix> basis;
    for (const auto& v : null_vecs) {
        Matrix x = devectorize_matrix(v);
        for (Matrix cand : {Matrix(0.5 * (x + x.adjoint())),
                            Matrix((x - x.adjoint()) / (2.0 * I_UNIT))}) {
            for (const auto& b : basis) {
                cplx overlap = (b.adjoint() * cand).trace();
                cand -= overlap.real() * b;  // both Hermitian: overlap is real
            }
            if (cand.norm() > 1e-8) basis.push_back(cand / cand.norm());
            if (static_cast<int>(basis.size()) == want) return basis;
        }
    }
    return basis;
}

}  // namespace

SteadyStateResult steady_state(const LindbladModel& model, const Tolerances& tol) {
    const Superoperator L = build_liouvillian(model);
    const int n = static_cast<int>(L.matrix.rows());
    Eigen::BDCSVD<Matrix> svd(L.matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cut = tol.null_rel * sv(0);
    int mult = 0;
    for (int i = n - 1; i >= 0 && sv(i) < cut; --i) ++mult;
    if (mult == 0)
        throw NumericsError("steady_state: no null singular value (smallest " +
                            std::to_string(sv(n - 1)) + ", cut " + std::to_string(cut) + ")");

    std::vector<Vector> null_right, null_left;
    for (int i = n - mult; i < n; ++i) {
        null_right.push_back(svd.matrixV().col(i));
        null_left.push_back(svd.matrixU().col(i));
    }

    const int d = model.dim();
    Vector rho_vec;
    if (mult == 1) {
        rho_vec = null_right[0];
    } else {
        // Project the maximally mixed state onto the kernel along ran(L):
        // the infinite-time limit of exp(Lt)[1/d].
        Matrix K(n, mult), U(n, mult);
        for (int i = 0; i < mult; ++i) {
            K.col(i) = null_right[i];
            U.col(i) = null_left[i];
        }
        Vector mixed = vectorize(Matrix(Matrix::Identity(d, d) / double(d)));
        Matrix gram = U.adjoint() * K;
        rho_vec = K * gram.partialPivLu().solve(U.adjoint() * mixed);
    }

    Matrix rho_m = devectorize_matrix(rho_vec);
    rho_m = Matrix(0.5 * (rho_m + rho_m.adjoint()));
    cplx tr = rho_m.trace();
    if (std::abs(tr) < 1e-14)
        throw NumericsError("steady_state: kernel element is traceless");
    rho_m /= tr;

    SteadyStateResult out;
    out.residual = (L.matrix * vectorize(rho_m)).norm();
    Tolerances loose = tol;
    loose.psd = std::max(tol.psd, 1e-8);  // SVD noise on near-degenerate kernels
    out.rho = DensityMatrix::validated(Operator(model.space, std::move(rho_m)), loose);
    out.multiplicity = mult;
    out.kernel = hermitian_kernel_basis(null_right, mult);
    return out;
}

LiouvillianSpectrum spectrum(const LindbladModel& model, const Tolerances& tol,
                             int max_dim_sq) {
    const int d = model.dim();
    if (d * d > max_dim_sq)
        throw std::invalid_argument("spectrum: dimension " + std::to_string(d * d) +
                                    " exceeds limit " + std::to_string(max_dim_sq));
    const Superoperator L = build_liouvillian(model);
    Eigen::ComplexEigenSolver<Matrix> es(L.matrix);
    if (es.info() != Eigen::Success)
        throw NumericsError("spectrum: eigensolver failed");

    const int n = d * d;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const cplx la = es.eigenvalues()(a), lb = es.eigenvalues()(b);
        if (la.real() != lb.real()) return la.real() > lb.real();
        return la.imag() > lb.imag();
    });

    LiouvillianSpectrum out;
    out.space = model.space;
    out.eigenvalues.resize(n);
    out.modes.resize(n, n);
    for (int k = 0; k < n; ++k) {
        out.eigenvalues(k) = es.eigenvalues()(order[k]);
        out.modes.col(k) = es.eigenvectors().col(order[k]);
    }
    out.max_re = out.eigenvalues.real().maxCoeff();

    int zi = 0;
    for (int k = 1; k < n; ++k)
        if (std::abs(out.eigenvalues(k)) < std::abs(out.eigenvalues(zi))) zi = k;
    out.zero_index = zi;

    // Normalize: zero mode to unit trace (rho_ss), others to unit Frobenius.
    for (int k = 0; k < n; ++k) {
        cplx s;
        if (k == zi) {
            cplx tr = devectorize_matrix(out.modes.col(k)).trace();
            s = (std::abs(tr) > 1e-12) ? tr : cplx(out.modes.col(k).norm());
        } else {
            s = out.modes.col(k).norm();
        }
        out.modes.col(k) /= s;
    }

    Eigen::PartialPivLU<Matrix> lu(out.modes);
    out.modes_inv = lu.solve(Matrix::Identity(n, n));
    out.condition = out.modes.norm() * out.modes_inv.norm() / double(n);

    // A Jordan block shows up as an eigenvalue collision together with a
    // degraded eigenvector matrix; plain spectral degeneracy (healthy
    // eigenvectors) is not defective.
    const double scale = std::max(out.eigenvalues.cwiseAbs().maxCoeff(), 1e-300);
    double min_gap = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            min_gap = std::min(min_gap, std::abs(out.eigenvalues(a) - out.eigenvalues(b)));
    out.defective = min_gap < 1e-6 * scale && out.condition > 1e5;
    out.ill_conditioned =
        out.condition > 1e8 || out.defective || !out.modes_inv.allFinite();
    return out;
}

// ---------------------------------------------------------------------------

SpectralCorrelator SpectralCorrelator::make(const LindbladModel& model,
                                            const Tolerances& tol) {
    SpectralCorrelator sc;
    sc.model_ = model;
    sc.ss_ = steady_state(model, tol);
    sc.spec_ = spectrum(model, tol, std::numeric_limits<int>::max());
    sc.liouvillian_ = build_liouvillian(model).matrix;
    return sc;
}

Vector SpectralCorrelator::amplitudes(const Matrix& X, const Matrix& M0) const {
    // Tr(X r_k) * (w_k^dag vec(M0))
    Eigen::RowVectorXcd tx = vectorize(Matrix(X.transpose())).transpose() * spec_.modes;
    Vector b = spec_.modes_inv * vectorize(M0);
    return tx.transpose().cwiseProduct(b);
}

Vector SpectralCorrelator::evolved_trace(const Matrix& X, const Matrix& M0,
                                         const Eigen::VectorXd& times) const {
    const auto nt = times.size();
    Vector out(nt);
    if (!spec_.ill_conditioned) {
        const Vector a = amplitudes(X, M0);
        for (Eigen::Index i = 0; i < nt; ++i) {
            if (times(i) < -1e-12) throw std::invalid_argument("evolved_trace: t < 0");
            cplx s = 0;
            for (int k = 0; k < spec_.size(); ++k)
                s += a(k) * std::exp(spec_.eigenvalues(k) * times(i));
            out(i) = s;
        }
        return out;
    }
    // Defective spectrum: step with scaled-and-squared matrix exponentials.
    Vector v = vectorize(M0);
    const Vector xt = vectorize(Matrix(X.transpose()));
    double t_prev = 0.0;
    for (Eigen::Index i = 0; i < nt; ++i) {
        if (times(i) < -1e-12) throw std::invalid_argument("evolved_trace: t < 0");
        const double dt = times(i) - t_prev;
        if (dt < 0) throw std::invalid_argument("evolved_trace: times not increasing");
        if (dt > 0) {
            Matrix step = (liouvillian_ * dt).exp();
            v = step * v;
            t_prev = times(i);
        }
        out(i) = xt.cwiseProduct(v).sum();  // bilinear sum x_j v_j = Tr(X devec(v))
    }
    return out;
}

Vector SpectralCorrelator::forward(const Matrix& X, const Matrix& Y,
                                   const Eigen::VectorXd& times, bool connected) const {
    Vector c = evolved_trace(X, Y * ss_.rho.matrix(), times);
    if (connected) c.array() -= expectation(X) * expectation(Y);
    return c;
}

namespace {

void check_times(const Eigen::VectorXd& times) {
    for (Eigen::Index i = 1; i < times.size(); ++i)
        if (times(i) <= times(i - 1))
            throw std::invalid_argument("correlator: times not strictly increasing");
}

}  // namespace

CorrelatorTrace correlator(const LindbladModel& model, const Operator& X, const Operator& Y,
                           const Eigen::VectorXd& times, bool connected,
                           const Tolerances& tol) {
    check_times(times);
    if (times.size() > 0 && times(0) < 0)
        throw std::invalid_argument("correlator: negative time; use two_sided_correlator");
    auto engine = SpectralCorrelator::make(model, tol);
    CorrelatorTrace trace;
    trace.times = times;
    trace.values = engine.forward(X.matrix, Y.matrix, times, connected);
    return trace;
}

Vector two_sided_values(const SpectralCorrelator& engine, const Matrix& X, const Matrix& Y,
                        const Matrix& x_tilde, const Matrix& y_tilde,
                        const Eigen::VectorXd& times, bool connected) {
    std::vector<double> neg, pos;
    for (Eigen::Index i = 0; i < times.size(); ++i)
        (times(i) < 0 ? neg : pos).push_back(times(i));
    // negative branch evaluated at -t, increasing order
    Eigen::VectorXd tneg(neg.size()), tpos(pos.size());
    for (size_t i = 0; i < neg.size(); ++i) tneg(i) = -neg[neg.size() - 1 - i];
    for (size_t i = 0; i < pos.size(); ++i) tpos(i) = pos[i];

    Vector out(times.size());
    if (tpos.size() > 0) {
        Vector v = engine.evolved_trace(X, Y * engine.steady().rho.matrix(), tpos);
        if (connected) v.array() -= engine.expectation(X) * engine.expectation(Y);
        out.tail(tpos.size()) = v;
    }
    if (tneg.size() > 0) {
        Vector v = engine.evolved_trace(y_tilde, x_tilde * engine.steady().rho.matrix(), tneg);
        if (connected) v.array() -= engine.expectation(y_tilde) * engine.expectation(x_tilde);
        for (Eigen::Index i = 0; i < tneg.size(); ++i)
            out(tneg.size() - 1 - i) = v(i);
    }
    return out;
}

CorrelatorTrace two_sided_correlator(const LindbladModel& model, const Operator& X,
                                     const Operator& Y, const Matrix& x_tilde,
                                     const Matrix& y_tilde, const Eigen::VectorXd& times,
                                     bool connected, const Tolerances& tol) {
    check_times(times);
    auto engine = SpectralCorrelator::make(model, tol);
    CorrelatorTrace trace;
    trace.times = times;
    trace.values = two_sided_values(engine, X.matrix, Y.matrix, x_tilde, y_tilde, times,
                                    connected);
    return trace;
}

}  // namespace htrs
