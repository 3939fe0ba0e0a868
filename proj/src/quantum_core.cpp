#include "htrs/quantum_core.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace htrs {

HilbertSpace::HilbertSpace(std::vector<int> dims) : subsystem_dims(std::move(dims)) {
    if (subsystem_dims.empty())
        throw std::invalid_argument("HilbertSpace: no subsystems");
    total_dim = 1;
    for (int d : subsystem_dims) {
        if (d < 2) throw std::invalid_argument("HilbertSpace: subsystem dim < 2");
        total_dim *= d;
    }
}

Operator::Operator(HilbertSpace s, Matrix m) : space(std::move(s)), matrix(std::move(m)) {
    if (matrix.rows() != matrix.cols() || matrix.rows() != space.total_dim)
        throw std::invalid_argument("Operator: matrix does not match space dimension");
}

DensityMatrix DensityMatrix::validated(Operator o, const Tolerances& tol) {
    const double scale = std::max(o.matrix.norm(), 1e-300);
    if ((o.matrix - o.matrix.adjoint()).norm() / scale > tol.herm)
        throw std::invalid_argument("DensityMatrix: not Hermitian within tolerance");
    Matrix h = 0.5 * (o.matrix + o.matrix.adjoint());
    cplx tr = h.trace();
    if (std::abs(tr) < 1e-300)
        throw std::invalid_argument("DensityMatrix: zero trace");
    if (std::abs(tr - 1.0) > tol.trace && std::abs(std::abs(tr) - 1.0) > tol.trace)
        throw std::invalid_argument("DensityMatrix: trace not 1 within tolerance");
    h /= tr;
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol.psd)
        throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                    std::to_string(es.eigenvalues().minCoeff()));
    return DensityMatrix{Operator(o.space, std::move(h))};
}

StateVector::StateVector(HilbertSpace s, Vector v, const Tolerances& tol)
    : space(std::move(s)), amplitudes(std::move(v)) {
    if (amplitudes.size() != space.total_dim)
        throw std::invalid_argument("StateVector: length does not match space");
    double n = amplitudes.norm();
    if (n < 1e-300) throw std::invalid_argument("StateVector: zero vector");
    if (std::abs(n - 1.0) > tol.trace) amplitudes /= n;
}

DensityMatrix StateVector::projector() const {
    Matrix m = amplitudes * amplitudes.adjoint();
    return DensityMatrix{Operator(space, std::move(m))};
}

Operator annihilation_op(int n_max) {
    if (n_max < 2) throw std::invalid_argument("annihilation_op: n_max < 2");
    Matrix a = Matrix::Zero(n_max, n_max);
    for (int n = 1; n < n_max; ++n) a(n - 1, n) = std::sqrt(double(n));
    return Operator(HilbertSpace::single(n_max), std::move(a));
}

PauliSet pauli_ops() {
    HilbertSpace q = HilbertSpace::single(2);
    Matrix sx(2, 2), sy(2, 2), sz(2, 2), sp(2, 2), sm(2, 2);
    sx << 0, 1, 1, 0;
    sy << 0, -I_UNIT, I_UNIT, 0;
    sz << 1, 0, 0, -1;
    sp << 0, 0, 0, 0;  // |e><g|, basis order (e, g)
    sp(0, 1) = 1;
    sm << 0, 0, 0, 0;  // |g><e|
    sm(1, 0) = 1;
    return PauliSet{Operator(q, sx), Operator(q, sy), Operator(q, sz),
                    Operator(q, sp), Operator(q, sm)};
}

Operator identity_op(const HilbertSpace& space) {
    return Operator(space, Matrix::Identity(space.total_dim, space.total_dim));
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Operator embed(const Operator& op, int subsystem_index, const HilbertSpace& target) {
    if (subsystem_index < 0 || subsystem_index >= target.factors())
        throw std::invalid_argument("embed: subsystem index out of range");
    if (op.dim() != target.subsystem_dims[subsystem_index])
        throw std::invalid_argument("embed: operator dimension mismatch");
    Matrix acc = Matrix::Identity(1, 1);
    for (int f = 0; f < target.factors(); ++f) {
        int d = target.subsystem_dims[f];
        acc = (f == subsystem_index) ? kron(acc, op.matrix)
                                     : kron(acc, Matrix::Identity(d, d)).eval();
    }
    return Operator(target, std::move(acc));
}

Matrix partial_trace(const Matrix& m, const std::vector<int>& dims, int keep) {
    if (keep < 0 || keep >= static_cast<int>(dims.size()))
        throw std::invalid_argument("partial_trace: invalid subsystem index");
    int before = 1, after = 1;
    for (int f = 0; f < keep; ++f) before *= dims[f];
    for (int f = keep + 1; f < static_cast<int>(dims.size()); ++f) after *= dims[f];
    const int dk = dims[keep];
    Matrix out = Matrix::Zero(dk, dk);
    // index layout: i = (ib * dk + ik) * after + ia
    for (int ik = 0; ik < dk; ++ik)
        for (int jk = 0; jk < dk; ++jk) {
            cplx s = 0;
            for (int ib = 0; ib < before; ++ib)
                for (int ia = 0; ia < after; ++ia) {
                    int row = (ib * dk + ik) * after + ia;
                    int col = (ib * dk + jk) * after + ia;
                    s += m(row, col);
                }
            out(ik, jk) = s;
        }
    return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, int keep, const Tolerances& tol) {
    if (rho.space().factors() < 2)
        throw std::invalid_argument("partial_trace: not a product space");
    Matrix red = partial_trace(rho.matrix(), rho.space().subsystem_dims, keep);
    HilbertSpace s = HilbertSpace::single(rho.space().subsystem_dims[keep]);
    return DensityMatrix::validated(Operator(std::move(s), std::move(red)), tol);
}

Vector vectorize(const Matrix& m) {
    return Eigen::Map<const Vector>(m.data(), m.size());
}

Vector vectorize(const Operator& op) { return vectorize(op.matrix); }

Matrix devectorize_matrix(const Vector& v) {
    const auto n = v.size();
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(double(n))));
    if (d * d != n)
        throw std::invalid_argument("devectorize: length is not a perfect square");
    return Eigen::Map<const Matrix>(v.data(), d, d);
}

Operator devectorize(const Vector& v, const HilbertSpace& space) {
    Matrix m = devectorize_matrix(v);
    if (m.rows() != space.total_dim)
        throw std::invalid_argument("devectorize: space dimension mismatch");
    return Operator(space, std::move(m));
}

Matrix psd_sqrt(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
           es.eigenvectors().adjoint();
}

Matrix psd_inv_sqrt(const Matrix& m, double tol_rank) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    const double lo = es.eigenvalues().minCoeff();
    if (lo <= tol_rank)
        throw NumericsError("psd_inv_sqrt: rank deficient, smallest eigenvalue " +
                            std::to_string(lo));
    Eigen::VectorXd inv = es.eigenvalues().cwiseSqrt().cwiseInverse();
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
}

Operator matrix_sqrt(const DensityMatrix& rho) {
    return Operator(rho.space(), psd_sqrt(rho.matrix()));
}

Operator matrix_inv_sqrt(const DensityMatrix& rho, const Tolerances& tol) {
    return Operator(rho.space(), psd_inv_sqrt(rho.matrix(), tol.rank));
}

Eigen::VectorXd herm_eigenvalues(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

WignerGrid WignerGrid::square(double extent, double spacing) {
    int n = static_cast<int>(std::floor(2.0 * extent / spacing)) + 1;
    WignerGrid g;
    g.x.setLinSpaced(n, -extent, -extent + spacing * (n - 1));
    g.p = g.x;
    return g;
}

double WignerResult::integral(double dx, double dp) const {
    return w.sum() * dx * dp;
}

namespace {

// Displaced parity with D(alpha) as the projection of the true displacement
// operator onto the truncation (exact matrix elements, not the exponential of
// the truncated generator, which misbehaves at large displacements). Columns
// are displaced Fock states from D|n> = (adag - conj(alpha)) D|n-1> / sqrt(n),
// seeded by the exact coherent-state column.
struct DisplacedParity {
    Matrix adag;
    Eigen::VectorXd parity;  // (-1)^n

    explicit DisplacedParity(int n_max) {
        adag = annihilation_op(n_max).matrix.adjoint();
        parity.resize(n_max);
        for (int n = 0; n < n_max; ++n) parity(n) = (n % 2 == 0) ? 1.0 : -1.0;
    }

    // (2/pi) Tr[rho D P D^dag] in the d^2 alpha normalization is 1/pi times
    // the value on the (x, p) grid with alpha = (x + ip)/sqrt(2); vacuum then
    // gives W(0,0) = 1/pi and int W dx dp = 1.
    double value(const Matrix& rho, cplx alpha) const {
        const int n = static_cast<int>(parity.size());
        Matrix d(n, n);
        double log_fact = 0.0;
        for (int m = 0; m < n; ++m) {
            if (m > 0) log_fact += std::log(double(m));
            d(m, 0) = std::pow(alpha, m) *
                      std::exp(-0.5 * std::norm(alpha) - 0.5 * log_fact);
        }
        for (int col = 1; col < n; ++col)
            d.col(col) = (adag * d.col(col - 1) - std::conj(alpha) * d.col(col - 1)) /
                         std::sqrt(double(col));
        Matrix w = rho * d;
        cplx s = 0;
        for (int m = 0; m < n; ++m) s += parity(m) * d.col(m).dot(w.col(m));
        return (1.0 / M_PI) * s.real();
    }
};

}  // namespace

WignerResult wigner(const DensityMatrix& rho, const WignerGrid& grid) {
    if (rho.space().factors() != 1)
        throw std::invalid_argument("wigner: single bosonic mode expected");
    const int n_max = rho.dim();
    double max_alpha_sq = 0.0;
    for (Eigen::Index i = 0; i < grid.x.size(); ++i)
        for (Eigen::Index j = 0; j < grid.p.size(); ++j)
            max_alpha_sq = std::max(
                max_alpha_sq, 0.5 * (grid.x(i) * grid.x(i) + grid.p(j) * grid.p(j)));

    // The alternating parity sum at displacement delta needs ~|delta|^2 Fock
    // terms to converge; pad the state into a workspace sized by the grid so
    // the transform is exact for the truncated state everywhere on it.
    const int workspace = std::max(
        n_max, static_cast<int>(std::ceil(max_alpha_sq + 6.0 * std::sqrt(max_alpha_sq))) + 12);
    Matrix padded = Matrix::Zero(workspace, workspace);
    padded.topLeftCorner(n_max, n_max) = rho.matrix();

    DisplacedParity dp(workspace);
    WignerResult res;
    res.x = grid.x;
    res.p = grid.p;
    res.w.resize(grid.x.size(), grid.p.size());
    for (Eigen::Index i = 0; i < grid.x.size(); ++i)
        for (Eigen::Index j = 0; j < grid.p.size(); ++j) {
            cplx alpha = (grid.x(i) + I_UNIT * grid.p(j)) / std::sqrt(2.0);
            res.w(i, j) = dp.value(padded, alpha);
        }
    res.truncation_warning = max_alpha_sq > 0.5 * n_max;
    return res;
}

WignerResult wigner(const StateVector& psi, const WignerGrid& grid) {
    return wigner(psi.projector(), grid);
}

}  // namespace htrs
