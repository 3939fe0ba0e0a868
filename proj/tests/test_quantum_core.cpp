#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "htrs/quantum_core.hpp"

using namespace htrs;

namespace {

Matrix random_complex(int d, std::mt19937& rng) {
    std::normal_distribution<double> g;
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
    return m;
}

DensityMatrix random_density(int d, std::mt19937& rng) {
    Matrix a = random_complex(d, rng);
    Matrix rho = a * a.adjoint();
    rho /= rho.trace();
    return DensityMatrix::validated(Operator(HilbertSpace::single(d), rho));
}

}  // namespace

TEST_CASE("annihilation operator") {
    Matrix a2 = annihilation_op(2).matrix;
    CHECK(a2(0, 1) == cplx(1.0));
    CHECK(a2(0, 0) == cplx(0.0));
    CHECK(a2(1, 0) == cplx(0.0));
    CHECK(a2(1, 1) == cplx(0.0));

    Matrix a3 = annihilation_op(3).matrix;
    CHECK(std::abs(a3(0, 1) - 1.0) < 1e-15);
    CHECK(std::abs(a3(1, 2) - std::sqrt(2.0)) < 1e-15);
    CHECK(a3.cwiseAbs().sum() == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-14));

    // truncation breaks only the last diagonal entry of [a, adag]
    const int n = 40;
    Matrix a = annihilation_op(n).matrix;
    Matrix comm = commutator(a, a.adjoint());
    for (int i = 0; i < n - 1; ++i) CHECK(std::abs(comm(i, i) - 1.0) < 1e-13);
    CHECK(std::abs(comm(n - 1, n - 1) - (1.0 - n)) < 1e-12);

    CHECK_THROWS_AS(annihilation_op(1), std::invalid_argument);
}

TEST_CASE("pauli algebra and conventions") {
    PauliSet s = pauli_ops();
    CHECK((s.x.matrix * s.y.matrix - I_UNIT * s.z.matrix).norm() < 1e-15);
    // sigma_minus = |g><e| in basis order (e, g)
    CHECK(s.minus.matrix(1, 0) == cplx(1.0));
    CHECK(s.minus.matrix(0, 1) == cplx(0.0));
    // sigma_minus|e> = |g>
    Vector e(2);
    e << 1, 0;
    Vector g = s.minus.matrix * e;
    CHECK(std::abs(g(1) - 1.0) < 1e-15);
    // sigma_z |e> = +|e>
    CHECK(std::abs((s.z.matrix * e)(0) - 1.0) < 1e-15);
    // projector identity
    Matrix pe = s.minus.matrix.adjoint() * s.minus.matrix;
    CHECK(std::abs(pe(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(pe(1, 1)) < 1e-15);
}

TEST_CASE("embed") {
    PauliSet s = pauli_ops();
    HilbertSpace two_qubits({2, 2});
    Matrix sx1 = embed(s.x, 0, two_qubits).matrix;
    CHECK((sx1 - kron(s.x.matrix, Matrix::Identity(2, 2))).norm() < 1e-15);

    Operator id2 = identity_op(HilbertSpace::single(2));
    CHECK((embed(id2, 1, two_qubits).matrix - Matrix::Identity(4, 4)).norm() < 1e-15);

    // <0,1| (1 (x) a) |0,2> = sqrt(2) on a 3x3 product
    HilbertSpace two_qutrits({3, 3});
    Matrix a_b = embed(annihilation_op(3), 1, two_qutrits).matrix;
    CHECK(std::abs(a_b(0 * 3 + 1, 0 * 3 + 2) - std::sqrt(2.0)) < 1e-15);

    CHECK_THROWS_AS(embed(s.x, 0, two_qutrits), std::invalid_argument);
    CHECK_THROWS_AS(embed(s.x, 2, two_qubits), std::invalid_argument);
}

TEST_CASE("partial trace") {
    std::mt19937 rng(7);
    // Schmidt form: Psi = diag(sqrt(p)) -> diag(p)
    Eigen::Vector3d p(0.5, 0.3, 0.2);
    HilbertSpace pair({3, 3});
    Vector psi = Vector::Zero(9);
    for (int i = 0; i < 3; ++i) psi(i * 3 + i) = std::sqrt(p(i));
    DensityMatrix proj = StateVector(pair, psi).projector();
    Matrix red = partial_trace(proj, 0).matrix();
    for (int i = 0; i < 3; ++i) CHECK(std::abs(red(i, i) - p(i)) < 1e-14);

    // product state
    DensityMatrix ra = random_density(3, rng);
    DensityMatrix rb = random_density(4, rng);
    Matrix prod = kron(ra.matrix(), rb.matrix());
    DensityMatrix joint =
        DensityMatrix::validated(Operator(HilbertSpace({3, 4}), prod));
    CHECK(rel_fro(partial_trace(joint, 0).matrix(), ra.matrix()) < 1e-13);
    CHECK(rel_fro(partial_trace(joint, 1).matrix(), rb.matrix()) < 1e-13);

    // Bell state -> maximally mixed
    Vector bell = Vector::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    DensityMatrix bp = StateVector(HilbertSpace({2, 2}), bell).projector();
    CHECK(rel_fro(partial_trace(bp, 1).matrix(), Matrix(0.5 * Matrix::Identity(2, 2))) <
          1e-14);

    CHECK_THROWS_AS(partial_trace(bp, 3), std::invalid_argument);

    // trace and Hermiticity preservation on random states
    for (int trial = 0; trial < 5; ++trial) {
        Matrix m = random_complex(12, rng);
        Matrix rho = m * m.adjoint();
        rho /= rho.trace();
        Matrix red2 = partial_trace(rho, {3, 4}, 1);
        CHECK(std::abs(red2.trace() - 1.0) < 1e-13);
        CHECK((red2 - red2.adjoint()).norm() < 1e-13);
    }
}

TEST_CASE("vectorization convention") {
    std::mt19937 rng(11);
    // round trip
    Matrix x = random_complex(5, rng);
    Operator ox(HilbertSpace::single(5), x);
    CHECK((devectorize(vectorize(ox), ox.space).matrix - x).norm() == 0.0);

    // column stacking: |0><1| -> single entry at 0 + 1*d
    const int d = 4;
    Matrix e01 = Matrix::Zero(d, d);
    e01(0, 1) = 1.0;
    Vector v = vectorize(e01);
    CHECK(std::abs(v(0 + 1 * d) - 1.0) < 1e-15);
    CHECK(v.cwiseAbs().sum() == doctest::Approx(1.0));

    // vec(AXB) = (B^T (x) A) vec(X)
    for (int trial = 0; trial < 5; ++trial) {
        Matrix a = random_complex(3, rng), xx = random_complex(3, rng),
               b = random_complex(3, rng);
        Vector lhs = vectorize(Matrix(a * xx * b));
        Vector rhs = kron(b.transpose(), a) * vectorize(xx);
        CHECK((lhs - rhs).norm() < 1e-12);
    }

    Vector bad(6);
    bad.setZero();
    CHECK_THROWS_AS(devectorize_matrix(bad), std::invalid_argument);
}

TEST_CASE("matrix square roots") {
    std::mt19937 rng(13);
    Matrix d2(2, 2);
    d2 << 0.25, 0, 0, 0.75;
    DensityMatrix rho = DensityMatrix::validated(Operator(HilbertSpace::single(2), d2));
    Matrix s = matrix_sqrt(rho).matrix;
    CHECK(std::abs(s(0, 0) - 0.5) < 1e-14);
    CHECK(std::abs(s(1, 1) - std::sqrt(3.0) / 2.0) < 1e-14);

    for (int trial = 0; trial < 5; ++trial) {
        DensityMatrix r = random_density(5, rng);
        Matrix inv_sqrt = matrix_inv_sqrt(r).matrix;
        Matrix sq = matrix_sqrt(r).matrix;
        CHECK((inv_sqrt * sq - Matrix::Identity(5, 5)).norm() < 1e-12);
    }

    for (int d = 2; d <= 8; ++d) {
        DensityMatrix r = random_density(d, rng);
        Matrix sq = matrix_sqrt(r).matrix;
        CHECK((sq * sq - r.matrix()).norm() < 1e-11);
    }

    const int dd = 4;
    Matrix scaled = Matrix::Identity(dd, dd) / dd;
    DensityMatrix mixed = DensityMatrix::validated(Operator(HilbertSpace::single(dd), scaled));
    CHECK((matrix_sqrt(mixed).matrix - Matrix::Identity(dd, dd) / std::sqrt(double(dd)))
              .norm() < 1e-14);

    // rank-deficient refusal reports the offending eigenvalue
    Matrix sing(2, 2);
    sing << 1, 0, 0, 0;
    DensityMatrix rsing = DensityMatrix::validated(Operator(HilbertSpace::single(2), sing));
    CHECK_THROWS_AS(matrix_inv_sqrt(rsing), NumericsError);
}

TEST_CASE("density matrix validation") {
    HilbertSpace q = HilbertSpace::single(2);
    Matrix not_herm(2, 2);
    not_herm << 1, 1, 0, 0;
    CHECK_THROWS_AS(DensityMatrix::validated(Operator(q, not_herm)), std::invalid_argument);
    Matrix neg(2, 2);
    neg << 1.5, 0, 0, -0.5;
    CHECK_THROWS_AS(DensityMatrix::validated(Operator(q, neg)), std::invalid_argument);
}

TEST_CASE("wigner function") {
    const int n_max = 12;
    HilbertSpace mode = HilbertSpace::single(n_max);

    Vector vac = Vector::Zero(n_max);
    vac(0) = 1.0;
    WignerGrid origin_only;
    origin_only.x.resize(1);
    origin_only.x(0) = 0.0;
    origin_only.p = origin_only.x;
    WignerResult w0 = wigner(StateVector(mode, vac), origin_only);
    CHECK(w0.w(0, 0) == doctest::Approx(1.0 / M_PI).epsilon(1e-10));

    // Fock |1>: W(0,0) = -1/pi
    Vector one = Vector::Zero(n_max);
    one(1) = 1.0;
    WignerResult w1 = wigner(StateVector(mode, one), origin_only);
    CHECK(w1.w(0, 0) == doctest::Approx(-1.0 / M_PI).epsilon(1e-10));

    // coherent state: Gaussian centered at (sqrt(2) Re a, sqrt(2) Im a)
    const cplx alpha(0.8, -0.5);
    Vector coh(n_max);
    double lf = 0.0;
    for (int n = 0; n < n_max; ++n) {
        if (n > 0) lf += std::log(double(n));
        coh(n) = std::pow(alpha, n) * std::exp(-0.5 * std::norm(alpha) - 0.5 * lf);
    }
    coh /= coh.norm();
    WignerGrid peak;
    peak.x.resize(1);
    peak.x(0) = std::sqrt(2.0) * alpha.real();
    peak.p.resize(1);
    peak.p(0) = std::sqrt(2.0) * alpha.imag();
    WignerResult wc = wigner(StateVector(mode, coh), peak);
    CHECK(wc.w(0, 0) == doctest::Approx(1.0 / M_PI).epsilon(1e-6));

    // normalization over the spec grid
    const double extent = std::sqrt(2.0 * n_max) + 3.0;
    WignerGrid grid = WignerGrid::square(extent, 0.1);
    WignerResult wi = wigner(StateVector(mode, coh), grid);
    CHECK(std::abs(wi.integral(0.1, 0.1) - 1.0) < 1e-3);
    CHECK(wi.truncation_warning);  // the spec grid probes beyond n_max/2
}
