#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "htrs/lindblad.hpp"
#include "htrs/models.hpp"

using namespace htrs;

namespace {

Matrix random_complex(int d, std::mt19937& rng) {
    std::normal_distribution<double> g;
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
    return m;
}

LindbladModel random_model(int d, int n_jumps, std::mt19937& rng) {
    Matrix h = random_complex(d, rng);
    h = Matrix(0.5 * (h + h.adjoint()));
    std::vector<Operator> jumps;
    HilbertSpace space = HilbertSpace::single(d);
    for (int l = 0; l < n_jumps; ++l)
        jumps.emplace_back(space, Matrix(0.7 * random_complex(d, rng)));
    return LindbladModel::make(Operator(space, h), std::move(jumps));
}

Matrix random_density_m(int d, std::mt19937& rng) {
    Matrix a = random_complex(d, rng);
    Matrix rho = a * a.adjoint();
    return rho / rho.trace();
}

QubitParams resonant_qubit(double b, double kappa = 1.0) {
    QubitParams p;
    p.Omega = b * kappa;
    p.kappa = kappa;
    return p;
}

}  // namespace

TEST_CASE("effective hamiltonian") {
    PauliSet s = pauli_ops();
    // pure decay: H_eff = -(i kappa/2)|e><e|
    QubitParams p;
    p.Omega = 0;
    p.kappa = 2.0;
    LindbladModel m = driven_qubit(p);
    Matrix heff = effective_hamiltonian(m).matrix;
    Matrix expect = Matrix::Zero(2, 2);
    expect(0, 0) = -I_UNIT * 1.0;  // kappa/2 with kappa=2
    CHECK((heff - expect).norm() < 1e-14);

    // no jumps: H_eff = H
    LindbladModel closed = LindbladModel::make(Operator(s.z.space, s.x.matrix), {});
    CHECK((effective_hamiltonian(closed).matrix - s.x.matrix).norm() == 0.0);

    // Kerr anti-Hermitian part = -(i/2)(k1 n + k2 adag^2 a^2)
    KerrParams kp;
    kp.K = 1.0;
    kp.Lambda2 = 0.5;
    kp.kappa1 = 0.3;
    kp.kappa2 = 0.2;
    kp.n_max = 8;
    LindbladModel kerr = kerr_cavity(kp);
    Matrix a = annihilation_op(8).matrix;
    Matrix anti = 0.5 * (effective_hamiltonian(kerr).matrix -
                         effective_hamiltonian(kerr).matrix.adjoint());
    Matrix want = -0.5 * I_UNIT *
                  (0.3 * a.adjoint() * a + 0.2 * a.adjoint() * a.adjoint() * a * a);
    CHECK((anti - want).norm() < 1e-13);
}

TEST_CASE("traceless jump convention preserves the Liouvillian") {
    std::mt19937 rng(3);
    PauliSet s = pauli_ops();
    HilbertSpace q = s.z.space;
    const cplx shift(0.3, -0.1);
    Matrix c_shifted = s.minus.matrix + shift * Matrix::Identity(2, 2);
    LindbladModel shifted =
        LindbladModel::make(Operator(q, s.x.matrix), {Operator(q, c_shifted)});

    CHECK(std::abs(shifted.jumps[0].matrix.trace()) < 1e-14);
    CHECK(std::abs(shifted.jump_trace_shifts[0] - shift) < 1e-14);

    // the adjusted (H, jumps) generate the same physics as the raw pair
    Matrix rho = random_density_m(2, rng);
    Matrix lhs = apply_liouvillian(shifted, rho);
    Matrix heff_raw = s.x.matrix - 0.5 * I_UNIT * (c_shifted.adjoint() * c_shifted);
    Matrix rhs = -I_UNIT * (heff_raw * rho - rho * heff_raw.adjoint()) +
                 c_shifted * rho * c_shifted.adjoint();
    CHECK((lhs - rhs).norm() < 1e-13);
}

TEST_CASE("liouvillian basics") {
    std::mt19937 rng(5);
    // vectorized identity is a left null vector (trace preservation)
    for (int trial = 0; trial < 20; ++trial) {
        int d = 2 + (trial % 5);
        LindbladModel m = random_model(d, 1 + trial % 3, rng);
        Matrix l = build_liouvillian(m).matrix;
        Vector id_vec = vectorize(Matrix(Matrix::Identity(d, d)));
        CHECK((id_vec.adjoint() * l).norm() < 1e-12 * l.norm());
    }

    // undriven decaying qubit: L[|e><e|] = -k|e><e| + k|g><g|
    QubitParams p;
    p.kappa = 1.7;
    LindbladModel m = driven_qubit(p);
    Matrix ee = Matrix::Zero(2, 2);
    ee(0, 0) = 1.0;
    Matrix out = apply_liouvillian(m, ee);
    Matrix want = Matrix::Zero(2, 2);
    want(0, 0) = -1.7;
    want(1, 1) = 1.7;
    CHECK((out - want).norm() < 1e-14);
}

TEST_CASE("adjoint duality") {
    std::mt19937 rng(9);
    LindbladModel m = random_model(4, 2, rng);
    CHECK(apply_adjoint(m, Matrix::Identity(4, 4)).norm() < 1e-12);

    // Tr(X L[rho]) = Tr(Lbar[X] rho)
    for (int trial = 0; trial < 20; ++trial) {
        Matrix x = random_complex(4, rng);
        Matrix rho = random_density_m(4, rng);
        cplx lhs = (x * apply_liouvillian(m, rho)).trace();
        cplx rhs = (apply_adjoint(m, x) * rho).trace();
        CHECK(std::abs(lhs - rhs) < 1e-11 * std::max(1.0, std::abs(lhs)));
    }

    // decaying qubit: Lbar[sigma_-] = -(k/2) sigma_-
    QubitParams p;
    p.kappa = 2.4;
    LindbladModel qm = driven_qubit(p);
    PauliSet s = pauli_ops();
    CHECK((apply_adjoint(qm, s.minus.matrix) + 1.2 * s.minus.matrix).norm() < 1e-14);

    // superoperator matrices agree with the apply forms
    Matrix rho = random_density_m(4, rng);
    Matrix x = random_complex(4, rng);
    CHECK((build_liouvillian(m).apply(rho) - apply_liouvillian(m, rho)).norm() < 1e-12);
    CHECK((build_adjoint(m).apply(x) - apply_adjoint(m, x)).norm() < 1e-12);
}

TEST_CASE("steady state: driven and thermal qubit") {
    PauliSet s = pauli_ops();
    LindbladModel m = driven_qubit(resonant_qubit(1.0));
    SteadyStateResult ss = steady_state(m);
    Matrix want = 0.5 * Matrix::Identity(2, 2) + (1.0 / 3.0) * s.y.matrix -
                  (1.0 / 6.0) * s.z.matrix;
    CHECK(ss.multiplicity == 1);
    CHECK((ss.rho.matrix() - want).norm() < 1e-12);
    CHECK(ss.residual <= 1e-10 * build_liouvillian(m).matrix.norm());

    // undriven thermal qubit, n=1: populations (1/3, 2/3) in (e, g)
    QubitParams tp;
    tp.n_th = 1.0;
    SteadyStateResult tss = steady_state(driven_qubit(tp));
    CHECK(std::abs(tss.rho.matrix()(0, 0) - 1.0 / 3.0) < 1e-12);
    CHECK(std::abs(tss.rho.matrix()(1, 1) - 2.0 / 3.0) < 1e-12);

    std::mt19937 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        LindbladModel rm = random_model(2 + trial % 5, 1 + trial % 2, rng);
        SteadyStateResult rss = steady_state(rm);
        CHECK(rss.residual <= 1e-10 * build_liouvillian(rm).matrix.norm());
    }
}

TEST_CASE("steady state: two-photon-loss degeneracy") {
    KerrParams p;
    p.K = 1.0;
    p.Lambda2 = 0.4;
    p.kappa2 = 0.5;  // kappa1 = Lambda1 = 0: photon parity conserved
    p.n_max = 12;
    LindbladModel m = kerr_cavity(p);
    SteadyStateResult ss = steady_state(m);
    CHECK(ss.multiplicity > 1);
    CHECK(static_cast<int>(ss.kernel.size()) == ss.multiplicity);
    CHECK(apply_liouvillian(m, ss.rho.matrix()).norm() < 1e-9);
    for (size_t i = 0; i < ss.kernel.size(); ++i) {
        CHECK((ss.kernel[i] - ss.kernel[i].adjoint()).norm() < 1e-10);
        for (size_t j = 0; j <= i; ++j) {
            const double overlap = std::abs((ss.kernel[i].adjoint() * ss.kernel[j]).trace());
            CHECK(std::abs(overlap - (i == j ? 1.0 : 0.0)) < 1e-8);
        }
    }
}

TEST_CASE("spectrum of the driven qubit at b=1") {
    PauliSet s = pauli_ops();
    LindbladModel m = driven_qubit(resonant_qubit(1.0));
    LiouvillianSpectrum sp = spectrum(m);

    const double root15 = std::sqrt(15.0);
    std::vector<cplx> expected = {0.0, -0.5, cplx(-0.75, root15 / 4.0),
                                  cplx(-0.75, -root15 / 4.0)};
    for (const cplx& e : expected) {
        double best = 1e9;
        for (int k = 0; k < sp.size(); ++k)
            best = std::min(best, std::abs(sp.eigenvalues(k) - e));
        CHECK(best < 1e-9);
    }
    CHECK(sp.max_re < 1e-10);
    CHECK(!sp.ill_conditioned);

    // lambda_1 = -k/2 pairs with sigma_x
    int idx = -1;
    for (int k = 0; k < sp.size(); ++k)
        if (std::abs(sp.eigenvalues(k) + 0.5) < 1e-9) idx = k;
    REQUIRE(idx >= 0);
    Matrix r1 = sp.right_mode(idx);
    r1 *= s.x.matrix(0, 1) / r1(0, 1);
    CHECK((r1 - s.x.matrix).norm() < 1e-9);

    // r2 ~ sigma_y + ((1 + i sqrt15)/4) sigma_z at lambda = -k(3 + i sqrt15)/4;
    // with our convention sigma_y has (0,1) entry -i, the mode's (0,1) entry
    // fixes the scale.
    int i2 = -1;
    for (int k = 0; k < sp.size(); ++k)
        if (std::abs(sp.eigenvalues(k) - cplx(-0.75, -root15 / 4.0)) < 1e-9) i2 = k;
    REQUIRE(i2 >= 0);
    Matrix r2 = sp.right_mode(i2);
    Matrix want2 = s.y.matrix + (cplx(1.0, root15) / 4.0) * s.z.matrix;
    r2 *= want2(0, 1) / r2(0, 1);
    CHECK((r2 - want2).norm() < 1e-8);

    // zero mode equals rho_ss; biorthonormality
    Matrix r0 = sp.right_mode(sp.zero_index);
    CHECK((r0 - steady_state(m).rho.matrix()).norm() < 1e-10);
    for (int j = 0; j < sp.size(); ++j)
        for (int k = 0; k < sp.size(); ++k) {
            cplx ip = (sp.left_mode(j).adjoint() * sp.right_mode(k)).trace();
            CHECK(std::abs(ip - (j == k ? 1.0 : 0.0)) < 1e-8);
        }
}

TEST_CASE("spectrum: dissipativity on random models") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 8; ++trial) {
        LindbladModel m = random_model(2 + trial % 4, 1 + trial % 2, rng);
        LiouvillianSpectrum sp = spectrum(m);
        const double scale = sp.eigenvalues.cwiseAbs().maxCoeff();
        CHECK(sp.max_re < 1e-10 * scale);
        int zeros = 0;
        for (int k = 0; k < sp.size(); ++k)
            if (std::abs(sp.eigenvalues(k)) < 1e-10 * scale) ++zeros;
        CHECK(zeros == 1);
    }
}

TEST_CASE("exceptional point b = 1/4 degrades to matrix exponential") {
    LindbladModel m = driven_qubit(resonant_qubit(0.25));
    LiouvillianSpectrum sp = spectrum(m);
    CHECK(sp.ill_conditioned);

    auto engine = SpectralCorrelator::make(m);
    PauliSet s = pauli_ops();
    Eigen::VectorXd times(3);
    times << 0.0, 0.7, 1.9;
    Matrix rho = engine.steady().rho.matrix();
    Vector vals = engine.evolved_trace(s.y.matrix, s.z.matrix * rho, times);
    Matrix l = build_liouvillian(m).matrix;
    for (int i = 0; i < 3; ++i) {
        Matrix prop = (l * times(i)).exp();
        Matrix evolved = devectorize_matrix(prop * vectorize(Matrix(s.z.matrix * rho)));
        cplx want = (s.y.matrix * evolved).trace();
        CHECK(std::abs(vals(i) - want) < 1e-10);
    }
}

TEST_CASE("correlator") {
    LindbladModel m = driven_qubit(resonant_qubit(1.0));
    PauliSet s = pauli_ops();
    Operator one = identity_op(s.z.space);
    Eigen::VectorXd times(5);
    times << 0.0, 0.3, 0.9, 2.0, 4.0;

    CorrelatorTrace c1 = correlator(m, one, one, times, false);
    for (int i = 0; i < times.size(); ++i) CHECK(std::abs(c1.values(i) - 1.0) < 1e-12);

    SteadyStateResult ss = steady_state(m);
    CorrelatorTrace cyz = correlator(m, s.y, s.z, times, false);
    cplx want0 = (s.y.matrix * s.z.matrix * ss.rho.matrix()).trace();
    CHECK(std::abs(cyz.values(0) - want0) < 1e-12);

    // connected trace against the matrix-exponential oracle
    Matrix l = build_liouvillian(m).matrix;
    CorrelatorTrace conn = correlator(m, s.y, s.z, times, true);
    for (int i = 0; i < times.size(); ++i) {
        Matrix prop = (l * times(i)).exp();
        Matrix evolved =
            devectorize_matrix(prop * vectorize(Matrix(s.z.matrix * ss.rho.matrix())));
        cplx want = (s.y.matrix * evolved).trace() -
                    (s.y.matrix * ss.rho.matrix()).trace() *
                        (s.z.matrix * ss.rho.matrix()).trace();
        CHECK(std::abs(conn.values(i) - want) < 1e-11);
    }

    // mode content of connected C_yz: the sigma_x mode (-k/2) is absent
    auto engine = SpectralCorrelator::make(m);
    Vector amps = engine.amplitudes(s.y.matrix, s.z.matrix * ss.rho.matrix());
    for (int k = 0; k < engine.spec().size(); ++k)
        if (std::abs(engine.spec().eigenvalues(k) + 0.5) < 1e-9)
            CHECK(std::abs(amps(k)) < 1e-10);

    CHECK_THROWS_AS(correlator(m, s.y, s.z, Eigen::VectorXd::Constant(1, -1.0)),
                    std::invalid_argument);
}

TEST_CASE("spectral correlator matches matrix exponential on random models") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> ut(0.05, 3.0);
    for (int trial = 0; trial < 5; ++trial) {
        int d = 2 + trial % 3;
        LindbladModel m = random_model(d, 1 + trial % 2, rng);
        auto engine = SpectralCorrelator::make(m);
        Matrix x = random_complex(d, rng), y = random_complex(d, rng);
        Matrix rho = engine.steady().rho.matrix();
        std::vector<double> ts;
        for (int i = 0; i < 10; ++i) ts.push_back(ut(rng));
        std::sort(ts.begin(), ts.end());
        Eigen::VectorXd times = Eigen::Map<Eigen::VectorXd>(ts.data(), ts.size());
        Vector spectral = engine.evolved_trace(x, y * rho, times);
        Matrix l = build_liouvillian(m).matrix;
        for (int i = 0; i < times.size(); ++i) {
            Matrix prop = (l * times(i)).exp();
            cplx want =
                (x * devectorize_matrix(prop * vectorize(Matrix(y * rho)))).trace();
            CHECK(std::abs(spectral(i) - want) < 1e-9 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST_CASE("two-sided correlator") {
    PauliSet s = pauli_ops();
    Eigen::VectorXd times(9);
    times << -4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0;

    // undriven thermal qubit with T = K_z: C_zz symmetric (CQDB holds)
    QubitParams tp;
    tp.n_th = 1.0;
    LindbladModel tm = driven_qubit(tp);
    Matrix sz = s.z.matrix;
    CorrelatorTrace sym =
        two_sided_correlator(tm, s.z, s.z, sz.conjugate(), sz.conjugate(), times, true);
    for (int i = 0; i < 4; ++i)
        CHECK(std::abs(sym.values(i) - sym.values(8 - i)) < 1e-11);

    // driven qubit, psi = 0 family member: C_yz asymmetric
    LindbladModel dm = driven_qubit(resonant_qubit(1.0));
    Matrix v = I_UNIT * s.z.matrix;  // psi = 0 unitary factor
    Matrix ytilde = v * s.y.matrix.conjugate() * v.adjoint();
    Matrix ztilde = v * s.z.matrix.conjugate() * v.adjoint();
    CorrelatorTrace asym = two_sided_correlator(dm, s.y, s.z, ytilde, ztilde, times, true);
    double max_asym = 0.0;
    for (int i = 0; i < 4; ++i)
        max_asym = std::max(max_asym, std::abs(asym.values(i) - asym.values(8 - i)));
    CHECK(max_asym > 1e-2);

    // X = Y = 1: constant 1 on both branches (unconnected)
    Operator one = identity_op(s.z.space);
    CorrelatorTrace flat =
        two_sided_correlator(dm, one, one, Matrix(Matrix::Identity(2, 2)),
                             Matrix(Matrix::Identity(2, 2)), times, false);
    for (int i = 0; i < times.size(); ++i)
        CHECK(std::abs(flat.values(i) - 1.0) < 1e-12);
}
