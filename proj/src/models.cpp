#include "htrs/models.hpp"

#include <cmath>

namespace htrs {

void QubitParams::validate() const {
    if (kappa <= 0) throw std::invalid_argument("QubitParams: kappa must be positive");
    if (n_th < 0) throw std::invalid_argument("QubitParams: n_th must be >= 0");
}

LindbladModel driven_qubit(const QubitParams& p) {
    p.validate();
    PauliSet s = pauli_ops();
    Operator h(s.z.space, p.Delta * s.z.matrix + 0.5 * p.Omega * s.x.matrix);
    std::vector<Operator> jumps;
    jumps.emplace_back(s.z.space,
                       Matrix(std::sqrt(p.kappa * (1.0 + p.n_th)) * s.minus.matrix));
    if (p.n_th > 0)
        jumps.emplace_back(s.z.space, Matrix(std::sqrt(p.kappa * p.n_th) * s.plus.matrix));
    return LindbladModel::make(std::move(h), std::move(jumps));
}

DensityMatrix qubit_analytic_steady_state(const QubitParams& p) {
    p.validate();
    PauliSet s = pauli_ops();
    const double kt = p.kappa_T();
    const double dt = 16.0 * p.Delta * p.Delta + 2.0 * p.Omega * p.Omega + kt * kt;
    const double f = p.kappa / kt;  // thermal contraction of the Bloch vector
    const double cx = -4.0 * p.Delta * p.Omega * f / dt;
    const double cy = p.Omega * p.kappa / dt;
    const double cz = -f * (16.0 * p.Delta * p.Delta + kt * kt) / (2.0 * dt);
    Matrix m = 0.5 * Matrix::Identity(2, 2) + cx * s.x.matrix + cy * s.y.matrix +
               cz * s.z.matrix;
    return DensityMatrix::validated(Operator(s.z.space, std::move(m)));
}

LiouvillianSpectrum qubit_analytic_spectrum(double b, double kappa) {
    if (b <= 0 || kappa <= 0)
        throw std::invalid_argument("qubit_analytic_spectrum: b, kappa must be positive");
    PauliSet s = pauli_ops();
    const cplx alpha = (16.0 * b * b >= 1.0)
                           ? cplx(std::sqrt(16.0 * b * b - 1.0), 0.0)
                           : cplx(0.0, std::sqrt(1.0 - 16.0 * b * b));

    QubitParams p;
    p.Omega = b * kappa;
    p.kappa = kappa;
    Matrix rho = qubit_analytic_steady_state(p).matrix();

    const cplx coef = (1.0 + I_UNIT * alpha) / (4.0 * b);
    struct Mode {
        cplx lambda;
        Matrix r;
    };
    std::vector<Mode> modes = {
        {0.0, rho},
        {-0.5 * kappa, s.x.matrix},
        {-0.25 * kappa * (3.0 + I_UNIT * alpha), s.y.matrix + coef * s.z.matrix},
        {-0.25 * kappa * (3.0 - I_UNIT * alpha), coef * s.y.matrix + s.z.matrix},
    };
    std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b2) {
        if (a.lambda.real() != b2.lambda.real()) return a.lambda.real() > b2.lambda.real();
        return a.lambda.imag() > b2.lambda.imag();
    });

    LiouvillianSpectrum out;
    out.space = s.z.space;
    out.eigenvalues.resize(4);
    out.modes.resize(4, 4);
    for (int k = 0; k < 4; ++k) {
        out.eigenvalues(k) = modes[k].lambda;
        Matrix r = modes[k].r;
        if (k != 0) r /= r.norm();  // zero mode kept at unit trace
        out.modes.col(k) = vectorize(r);
    }
    out.zero_index = 0;
    out.max_re = 0.0;
    Eigen::FullPivLU<Matrix> lu(out.modes);
    out.ill_conditioned = !lu.isInvertible();
    if (!out.ill_conditioned) {
        out.modes_inv = lu.inverse();
        out.condition = out.modes.norm() * out.modes_inv.norm() / 4.0;
        out.ill_conditioned = out.condition > 1e8;
    } else {
        out.modes_inv = Matrix::Zero(4, 4);
        out.condition = std::numeric_limits<double>::infinity();
    }
    return out;
}

AntiUnitary qubit_trs_family(double b, double psi) {
    PauliSet s = pauli_ops();
    const double r = std::sqrt(4.0 * b * b + 1.0);
    Matrix v = (std::sin(0.5 * psi) / r) *
                   (Matrix::Identity(2, 2) - 2.0 * I_UNIT * b * s.x.matrix) +
               I_UNIT * std::cos(0.5 * psi) * s.z.matrix;
    return AntiUnitary::k_z(Operator(s.z.space, std::move(v)));
}

AntiUnitary qubit_hidden_trs(double b) { return qubit_trs_family(b, M_PI); }

QubitAsymmetry qubit_asymmetry_analytic(double b_prime, double n_th, double psi,
                                        double kappa, double t) {
    const double bp = b_prime;
    const double kt = kappa * (1.0 + 2.0 * n_th);
    const double eta = 1.0 - 1.0 / ((1.0 + 2.0 * n_th) * (1.0 + 2.0 * n_th));
    const cplx alpha = (16.0 * bp * bp >= 1.0)
                           ? cplx(std::sqrt(16.0 * bp * bp - 1.0), 0.0)
                           : cplx(0.0, std::sqrt(1.0 - 16.0 * bp * bp));
    const double bp2 = bp * bp;
    // common envelope: -8 b' sin(alpha kt t/4) e^{-3 kt t/4} / (alpha (2b'^2+1)(4b'^2+1))
    const cplx envelope = -8.0 * bp * std::sin(0.25 * alpha * kt * t) *
                          std::exp(-0.75 * kt * t) /
                          (alpha * (2.0 * bp2 + 1.0) * (4.0 * bp2 + 1.0));
    QubitAsymmetry qa;
    qa.classical = envelope * (4.0 * bp2 * bp2 + (4.0 * bp2 + 1.0) * eta);
    qa.entanglement = envelope * 2.0 * bp2 *
                      std::sqrt(4.0 * bp2 * bp2 + (4.0 * bp2 + 1.0) * eta) * std::cos(psi);
    return qa;
}

// ---------------------------------------------------------------------------

void KerrParams::validate() const {
    if (n_max < 2) throw std::invalid_argument("KerrParams: n_max must be >= 2");
    if (kappa1 < 0 || kappa2 < 0)
        throw std::invalid_argument("KerrParams: negative dissipation rate");
    if (n_th < 0) throw std::invalid_argument("KerrParams: n_th must be >= 0");
    if (kappa1 <= 0 && kappa2 <= 0)
        throw std::invalid_argument("KerrParams: dissipative model needs kappa1 or kappa2 > 0");
}

double kerr_expected_occupation(const KerrParams& p) {
    double n = p.n_th;
    const double l2 = std::abs(p.Lambda2);
    const double delta_eff = std::hypot(p.Delta, 0.5 * p.kappa1);
    if (p.K > 0) {
        const double disc = l2 * l2 - 0.25 * p.kappa1 * p.kappa1;
        if (disc > 0) n += std::sqrt(disc) / p.K;  // parametric cat amplitude
    } else if (delta_eff > 0 && 2.0 * l2 < delta_eff) {
        const double q = 2.0 * l2 / delta_eff;  // squeezing below threshold
        n += q * q / (1.0 - q * q);
    }
    const double denom1 = std::hypot(p.Delta + p.K * n, 0.5 * p.kappa1);
    if (denom1 > 0) {
        const double amp = std::abs(p.Lambda1) / denom1;
        n += amp * amp;
    }
    return n;
}

LindbladModel kerr_cavity(const KerrParams& p, std::string* warning) {
    p.validate();
    const int d = p.n_max;
    const Matrix a = annihilation_op(d).matrix;
    const Matrix ad = a.adjoint();
    Matrix h = 0.5 * p.K * ad * ad * a * a + p.Delta * ad * a;
    h += p.Lambda1 * ad + std::conj(p.Lambda1) * a;
    h += 0.5 * p.Lambda2 * ad * ad + 0.5 * std::conj(p.Lambda2) * a * a;

    HilbertSpace space = HilbertSpace::single(d);
    std::vector<Operator> jumps;
    if (p.kappa1 > 0) {
        jumps.emplace_back(space, Matrix(std::sqrt(p.kappa1 * (1.0 + p.n_th)) * a));
        if (p.n_th > 0)
            jumps.emplace_back(space, Matrix(std::sqrt(p.kappa1 * p.n_th) * ad));
    }
    if (p.kappa2 > 0) jumps.emplace_back(space, Matrix(std::sqrt(p.kappa2) * a * a));

    if (warning) {
        const double n_est = kerr_expected_occupation(p);
        if (n_est > 0.5 * p.n_max)
            *warning = "truncation n_max=" + std::to_string(p.n_max) +
                       " may be too small for expected occupation " + std::to_string(n_est);
        else
            warning->clear();
    }
    return LindbladModel::make(Operator(space, std::move(h)), std::move(jumps));
}

std::optional<double> dissipative_gap_estimate(const KerrParams& p, bool amplitude_squared) {
    const double l2 = std::abs(p.Lambda2);
    const double k = p.kappa1;
    if (p.K <= 0) return std::nullopt;
    const double disc = l2 * l2 - 0.25 * k * k;
    if (disc <= 0) return std::nullopt;  // below threshold
    const double expr = std::sqrt(disc) / p.K;
    const double alpha_sq = amplitude_squared ? expr : expr * expr;
    return k * alpha_sq * std::exp(-2.0 * alpha_sq);
}

Operator quadrature_x(int n_max) {
    const Matrix a = annihilation_op(n_max).matrix;
    return Operator(HilbertSpace::single(n_max), Matrix((a + a.adjoint()) / std::sqrt(2.0)));
}

Operator quadrature_p(int n_max) {
    const Matrix a = annihilation_op(n_max).matrix;
    return Operator(HilbertSpace::single(n_max),
                    Matrix(-I_UNIT * (a - a.adjoint()) / std::sqrt(2.0)));
}

double bose_occupancy(double temperature) {
    if (temperature <= 0) return 0.0;
    return 1.0 / std::expm1(1.0 / temperature);
}

double bose_temperature(double n_bar) {
    if (n_bar <= 0) return 0.0;
    return 1.0 / std::log1p(1.0 / n_bar);
}

}  // namespace htrs
