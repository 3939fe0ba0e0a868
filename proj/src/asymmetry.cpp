#include "htrs/asymmetry.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "htrs/models.hpp"

namespace htrs {

AsymmetryTrace asymmetry_trace(const CorrelatorTrace& c) {
    const auto n = c.times.size();
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(c.times(i) + c.times(n - 1 - i)) >
            1e-9 * std::max(1.0, std::abs(c.times(i))))
            throw std::invalid_argument("asymmetry_trace: time grid not symmetric about 0");
    const Eigen::Index half = n / 2;
    AsymmetryTrace out;
    out.times.resize(half);
    out.values.resize(half);
    for (Eigen::Index i = 0; i < half; ++i) {
        out.times(i) = c.times(n - half + i);
        out.values(i) = std::abs(c.values(n - half + i) - c.values(half - 1 - i));
    }
    return out;
}

namespace {

// Spectral-form asymmetry integrand: f(t) = sum_k D_k exp(lambda_k t) with
// D_k the forward/backward amplitude difference, zero modes removed.
struct SpectralIntegrand {
    std::vector<cplx> amps;
    std::vector<cplx> lambdas;

    cplx eval(double t) const {
        cplx s = 0;
        for (size_t k = 0; k < amps.size(); ++k)
            s += amps[k] * std::exp(lambdas[k] * t);
        return s;
    }
    double scale() const {
        double s = 0;
        for (const auto& a : amps) s += std::abs(a);
        return s;
    }
};

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double tol, int depth, double* err_acc) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) < 15.0 * tol) {
        *err_acc += std::abs(diff) / 15.0;
        return left + right + diff / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1, err_acc) +
           adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1, err_acc);
}

// Integrate |f| over [0, t_max], seeding panels on a mixed linear/log grid so
// the fast initial transient and slow tail are both resolved.
template <typename F>
double integrate_abs(const F& f, double t_max, double rel_tol, double scale,
                     double* err_out) {
    const int seed = 96;
    std::vector<double> knots;
    knots.push_back(0.0);
    for (int i = 1; i <= seed; ++i)
        knots.push_back(t_max * std::pow(double(i) / seed, 3.0));
    double total = 0.0, err = 0.0;
    const double tol = rel_tol * std::max(scale * t_max, 1e-300) / seed;
    for (int i = 0; i + 1 < static_cast<int>(knots.size()); ++i) {
        const double a = knots[i], b = knots[i + 1];
        const double fa = f(a), fm = f(0.5 * (a + b)), fb = f(b);
        total += adaptive_simpson(f, a, b, fa, fm, fb, tol, 28, &err);
    }
    if (err_out) *err_out = err;
    return total;
}

}  // namespace

IntegratedAsymmetry integrated_asymmetry(const SpectralCorrelator& engine,
                                         const BranchSpec& branches, double rel_tol) {
    const auto& spec = engine.spec();
    const Vector fwd = engine.amplitudes(branches.x_fwd, branches.m0_fwd);
    const Vector bwd = engine.amplitudes(branches.x_bwd, branches.m0_bwd);

    const double lam_scale = spec.eigenvalues.cwiseAbs().maxCoeff();
    const double zero_cut = 1e-10 * std::max(lam_scale, 1e-300);

    IntegratedAsymmetry out;
    SpectralIntegrand integ;
    double slowest = std::numeric_limits<double>::infinity();
    int zero_modes = 0;
    double zero_weight = 0.0;
    for (int k = 0; k < spec.size(); ++k) {
        const cplx lam = spec.eigenvalues(k);
        const cplx diff = fwd(k) - bwd(k);
        if (std::abs(lam) < zero_cut) {
            ++zero_modes;
            zero_weight += std::abs(diff);
            continue;  // connected part: stationary contribution drops out
        }
        if (std::abs(diff) < 1e-16 * std::max(1.0, fwd.cwiseAbs().maxCoeff())) continue;
        integ.amps.push_back(diff);
        integ.lambdas.push_back(lam);
        slowest = std::min(slowest, std::abs(lam.real()));
    }
    if (zero_modes > 1 && zero_weight > 1e-10) {
        out.divergent = true;  // asymmetric weight on a degenerate stationary space
        out.m = std::numeric_limits<double>::infinity();
        return out;
    }
    if (integ.amps.empty()) return out;
    if (!(slowest > 0)) {
        out.divergent = true;
        out.m = std::numeric_limits<double>::infinity();
        return out;
    }

    out.t_max = 40.0 / slowest;
    const double scale = integ.scale();
    out.m = integrate_abs([&](double t) { return std::abs(integ.eval(t)); }, out.t_max,
                          rel_tol, scale, &out.quad_error);
    double err2 = 0.0;
    out.m_real = integrate_abs([&](double t) { return std::abs(integ.eval(t).real()); },
                               out.t_max, rel_tol, scale, &err2);
    for (size_t k = 0; k < integ.amps.size(); ++k)
        out.tail_bound += std::abs(integ.amps[k]) *
                          std::exp(integ.lambdas[k].real() * out.t_max) /
                          std::abs(integ.lambdas[k].real());
    out.quad_error += out.tail_bound;
    return out;
}

IntegratedAsymmetry integrated_asymmetry(const SpectralCorrelator& engine, const Matrix& x,
                                         const Matrix& y, double rel_tol) {
    const Matrix& rho = engine.steady().rho.matrix();
    return integrated_asymmetry(engine, BranchSpec{x, y * rho, y, x * rho}, rel_tol);
}

PairBuilder swap_pair(std::function<Matrix(const LindbladModel&)> x,
                      std::function<Matrix(const LindbladModel&)> y) {
    return [x = std::move(x), y = std::move(y)](const SpectralCorrelator& engine) {
        const Matrix xm = x(engine.model());
        const Matrix ym = y(engine.model());
        const Matrix& rho = engine.steady().rho.matrix();
        return BranchSpec{xm, ym * rho, ym, xm * rho};
    };
}

AsymmetryScan temperature_scan(const std::function<LindbladModel(double)>& family,
                               const std::vector<double>& n_bar_grid,
                               const std::vector<PairBuilder>& pairs, int jobs,
                               const Tolerances& tol) {
    if (n_bar_grid.empty())
        throw std::invalid_argument("temperature_scan: empty n_bar grid");
    AsymmetryScan scan;
    scan.points.resize(n_bar_grid.size());

    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= n_bar_grid.size()) return;
            ScanPoint& pt = scan.points[i];
            pt.n_bar = n_bar_grid[i];
            pt.temperature = bose_temperature(pt.n_bar);
            try {
                LindbladModel model = family(pt.n_bar);
                auto engine = SpectralCorrelator::make(model, tol);
                if (engine.steady().multiplicity > 1)
                    throw NumericsError("degenerate steady state");
                for (const auto& pair : pairs)
                    pt.m.push_back(integrated_asymmetry(engine, pair(engine)));
            } catch (const std::exception& e) {
                pt.converged = false;
                pt.note = e.what();
            }
        }
    };

    const int n_threads = std::max(1, std::min<int>(jobs, n_bar_grid.size()));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    return scan;
}

}  // namespace htrs
