// asymmetry.hpp — Time-asymmetry metrics m = int_0^inf |C(t) - C(-t)| dt and
// temperature scans over them.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "htrs/lindblad.hpp"

namespace htrs {

/// Pointwise |C(t) - C(-t)| for t > 0 from a trace on a symmetric +-t grid.
struct AsymmetryTrace {
    Eigen::VectorXd times;  // positive half
    Eigen::VectorXd values;
};
AsymmetryTrace asymmetry_trace(const CorrelatorTrace& c);

struct IntegratedAsymmetry {
    double m = 0.0;          // integral of the complex modulus
    double m_real = 0.0;     // integral of |Re|
    double t_max = 0.0;      // quadrature cutoff, 40 / |Re lambda_slow|
    double tail_bound = 0.0; // analytic bound on the discarded tail
    double quad_error = 0.0; // adaptive-quadrature error estimate
    bool divergent = false;  // degenerate lambda = 0 with asymmetric weight
};

/// Generic two-branch spectral asymmetry: C(t>0) = Tr[x_fwd exp(Lt) m0_fwd],
/// C(-t) = Tr[x_bwd exp(Lt) m0_bwd]; stationary (zero-mode) parts drop out,
/// which equals the connected subtraction for the correlators used here.
struct BranchSpec {
    Matrix x_fwd, m0_fwd;
    Matrix x_bwd, m0_bwd;
};

IntegratedAsymmetry integrated_asymmetry(const SpectralCorrelator& engine,
                                         const BranchSpec& branches, double rel_tol = 1e-9);

/// m for the swap correlator C(t>=0) = <X(t)Y>, C(t<0) = <Y(-t)X> (connected),
/// integrated on the spectral form by adaptive quadrature with an analytic
/// tail bound.
IntegratedAsymmetry integrated_asymmetry(const SpectralCorrelator& engine, const Matrix& x,
                                         const Matrix& y, double rel_tol = 1e-9);

struct ScanPoint {
    double n_bar = 0.0;
    double temperature = 0.0;  // k_B T / (hbar w)
    std::vector<IntegratedAsymmetry> m;  // one per pair
    bool converged = true;
    std::string note;
};

struct AsymmetryScan {
    std::vector<ScanPoint> points;
};

using PairBuilder = std::function<BranchSpec(const SpectralCorrelator&)>;

/// Swap-correlator pair from operator builders evaluated on the scan model.
PairBuilder swap_pair(std::function<Matrix(const LindbladModel&)> x,
                      std::function<Matrix(const LindbladModel&)> y);

/// m per temperature for a family of models indexed by n_bar; points are
/// independent and run on `jobs` threads. A failed point is flagged and the
/// scan continues.
AsymmetryScan temperature_scan(const std::function<LindbladModel(double)>& family,
                               const std::vector<double>& n_bar_grid,
                               const std::vector<PairBuilder>& pairs, int jobs = 1,
                               const Tolerances& tol = {});

}  // namespace htrs
