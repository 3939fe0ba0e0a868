// models.hpp — Built-in model constructors and closed-form reference
// results for driven qubits and Kerr cavities, at zero and finite temperature.

#pragma once

#include <optional>
#include <string>

#include "htrs/lindblad.hpp"
#include "htrs/tfd.hpp"

namespace htrs {

// ---------------------------------------------------------------------------
// Driven qubit: H = Delta sigma_z + (Omega/2) sigma_x,
// jumps sqrt(kappa(1+n_th)) sigma_-, sqrt(kappa n_th) sigma_+.

struct QubitParams {
    double Delta = 0.0;
    double Omega = 0.0;
    double kappa = 1.0;
    double n_th = 0.0;

    double b() const { return Omega / kappa; }
    double kappa_T() const { return kappa * (1.0 + 2.0 * n_th); }
    double b_prime() const { return Omega / kappa_T(); }
    void validate() const;
};

LindbladModel driven_qubit(const QubitParams& p);

/// Exact steady state. At n_th = 0 this is the textbook resonance-fluorescence
/// result; at finite temperature the traceless part picks up an extra
/// 1/(1+2 n_th) factor on top of the kappa -> kappa(1+2 n_th) substitution
/// (the undriven limit then reproduces the thermal diagonal state).
DensityMatrix qubit_analytic_steady_state(const QubitParams& p);

/// Liouvillian eigensystem at resonance: {0, -k/2, -k(3 -+ i alpha)/4} with
/// alpha = sqrt(16 b^2 - 1), continued to i sqrt(1 - 16 b^2) when overdamped
/// (b < 1/4). Ordering matches spectrum(): descending real part, then
/// descending imaginary part. At b = 1/4 the Liouvillian is defective and the
/// result is flagged ill_conditioned.
LiouvillianSpectrum qubit_analytic_spectrum(double b, double kappa);

/// Permissible time-reversal family at resonance,
/// T = [sin(psi/2)/sqrt(4b^2+1) (1 - 2ib sigma_x) + i cos(psi/2) sigma_z] K_z.
/// Pass b' for the finite-temperature family.
AntiUnitary qubit_trs_family(double b_or_bprime, double psi);

/// The hidden-TRS member (psi = pi): T_h = (1 - 2ib sigma_x) K_z / sqrt(4b^2+1).
AntiUnitary qubit_hidden_trs(double b_or_bprime);

/// Closed-form time asymmetry of the sigma_y/sigma_z TFD correlator branches,
/// C(t) - C(-t), evaluated at time t >= 0. b_prime is Omega/(kappa(1+2 n_th));
/// the decay and oscillation rates carry kappa(1+2 n_th).
struct QubitAsymmetry {
    cplx classical;
    cplx entanglement;
    cplx total() const { return classical + entanglement; }
};
QubitAsymmetry qubit_asymmetry_analytic(double b_prime, double n_th, double psi,
                                        double kappa, double t);

// ---------------------------------------------------------------------------
// Kerr cavity: H = (K/2) adag^2 a^2 + Delta adag a
//                 + (Lambda1 adag + (Lambda2/2) adag^2 + h.c.)

struct KerrParams {
    double K = 0.0;
    double Delta = 0.0;
    cplx Lambda1 = 0.0;
    cplx Lambda2 = 0.0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double n_th = 0.0;
    int n_max = 20;
    void validate() const;
};

/// Jump ordering: [sqrt(kappa1(1+n_th)) a, sqrt(kappa1 n_th) adag (if n_th>0),
/// sqrt(kappa2) a^2 (if kappa2>0)]. Sets *warning when the semiclassical
/// occupation estimate exceeds n_max/2.
LindbladModel kerr_cavity(const KerrParams& p, std::string* warning = nullptr);

/// Semiclassical photon-number estimate used for the truncation check.
double kerr_expected_occupation(const KerrParams& p);

/// Dissipative-gap heuristic Gamma = kappa |alpha|^2 exp(-2|alpha|^2) for the
/// parametric oscillator above threshold (Lambda2^2 > kappa^2/4), else nullopt.
/// amplitude_squared selects |alpha|^2 = sqrt((L2^2 - k^2/4)/K^2), which
/// reproduces the k_B T / hbar w ~ 0.2 consistency point; false uses the same
/// expression as |alpha| instead.
std::optional<double> dissipative_gap_estimate(const KerrParams& p,
                                               bool amplitude_squared = true);

/// Quadratures X = (a + adag)/sqrt(2), P = -i(a - adag)/sqrt(2).
Operator quadrature_x(int n_max);
Operator quadrature_p(int n_max);

// Bose-Einstein conversions in units of hbar w / k_B.
double bose_occupancy(double temperature);
double bose_temperature(double n_bar);

}  // namespace htrs
