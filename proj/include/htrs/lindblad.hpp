// lindblad.hpp — Liouvillian / adjoint superoperators, steady states,
// spectra, and steady-state two-time correlators.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "htrs/quantum_core.hpp"

namespace htrs {

/// Hamiltonian + jump operators (rates absorbed, c_l = sqrt(kappa_l) * base).
/// Construction enforces the traceless-jump convention: any trace part of a
/// jump is moved into the Hamiltonian (the Liouvillian is unchanged); the
/// removed scalars are recorded in jump_trace_shifts.
struct LindbladModel {
    HilbertSpace space;
    Operator H;
    std::vector<Operator> jumps;
    std::vector<cplx> jump_trace_shifts;

    static LindbladModel make(Operator H, std::vector<Operator> jumps,
                              const Tolerances& tol = {});

    int num_jumps() const { return static_cast<int>(jumps.size()); }
    int dim() const { return space.total_dim; }
};

/// Dense d^2 x d^2 matrix acting on column-stacked operators.
struct Superoperator {
    HilbertSpace space;
    Matrix matrix;

    Matrix apply(const Matrix& x) const { return devectorize_matrix(matrix * vectorize(x)); }
};

/// H_eff = H - (i/2) sum_l c_l^dag c_l.
Operator effective_hamiltonian(const LindbladModel& model);

Superoperator build_liouvillian(const LindbladModel& model);
Superoperator build_adjoint(const LindbladModel& model);

/// Matrix-form application (no d^2 x d^2 matrix built); used for residuals
/// on large spaces.
Matrix apply_liouvillian(const LindbladModel& model, const Matrix& rho);
Matrix apply_adjoint(const LindbladModel& model, const Matrix& a);

// ---------------------------------------------------------------------------
// Steady state (SVD null space)

struct SteadyStateResult {
    DensityMatrix rho;
    int multiplicity = 1;
    double residual = 0.0;         // ||L[rho]||_F after normalization
    std::vector<Matrix> kernel;    // orthonormal Hermitian kernel basis (HS product)
};

/// Kernel of L via smallest singular values. Multiplicity counts singular
/// values below tol.null_rel * sigma_max. For a degenerate kernel, rho is the
/// infinite-time image of the maximally mixed state (a canonical full-rank
/// choice); the Hermitian kernel basis is returned for callers that want a
/// different combination.
SteadyStateResult steady_state(const LindbladModel& model, const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Spectrum

struct LiouvillianSpectrum {
    HilbertSpace space;
    Vector eigenvalues;   // sorted by descending real part
    Matrix modes;         // columns vec(r_k)
    Matrix modes_inv;     // rows w_k^dag, so Tr(l_j^dag r_k) = delta_jk
    double condition = 1.0;      // estimate of cond(modes)
    bool defective = false;      // eigenvalue collision with degraded eigenvectors
    bool ill_conditioned = false;  // triggers the matrix-exponential fallback
    int zero_index = 0;
    double max_re = 0.0;  // largest real part (stability: <= ~0)

    int size() const { return static_cast<int>(eigenvalues.size()); }
    Matrix right_mode(int k) const { return devectorize_matrix(modes.col(k)); }
    Matrix left_mode(int k) const { return devectorize_matrix(modes_inv.row(k).adjoint()); }
};

/// Full eigendecomposition of the Liouvillian with biorthonormalized
/// left/right modes. A Jordan-like (defective) Liouvillian is reported via
/// ill_conditioned; correlator evaluation then degrades to the matrix
/// exponential.
LiouvillianSpectrum spectrum(const LindbladModel& model, const Tolerances& tol = {},
                             int max_dim_sq = 4096);

// ---------------------------------------------------------------------------
// Correlators

struct CorrelatorTrace {
    Eigen::VectorXd times;   // strictly increasing; may include negatives
    Vector values;
    std::string label_x = "X";
    std::string label_y = "Y";
    std::string warning;
};

/// Bundles steady state + spectrum of one model for repeated correlator
/// evaluation (parameter scans, TFD branches). Immutable once built.
class SpectralCorrelator {
  public:
    static SpectralCorrelator make(const LindbladModel& model, const Tolerances& tol = {});

    const LindbladModel& model() const { return model_; }
    const SteadyStateResult& steady() const { return ss_; }
    const LiouvillianSpectrum& spec() const { return spec_; }

    /// Tr[X exp(L t)[M0]] for each t >= 0.
    Vector evolved_trace(const Matrix& X, const Matrix& M0,
                         const Eigen::VectorXd& times) const;

    /// Modal amplitudes A_k with Tr[X exp(L t)[M0]] = sum_k A_k exp(lambda_k t).
    Vector amplitudes(const Matrix& X, const Matrix& M0) const;

    /// <X(t) Y(0)> at t >= 0, optionally connected.
    Vector forward(const Matrix& X, const Matrix& Y, const Eigen::VectorXd& times,
                   bool connected) const;

    cplx expectation(const Matrix& X) const { return (X * ss_.rho.matrix()).trace(); }

  private:
    LindbladModel model_;
    SteadyStateResult ss_;
    LiouvillianSpectrum spec_;
    Matrix liouvillian_;  // kept for the expm fallback
};

/// C(t) = Tr(X exp(L t)[Y rho_ss]) evaluated through the spectral
/// decomposition; times must be >= 0 and strictly increasing. Connected
/// subtracts <X><Y> (defaults on).
CorrelatorTrace correlator(const LindbladModel& model, const Operator& X, const Operator& Y,
                           const Eigen::VectorXd& times, bool connected = true,
                           const Tolerances& tol = {});

/// Two-branch correlator: C(t>=0) = <X(t)Y(0)>, C(t<0) = <Yt(-t) Xt(0)> with
/// Xt = T X T^-1 precomputed by the caller. Used by the CQDB scans.
CorrelatorTrace two_sided_correlator(const LindbladModel& model, const Operator& X,
                                     const Operator& Y, const Matrix& x_tilde,
                                     const Matrix& y_tilde, const Eigen::VectorXd& times,
                                     bool connected = true, const Tolerances& tol = {});

/// Same, reusing a prebuilt engine.
Vector two_sided_values(const SpectralCorrelator& engine, const Matrix& X, const Matrix& Y,
                        const Matrix& x_tilde, const Matrix& y_tilde,
                        const Eigen::VectorXd& times, bool connected = true);

}  // namespace htrs
