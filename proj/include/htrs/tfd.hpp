// tfd.hpp — Anti-unitaries, thermofield-double states, the exchange
// superoperator, and doubled-system TFD correlators with the
// classical/entanglement decomposition.

#pragma once

#include <optional>
#include <string>

#include "htrs/lindblad.hpp"

namespace htrs {

/// Anti-unitary T = V K_basis stored as a unitary factor plus the basis the
/// conjugation acts in. Internally everything is reduced to the canonical
/// computational-basis form T x = V_c conj(x); for the rho-eigenbasis
/// conjugation K_rho the eigenvector gauge is fixed by making each
/// eigenvector's largest component real positive.
struct AntiUnitary {
    enum class Basis { computational, rho_eigenbasis };

    Operator V;
    Basis basis = Basis::computational;
    Matrix eigenbasis;  // gauge-fixed W for rho_eigenbasis; empty otherwise

    static AntiUnitary k_z(Operator v, const Tolerances& tol = {});
    /// T = V K_rho with K_rho conjugation in rho's (gauge-fixed) eigenbasis.
    static AntiUnitary k_rho(Operator v, const DensityMatrix& rho,
                             const Tolerances& tol = {});
    /// Plain conjugation in the computational basis.
    static AntiUnitary conjugation(const HilbertSpace& space);

    /// V_c such that T x = V_c conj(x).
    Matrix canonical_v() const;
    /// T X T^-1 = V_c X* V_c^dag.
    Matrix conjugate_op(const Matrix& x) const;
    Vector apply(const Vector& x) const;
    double unitarity_defect() const;
};

/// ||T rho T^-1 - rho||_F.
double check_trs_invariance(const DensityMatrix& rho_ss, const AntiUnitary& t);

// ---------------------------------------------------------------------------
// Thermofield double state |psi_T> = sum_n sqrt(p_n) |n>_A (T|n>)_B,
// coefficient matrix Psi = rho_ss^{1/2} V_c^T (computational basis).

struct TfdState {
    Matrix psi;  // d x d coefficients, ||psi||_F = 1
    DensityMatrix rho_ss;
    std::optional<AntiUnitary> T;
    bool degenerate_spectrum = false;

    int dim() const { return static_cast<int>(psi.rows()); }
    StateVector as_state() const;  // on the doubled space, A before B
    /// Tr_B |psi><psi| = Psi Psi^dag.
    Matrix marginal_a() const { return psi * psi.adjoint(); }
};

struct TfdOptions {
    bool allow_degenerate = false;
};

/// Requires full-rank rho_ss; refuses a degenerate spectrum unless
/// allow_degenerate (the pointer-basis split is then ill-defined, though the
/// state itself is not).
TfdState build_tfd(const DensityMatrix& rho_ss, const AntiUnitary& t,
                   const Tolerances& tol = {}, const TfdOptions& opts = {});

// ---------------------------------------------------------------------------
// Exchange superoperator J[X] = rho^{1/2} (T X T^-1)^dag rho^{-1/2}, the
// unique map with J[X]_B |psi_T> = X_A |psi_T> for full-rank rho_ss.

class ExchangeSuperop {
  public:
    ExchangeSuperop(const DensityMatrix& rho_ss, const AntiUnitary& t,
                    const Tolerances& tol = {});

    Matrix apply(const Matrix& x) const { return left_ * x.transpose() * right_; }
    /// d^2 x d^2 matrix in the column-stacking convention.
    Matrix superop_matrix() const;
    int dim() const { return static_cast<int>(left_.rows()); }

  private:
    Matrix left_;   // rho^{1/2} V_c
    Matrix right_;  // V_c^dag rho^{-1/2}
};

ExchangeSuperop exchange_superop(const DensityMatrix& rho_ss, const AntiUnitary& t,
                                 const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// TFD correlators

struct TfdCorrelator {
    Eigen::VectorXd times;  // strictly increasing, may span negative times
    Vector total;
    Vector classical;
    Vector entanglement;  // total - classical
    std::string label_x = "X", label_y = "Y";
};

/// C^TFD_XY: t >= 0 branch Tr[X exp(Lt)(Psi Y^T Psi^dag)], t < 0 branch with
/// X and Y swapped at |t|. The classical branch evolves the pointer-diagonal
/// restriction (diagonal of Psi Y^T Psi^dag in the rho_ss eigenbasis);
/// entanglement is the remainder. Connected subtracts the t -> inf asymptote
/// of each branch.
TfdCorrelator tfd_correlator(const SpectralCorrelator& engine, const TfdState& tfd,
                             const Operator& X, const Operator& Y,
                             const Eigen::VectorXd& times, bool connected = true);

TfdCorrelator tfd_correlator(const LindbladModel& model, const TfdState& tfd,
                             const Operator& X, const Operator& Y,
                             const Eigen::VectorXd& times, bool connected = true,
                             const Tolerances& tol = {});

/// Spec-level convenience: two-branch single-system correlator with the
/// time-reversed pair on the negative branch, C(t<0) = <Yt(-t) Xt(0)>.
CorrelatorTrace two_sided_correlator(const LindbladModel& model, const Operator& X,
                                     const Operator& Y, const AntiUnitary& t,
                                     const Eigen::VectorXd& times, bool connected = true,
                                     const Tolerances& tol = {});

}  // namespace htrs
