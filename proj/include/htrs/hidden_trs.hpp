// hidden_trs.hpp — Detect hidden time-reversal symmetry by solving the
// doubled-system constraint equations for (Psi, E, U); CQDB checks;
// anti-unitary extraction; special single-system correlator symmetries.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "htrs/tfd.hpp"

namespace htrs {

struct TrsSolution {
    TfdState tfd;
    double E = 0.0;
    Matrix U;  // M x M involutory unitary
    AntiUnitary T_extracted;
    std::string family;            // which candidate family produced U
    double residual_jump = 0.0;    // max_l ||Psi c_l^T - sum_k U_lk c_k Psi||
    double residual_sylvester = 0.0;  // ||Psi Heff^T - Heff Psi - E Psi||
    double residual_match = 0.0;      // rel. Frobenius Psi Psi^dag vs rho_ss
    double residual_invariance = 0.0;  // ||T rho T^-1 - rho||
};

struct DetectionReport {
    std::vector<TrsSolution> solutions;
    bool cqdb = false;
    double cqdb_residual = 0.0;
    int steady_state_multiplicity = 1;
    std::vector<std::string> searched_families;  // one entry per candidate U tried
    bool found() const { return !solutions.empty(); }
};

/// CQDB holds iff [H, rho_ss] vanishes (traceless-jump convention H).
std::pair<bool, double> check_cqdb(const LindbladModel& model, const DensityMatrix& rho_ss,
                                   const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Candidate U enumeration (structured search)

struct UEnumOptions {
    int psi_grid_points = 24;     // off-diagonal phase family resolution
    bool refine_grid = true;      // 1-d refinement on the kernel singular value
    std::vector<Matrix> user_candidates;
};

struct UCandidate {
    Matrix u;
    std::string family;
};

/// M = 1: {+1, -1}. M = 2: diagonal sign patterns plus the off-diagonal
/// phase family [[0, e^{-i psi}], [e^{i psi}, 0]] on a psi grid (refined
/// against the joint jump-constraint kernel when jumps are supplied).
/// General M: sign patterns plus pairwise swap-phase involutions.
std::vector<UCandidate> enumerate_candidate_U(int m, const std::vector<Operator>& jumps,
                                              const UEnumOptions& opts = {});

// ---------------------------------------------------------------------------
// Detection

struct DetectOptions {
    UEnumOptions enumeration;
    bool check_u_grid_solutions = true;  // keep every validated grid member
};

/// For each candidate U: (1) joint kernel of Psi -> Psi c_l^T - sum U_lk c_k Psi,
/// (2) eigenproblem of Psi -> Psi Heff^T - Heff Psi restricted to the kernel
/// (eigenvalues are candidate E), (3) validation against rho_ss, (4)
/// anti-unitary extraction. All validated solutions are reported.
DetectionReport detect(const LindbladModel& model, const SteadyStateResult& ss,
                       const DetectOptions& opts = {}, const Tolerances& tol = {});
DetectionReport detect(const LindbladModel& model, const DetectOptions& opts = {},
                       const Tolerances& tol = {});

/// V^T = rho^{-1/2} Psi, polar-unitarized; global phase fixed by making the
/// largest-magnitude element of V real positive. T = V K in the computational
/// canonical form.
AntiUnitary extract_antiunitary(const TfdState& tfd, const DensityMatrix& rho_ss,
                                const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Single-system correlator symmetries

/// Operand with a simple exchange action: powers of the annihilation operator
/// (J[a^m] = u^m a^m for single-photon-loss models) or H_eff (J = shift by E).
struct SimpleJOperand {
    enum class Kind { a_power, h_eff } kind;
    int power = 1;  // for a_power
    static SimpleJOperand a_pow(int m) { return {Kind::a_power, m}; }
    static SimpleJOperand h_eff() { return {Kind::h_eff, 1}; }
};

struct SpecialSymmetryResult {
    CorrelatorTrace trace;       // the two-branch swap correlator
    Eigen::VectorXd asym_times;  // positive times
    Vector asymmetry;            // C(t) - C(-t)
};

/// Swap correlator C(t>=0) = <X(t)Y>, C(t<0) = <Y(-t)X> for a pair with
/// simple exchange action; hidden TRS makes it time-symmetric. Throws if the
/// operands are outside the simple class for this model/solution.
SpecialSymmetryResult special_correlator_symmetry(const SpectralCorrelator& engine,
                                                  const TrsSolution& solution,
                                                  const SimpleJOperand& x,
                                                  const SimpleJOperand& y,
                                                  const Eigen::VectorXd& times,
                                                  bool connected = true);

/// The same swap correlator for arbitrary operators (no symmetry guarantee).
CorrelatorTrace swap_correlator(const SpectralCorrelator& engine, const Matrix& x,
                                const Matrix& y, const Eigen::VectorXd& times,
                                bool connected = true);

// ---------------------------------------------------------------------------
// CQDB refutation scans

struct AsymmetryFamilyEntry {
    double parameter = 0.0;  // family angle psi
    CorrelatorTrace correlator;
    Eigen::VectorXd asym_times;
    Vector asymmetry;
    double invariance_residual = 0.0;
    double max_abs_asymmetry = 0.0;
};

/// Two-sided correlator asymmetry for each member of a parameterized
/// anti-unitary family (App.-C style scans over psi).
std::vector<AsymmetryFamilyEntry> cqdb_correlation_scan(
    const LindbladModel& model, const std::vector<std::pair<double, AntiUnitary>>& family,
    const Operator& X, const Operator& Y, const Eigen::VectorXd& times,
    bool connected = true, const Tolerances& tol = {});

}  // namespace htrs
