// absorber.hpp — Cascaded system-plus-absorber construction: the doubled
// system whose pure dark state encodes the steady state by partial trace.

#pragma once

#include <vector>

#include "htrs/lindblad.hpp"

namespace htrs {

struct CascadedSystem {
    HilbertSpace space;  // doubled, A before B
    Operator H_AB;       // Hermitian; E excluded (recorded in E_shift)
    std::vector<Operator> collective_jumps;  // C_l = c_{l,A} - d_{l,B}
    double E_shift = 0.0;
    LindbladModel single_system;  // the model this absorber was built for

    /// Cascaded Lindblad model on the doubled space (for residual checks).
    LindbladModel as_model() const;
};

struct CascadedOptions {
    double memory_ceiling_bytes = 4.0 * (1ull << 30);
};

/// H_AB = H_A - H_B - (i/2) sum_l (c_{l,A}^dag d_{l,B} - h.c.), with
/// d_l = sum_k U_lk c_k. U must be an involutory unitary.
CascadedSystem build_cascaded(const LindbladModel& model, const Matrix& u, double e_shift,
                              const CascadedOptions& opts = {}, const Tolerances& tol = {});

struct DarkStateResult {
    std::vector<StateVector> states;
    std::vector<double> hamiltonian_residuals;  // ||(H_AB - E)|psi>|| per state
    std::vector<double> liouvillian_residuals;  // ||L_casc[|psi><psi|]||_F per state
    int jump_kernel_dim = 0;
};

/// Joint kernel of the collective jumps, then H_AB restricted to it;
/// eigenvectors whose eigenvalue matches E_shift are returned after
/// verification against the full cascaded Liouvillian.
DarkStateResult dark_state(const CascadedSystem& casc, const Tolerances& tol = {});

struct CqaResult {
    DensityMatrix rho;
    double residual = 0.0;  // ||L[rho]||_F under the single-system Liouvillian
    StateVector dark;
    int n_dark_states = 1;
};

/// rho = Tr_B |psi><psi| for the (unique) dark state; select picks one when
/// several exist (default -1 requires uniqueness).
CqaResult cqa_steady_state(const LindbladModel& model, const Matrix& u, double e_shift,
                           int select = -1, const CascadedOptions& opts = {},
                           const Tolerances& tol = {});

struct AbsorberReport {
    std::vector<double> jump_residuals;  // ||C_l |psi>||
    double hamiltonian_residual = 0.0;   // ||(H_AB - E_shift)|psi>||
    double liouvillian_residual = 0.0;   // ||L_casc[|psi><psi|]||_F
};

AbsorberReport verify_absorber(const CascadedSystem& casc, const StateVector& psi);

}  // namespace htrs
