// quantum_core.hpp — Hilbert-space bookkeeping, operator construction,
// vectorization, partial traces, matrix functions, Wigner rendering.

#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace htrs {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr cplx I_UNIT{0.0, 1.0};

/// Thrown when a numerical procedure fails (rank deficiency, missing null
/// space, non-convergence). Precondition violations throw std::invalid_argument.
struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Default tolerances for validation and solvers. Every operation that
/// checks an invariant takes one of these (defaulted) so callers can loosen
/// or tighten per call.
struct Tolerances {
    double herm = 1e-10;        // Hermiticity, relative to norm
    double trace = 1e-10;       // trace normalization
    double psd = 1e-9;          // allowed negative eigenvalue magnitude
    double rank = 1e-12;        // full-rank threshold on smallest eigenvalue
    double degeneracy = 1e-10;  // relative gap between adjacent spectrum points
    double null_rel = 1e-10;    // null-space singular value cut, relative to sigma_max
    double match = 1e-8;        // Psi Psi^dag vs rho_ss, relative Frobenius
    double energy = 1e-8;       // |Im E| acceptance, relative to ||H_eff||
    double solution = 1e-8;     // constraint-equation residuals
    double cqdb = 1e-8;         // commutator test threshold
};

// ---------------------------------------------------------------------------
// Domain types

struct HilbertSpace {
    std::vector<int> subsystem_dims;
    int total_dim = 0;

    HilbertSpace() = default;
    explicit HilbertSpace(std::vector<int> dims);

    /// Single factor of dimension d.
    static HilbertSpace single(int d) { return HilbertSpace({d}); }
    /// A-before-B doubled space, both factors of dimension d.
    static HilbertSpace doubled(int d) { return HilbertSpace({d, d}); }

    int factors() const { return static_cast<int>(subsystem_dims.size()); }
    bool operator==(const HilbertSpace& o) const {
        return subsystem_dims == o.subsystem_dims;
    }
};

struct Operator {
    HilbertSpace space;
    Matrix matrix;

    Operator() = default;
    Operator(HilbertSpace s, Matrix m);

    int dim() const { return space.total_dim; }
    Operator adjoint() const { return {space, matrix.adjoint()}; }
};

/// Density matrix; validate() enforces Hermiticity, unit trace and
/// positivity at the given tolerances.
struct DensityMatrix {
    Operator op;

    const Matrix& matrix() const { return op.matrix; }
    const HilbertSpace& space() const { return op.space; }
    int dim() const { return op.dim(); }

    /// Hermitize, renormalize the trace, and check invariants.
    static DensityMatrix validated(Operator o, const Tolerances& tol = {});
};

struct StateVector {
    HilbertSpace space;
    Vector amplitudes;

    StateVector() = default;
    StateVector(HilbertSpace s, Vector v, const Tolerances& tol = {});

    int dim() const { return space.total_dim; }
    /// |psi><psi| as a density matrix.
    DensityMatrix projector() const;
};

// ---------------------------------------------------------------------------
// Elementary operators

/// Truncated bosonic lowering operator, entries sqrt(n) on the first
/// superdiagonal. n_max is the Fock-space dimension (>= 2).
Operator annihilation_op(int n_max);

/// 2x2 Paulis in the sigma_z basis, ordering |e> = index 0, |g> = index 1,
/// so sigma_z|e> = +|e> and sigma_minus|e> = |g>.
struct PauliSet {
    Operator x, y, z, plus, minus;
};
PauliSet pauli_ops();

Operator identity_op(const HilbertSpace& space);

/// Tensor-embed op on the given factor of target (identities elsewhere),
/// ordering A (factor 0) before B (factor 1).
Operator embed(const Operator& op, int subsystem_index, const HilbertSpace& target);

/// Reduced density matrix on the kept factor.
DensityMatrix partial_trace(const DensityMatrix& rho, int keep, const Tolerances& tol = {});
/// Raw-matrix variant; `dims` are the factor dimensions of the product space.
Matrix partial_trace(const Matrix& m, const std::vector<int>& dims, int keep);

// ---------------------------------------------------------------------------
// Vectorization (column-stacking: |i><j| -> index i + j*d)

Vector vectorize(const Operator& op);
Vector vectorize(const Matrix& m);
Operator devectorize(const Vector& v, const HilbertSpace& space);
Matrix devectorize_matrix(const Vector& v);

// ---------------------------------------------------------------------------
// Matrix functions

/// Principal square root of a PSD matrix via eigendecomposition.
Matrix psd_sqrt(const Matrix& m);
/// Inverse principal square root; throws NumericsError if the smallest
/// eigenvalue is below tol_rank (reporting it).
Matrix psd_inv_sqrt(const Matrix& m, double tol_rank = 1e-12);

Operator matrix_sqrt(const DensityMatrix& rho);
Operator matrix_inv_sqrt(const DensityMatrix& rho, const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Wigner function (displaced parity: W(alpha) = (2/pi) Tr[rho D(a) P D(-a)])

struct WignerGrid {
    Eigen::VectorXd x;  // first quadrature axis
    Eigen::VectorXd p;  // second quadrature axis
    static WignerGrid square(double extent, double spacing);
};

struct WignerResult {
    Eigen::VectorXd x, p;
    Eigen::MatrixXd w;  // w(i, j) = W(x[i], p[j])
    bool truncation_warning = false;  // grid reaches |alpha|^2 > n_max/2
    /// Riemann sum of W over the grid (≈ 1 for a grid covering the state).
    double integral(double dx, double dp) const;
};

WignerResult wigner(const DensityMatrix& rho, const WignerGrid& grid);
WignerResult wigner(const StateVector& psi, const WignerGrid& grid);

// ---------------------------------------------------------------------------
// Small helpers used throughout

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

inline double rel_fro(const Matrix& a, const Matrix& b) {
    double scale = std::max(a.norm(), b.norm());
    return scale > 0 ? (a - b).norm() / scale : 0.0;
}

Matrix kron(const Matrix& a, const Matrix& b);

/// Eigenvalues of a Hermitian matrix, ascending.
Eigen::VectorXd herm_eigenvalues(const Matrix& m);

}  // namespace htrs
