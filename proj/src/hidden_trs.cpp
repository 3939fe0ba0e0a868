#include "htrs/hidden_trs.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace htrs {

std::pair<bool, double> check_cqdb(const LindbladModel& model, const DensityMatrix& rho_ss,
                                   const Tolerances& tol) {
    const Matrix& h = model.H.matrix;
    const Matrix& r = rho_ss.matrix();
    const double scale = std::max(h.norm() * r.norm(), 1e-300);
    const double res = commutator(h, r).norm() / scale;
    return {res < tol.cqdb, res};
}

// ---------------------------------------------------------------------------

namespace {

// Stacked matrix of the maps Psi -> Psi c_l^T - sum_k U_lk c_k Psi in the
// column-stacking convention.
Matrix jump_constraint_matrix(const std::vector<Operator>& jumps, const Matrix& u) {
    const int m = static_cast<int>(jumps.size());
    const int d = jumps.empty() ? 0 : jumps[0].dim();
    const Matrix id = Matrix::Identity(d, d);
    Matrix stacked(m * d * d, d * d);
    for (int l = 0; l < m; ++l) {
        // vec(Psi c_l^T) = (c_l (x) I) vec(Psi); vec(c_k Psi) = (I (x) c_k) vec(Psi)
        Matrix block = kron(jumps[l].matrix, id);
        for (int k = 0; k < m; ++k) block -= u(l, k) * kron(id, jumps[k].matrix);
        stacked.middleRows(l * d * d, d * d) = block;
    }
    return stacked;
}

struct KernelResult {
    Matrix basis;  // d^2 x k, orthonormal columns
    double sigma_min = 0.0;
    double sigma_max = 0.0;
};

KernelResult joint_jump_kernel(const std::vector<Operator>& jumps, const Matrix& u,
                               double null_rel) {
    Matrix stacked = jump_constraint_matrix(jumps, u);
    Eigen::BDCSVD<Matrix> svd(stacked, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const int n = static_cast<int>(sv.size());
    KernelResult out;
    out.sigma_max = sv(0);
    out.sigma_min = sv(n - 1);
    const double cut = null_rel * sv(0);
    int k = 0;
    for (int i = n - 1; i >= 0 && sv(i) < cut; --i) ++k;
    if (k > 0) out.basis = svd.matrixV().rightCols(k);
    return out;
}

double involution_defect(const Matrix& u) {
    const Matrix id = Matrix::Identity(u.rows(), u.cols());
    return std::max((u * u - id).norm(), (u * u.adjoint() - id).norm());
}

}  // namespace

std::vector<UCandidate> enumerate_candidate_U(int m, const std::vector<Operator>& jumps,
                                              const UEnumOptions& opts) {
    if (m < 1) throw std::invalid_argument("enumerate_candidate_U: M must be >= 1");
    std::vector<UCandidate> out;

    // Diagonal sign patterns.
    for (int mask = 0; mask < (1 << m); ++mask) {
        Matrix u = Matrix::Identity(m, m);
        std::string name = "diag(";
        for (int i = 0; i < m; ++i) {
            const double s = (mask >> i) & 1 ? -1.0 : 1.0;
            u(i, i) = s;
            name += (s > 0 ? "+" : "-");
        }
        out.push_back({std::move(u), name + ")"});
    }

    // Pairwise swap-phase involutions [[0, e^{-i psi}], [e^{i psi}, 0]] on a
    // psi grid, with optional refinement of near-kernel grid points.
    if (m >= 2) {
        auto swap_u = [&](int i, int j, double psi) {
            Matrix u = Matrix::Identity(m, m);
            u(i, i) = u(j, j) = 0.0;
            u(i, j) = std::exp(-I_UNIT * psi);
            u(j, i) = std::exp(I_UNIT * psi);
            return u;
        };
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) {
                std::vector<double> psis(opts.psi_grid_points);
                for (int g = 0; g < opts.psi_grid_points; ++g)
                    psis[g] = 2.0 * M_PI * g / opts.psi_grid_points;

                if (opts.refine_grid && !jumps.empty()) {
                    // Refine psi by golden-section on the smallest singular
                    // value of the joint constraint map.
                    auto sigma_min = [&](double psi) {
                        Matrix stacked = jump_constraint_matrix(jumps, swap_u(i, j, psi));
                        Eigen::BDCSVD<Matrix> svd(stacked);
                        return svd.singularValues().minCoeff();
                    };
                    std::vector<double> refined;
                    const double step = 2.0 * M_PI / opts.psi_grid_points;
                    for (double psi : psis) {
                        double s0 = sigma_min(psi);
                        double sl = sigma_min(psi - 0.25 * step);
                        double sr = sigma_min(psi + 0.25 * step);
                        if (s0 < sl && s0 < sr && s0 < 0.1) {
                            double lo = psi - 0.25 * step, hi = psi + 0.25 * step;
                            const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
                            double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
                            double f1 = sigma_min(x1), f2 = sigma_min(x2);
                            for (int it = 0; it < 40 && hi - lo > 1e-10; ++it) {
                                if (f1 < f2) {
                                    hi = x2; x2 = x1; f2 = f1;
                                    x1 = hi - gr * (hi - lo); f1 = sigma_min(x1);
                                } else {
                                    lo = x1; x1 = x2; f1 = f2;
                                    x2 = lo + gr * (hi - lo); f2 = sigma_min(x2);
                                }
                            }
                            refined.push_back(0.5 * (lo + hi));
                        }
                    }
                    psis.insert(psis.end(), refined.begin(), refined.end());
                }
                for (double psi : psis)
                    out.push_back({swap_u(i, j, psi),
                                   "swap(" + std::to_string(i) + "," + std::to_string(j) +
                                       ",psi=" + std::to_string(psi) + ")"});
            }
    }

    for (const auto& u : opts.user_candidates) {
        if (u.rows() != m || u.cols() != m)
            throw std::invalid_argument("enumerate_candidate_U: user candidate wrong size");
        out.push_back({u, "user"});
    }
    return out;
}

// ---------------------------------------------------------------------------

AntiUnitary extract_antiunitary(const TfdState& tfd, const DensityMatrix& rho_ss,
                                const Tolerances& tol) {
    Matrix vt = psd_inv_sqrt(rho_ss.matrix(), tol.rank) * tfd.psi;
    Matrix v_raw = vt.transpose();
    Eigen::BDCSVD<Matrix> svd(v_raw, Eigen::ComputeThinU | Eigen::ComputeThinV);
    // Unitarity sanity before polar projection
    const auto& sv = svd.singularValues();
    const double dev =
        std::max(std::abs(sv.maxCoeff() - 1.0), std::abs(sv.minCoeff() - 1.0));
    if (dev > 1e-4)
        throw NumericsError("extract_antiunitary: Psi is not rho^{1/2} x unitary "
                            "(singular value deviation " + std::to_string(dev) + ")");
    Matrix v = svd.matrixU() * svd.matrixV().adjoint();
    Eigen::Index imax = 0, jmax = 0;
    v.cwiseAbs().maxCoeff(&imax, &jmax);
    const cplx pivot = v(imax, jmax);
    v *= std::conj(pivot) / std::abs(pivot);
    return AntiUnitary::k_z(Operator(tfd.rho_ss.space(), std::move(v)), tol);
}

namespace {

TfdState tfd_from_psi(const Matrix& psi, const DensityMatrix& rho_ss) {
    TfdState t;
    t.psi = psi / psi.norm();
    t.rho_ss = rho_ss;
    return t;
}

}  // namespace

DetectionReport detect(const LindbladModel& model, const SteadyStateResult& ss,
                       const DetectOptions& opts, const Tolerances& tol) {
    DetectionReport report;
    report.steady_state_multiplicity = ss.multiplicity;
    auto [cqdb_ok, cqdb_res] = check_cqdb(model, ss.rho, tol);
    report.cqdb = cqdb_ok;
    report.cqdb_residual = cqdb_res;

    const int m = model.num_jumps();
    const int d = model.dim();
    const Matrix heff = effective_hamiltonian(model).matrix;
    const double heff_scale = std::max(heff.norm(), 1e-300);
    const Matrix rho = ss.rho.matrix();

    auto candidates = enumerate_candidate_U(m, model.jumps, opts.enumeration);

    for (const auto& cand : candidates) {
        report.searched_families.push_back(cand.family);
        if (involution_defect(cand.u) > 1e-8) continue;

        KernelResult ker = joint_jump_kernel(model.jumps, cand.u, tol.null_rel * 10);
        if (ker.basis.cols() == 0) continue;
        const int k = static_cast<int>(ker.basis.cols());

        // Sylvester map restricted to the kernel: S[Psi] = Psi Heff^T - Heff Psi.
        const Matrix id = Matrix::Identity(d, d);
        const Matrix s_full = kron(heff, id) - kron(id, heff);
        const Matrix s_on_kernel = s_full * ker.basis;          // d^2 x k
        const Matrix s_restricted = ker.basis.adjoint() * s_on_kernel;  // k x k

        Eigen::ComplexEigenSolver<Matrix> es(s_restricted);
        if (es.info() != Eigen::Success) continue;

        for (int j = 0; j < k; ++j) {
            const cplx e = es.eigenvalues()(j);
            if (std::abs(e.imag()) > tol.energy * heff_scale) continue;

            Vector psi_vec = ker.basis * es.eigenvectors().col(j);
            Matrix psi = devectorize_matrix(psi_vec);
            psi /= psi.norm();

            TrsSolution sol;
            sol.E = e.real();
            sol.U = cand.u;
            sol.family = cand.family;

            // Full (unprojected) residuals of the constraint equations.
            double rj = 0.0;
            for (int l = 0; l < m; ++l) {
                Matrix r = psi * model.jumps[l].matrix.transpose();
                for (int kk = 0; kk < m; ++kk)
                    r -= cand.u(l, kk) * model.jumps[kk].matrix * psi;
                rj = std::max(rj, r.norm());
            }
            sol.residual_jump = rj;
            sol.residual_sylvester =
                (psi * heff.transpose() - heff * psi - sol.E * psi).norm();
            sol.residual_match = rel_fro(psi * psi.adjoint(), rho);

            const double jump_scale = std::max(1.0, model.jumps.empty() ? 1.0
                                               : model.jumps[0].matrix.norm());
            if (sol.residual_jump > tol.solution * jump_scale * 10) continue;
            if (sol.residual_sylvester > tol.solution * heff_scale * 10) continue;
            if (sol.residual_match > tol.match) continue;

            sol.tfd = tfd_from_psi(psi, ss.rho);
            try {
                sol.T_extracted = extract_antiunitary(sol.tfd, ss.rho, tol);
            } catch (const NumericsError&) {
                continue;  // Psi not of the purification form
            }
            sol.tfd.T = sol.T_extracted;
            sol.residual_invariance = check_trs_invariance(ss.rho, sol.T_extracted);
            if (sol.residual_invariance > 100 * tol.solution) continue;

            // Drop exact duplicates (same U family member found twice via
            // grid refinement).
            bool dup = false;
            for (const auto& prev : report.solutions) {
                if ((prev.U - sol.U).norm() < 1e-9 &&
                    std::abs(std::abs((prev.tfd.psi.adjoint() * sol.tfd.psi).trace()) -
                             1.0) < 1e-9)
                    dup = true;
            }
            if (!dup) report.solutions.push_back(std::move(sol));
        }
    }
    return report;
}

DetectionReport detect(const LindbladModel& model, const DetectOptions& opts,
                       const Tolerances& tol) {
    SteadyStateResult ss = steady_state(model, tol);
    if (ss.multiplicity > 1)
        throw NumericsError("detect: degenerate steady space (multiplicity " +
                            std::to_string(ss.multiplicity) +
                            "); select a steady state and call the explicit overload");
    return detect(model, ss, opts, tol);
}

// ---------------------------------------------------------------------------

CorrelatorTrace swap_correlator(const SpectralCorrelator& engine, const Matrix& x,
                                const Matrix& y, const Eigen::VectorXd& times,
                                bool connected) {
    // C(t>=0) = <X(t)Y>, C(t<0) = <Y(-t)X>
    return [&] {
        CorrelatorTrace trace;
        trace.times = times;
        std::vector<double> neg, pos;
        for (Eigen::Index i = 0; i < times.size(); ++i)
            (times(i) < 0 ? neg : pos).push_back(times(i));
        Eigen::VectorXd tneg(neg.size()), tpos(pos.size());
        for (size_t i = 0; i < neg.size(); ++i) tneg(i) = -neg[neg.size() - 1 - i];
        for (size_t i = 0; i < pos.size(); ++i) tpos(i) = pos[i];
        trace.values.resize(times.size());
        if (tpos.size() > 0) {
            Vector v = engine.forward(x, y, tpos, connected);
            trace.values.tail(tpos.size()) = v;
        }
        if (tneg.size() > 0) {
            Vector v = engine.forward(y, x, tneg, connected);
            for (Eigen::Index i = 0; i < tneg.size(); ++i)
                trace.values(tneg.size() - 1 - i) = v(i);
        }
        return trace;
    }();
}

namespace {

Matrix operand_matrix(const SimpleJOperand& o, const LindbladModel& model) {
    const int d = model.dim();
    if (o.kind == SimpleJOperand::Kind::h_eff) return effective_hamiltonian(model).matrix;
    Matrix a = annihilation_op(d).matrix;
    Matrix out = Matrix::Identity(d, d);
    for (int i = 0; i < o.power; ++i) out = out * a;
    return out;
}

}  // namespace

SpecialSymmetryResult special_correlator_symmetry(const SpectralCorrelator& engine,
                                                  const TrsSolution& solution,
                                                  const SimpleJOperand& x,
                                                  const SimpleJOperand& y,
                                                  const Eigen::VectorXd& times,
                                                  bool connected) {
    const LindbladModel& model = engine.model();
    // The simple exchange action J[a^m] = u^m a^m needs a single-photon-loss
    // bosonic model whose detected U gives J[a] = u a.
    for (const auto& o : {x, y}) {
        if (o.kind == SimpleJOperand::Kind::a_power) {
            if (model.space.factors() != 1 || solution.U.rows() != 1)
                throw std::invalid_argument(
                    "special_correlator_symmetry: a^m operand needs a single-mode, "
                    "single-jump model (J[a] = u a); got U of size " +
                    std::to_string(solution.U.rows()));
        }
    }
    SpecialSymmetryResult out;
    out.trace = swap_correlator(engine, operand_matrix(x, model), operand_matrix(y, model),
                                times, connected);
    std::vector<double> pos;
    for (Eigen::Index i = 0; i < times.size(); ++i)
        if (times(i) > 0) pos.push_back(times(i));
    out.asym_times.resize(pos.size());
    out.asymmetry.resize(pos.size());
    // pair each positive time with its mirror by interpolation-free exact
    // match; requires a symmetric grid for nonzero asymmetry values
    for (size_t i = 0; i < pos.size(); ++i) {
        out.asym_times(i) = pos[i];
        cplx c_plus = 0, c_minus = 0;
        bool found_p = false, found_m = false;
        for (Eigen::Index j = 0; j < times.size(); ++j) {
            if (std::abs(times(j) - pos[i]) < 1e-12 * std::max(1.0, std::abs(pos[i]))) {
                c_plus = out.trace.values(j);
                found_p = true;
            }
            if (std::abs(times(j) + pos[i]) < 1e-12 * std::max(1.0, std::abs(pos[i]))) {
                c_minus = out.trace.values(j);
                found_m = true;
            }
        }
        if (!found_p || !found_m)
            throw std::invalid_argument(
                "special_correlator_symmetry: times must be symmetric about 0");
        out.asymmetry(i) = c_plus - c_minus;
    }
    return out;
}

std::vector<AsymmetryFamilyEntry> cqdb_correlation_scan(
    const LindbladModel& model, const std::vector<std::pair<double, AntiUnitary>>& family,
    const Operator& X, const Operator& Y, const Eigen::VectorXd& times, bool connected,
    const Tolerances& tol) {
    auto engine = SpectralCorrelator::make(model, tol);
    std::vector<AsymmetryFamilyEntry> out;
    out.reserve(family.size());
    for (const auto& [param, t] : family) {
        AsymmetryFamilyEntry e;
        e.parameter = param;
        e.invariance_residual = check_trs_invariance(engine.steady().rho, t);
        e.correlator.times = times;
        e.correlator.values =
            two_sided_values(engine, X.matrix, Y.matrix, t.conjugate_op(X.matrix),
                             t.conjugate_op(Y.matrix), times, connected);
        std::vector<double> pos;
        for (Eigen::Index i = 0; i < times.size(); ++i)
            if (times(i) > 0) pos.push_back(times(i));
        e.asym_times.resize(pos.size());
        e.asymmetry.resize(pos.size());
        for (size_t i = 0; i < pos.size(); ++i) {
            e.asym_times(i) = pos[i];
            cplx cp = 0, cm = 0;
            for (Eigen::Index j = 0; j < times.size(); ++j) {
                if (std::abs(times(j) - pos[i]) < 1e-12) cp = e.correlator.values(j);
                if (std::abs(times(j) + pos[i]) < 1e-12) cm = e.correlator.values(j);
            }
            e.asymmetry(i) = cp - cm;
        }
        e.max_abs_asymmetry =
            e.asymmetry.size() ? e.asymmetry.cwiseAbs().maxCoeff() : 0.0;
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace htrs
