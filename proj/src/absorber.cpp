#include "htrs/absorber.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace htrs {

LindbladModel CascadedSystem::as_model() const {
    std::vector<Operator> jumps = collective_jumps;
    return LindbladModel::make(H_AB, std::move(jumps));
}

CascadedSystem build_cascaded(const LindbladModel& model, const Matrix& u, double e_shift,
                              const CascadedOptions& opts, const Tolerances& tol) {
    const int m = model.num_jumps();
    if (u.rows() != m || u.cols() != m)
        throw std::invalid_argument("build_cascaded: U size does not match jump count");
    const Matrix id_m = Matrix::Identity(m, m);
    if ((u * u - id_m).norm() > 1e-8 || (u * u.adjoint() - id_m).norm() > 1e-8)
        throw std::invalid_argument("build_cascaded: U is not an involutory unitary");

    const int d = model.dim();
    const double bytes = 16.0 * double(d) * d * double(d) * d;
    if (bytes > opts.memory_ceiling_bytes)
        throw std::invalid_argument("build_cascaded: doubled space needs " +
                                    std::to_string(bytes / (1ull << 30)) +
                                    " GiB, above the ceiling");

    CascadedSystem casc;
    casc.space = HilbertSpace::doubled(d);
    casc.single_system = model;
    casc.E_shift = e_shift;

    std::vector<Matrix> d_ops(m);
    for (int l = 0; l < m; ++l) {
        Matrix dl = Matrix::Zero(d, d);
        for (int k = 0; k < m; ++k) dl += u(l, k) * model.jumps[k].matrix;
        d_ops[l] = std::move(dl);
    }

    const Matrix id = Matrix::Identity(d, d);
    Matrix h_ab = kron(model.H.matrix, id) - kron(id, model.H.matrix);
    for (int l = 0; l < m; ++l) {
        const Matrix& c = model.jumps[l].matrix;
        Matrix coupling = kron(c.adjoint(), d_ops[l]);
        h_ab -= 0.5 * I_UNIT * (coupling - coupling.adjoint());
    }
    casc.H_AB = Operator(casc.space, 0.5 * (h_ab + h_ab.adjoint()));

    for (int l = 0; l < m; ++l) {
        const Matrix& c = model.jumps[l].matrix;
        casc.collective_jumps.emplace_back(casc.space,
                                           Matrix(kron(c, id) - kron(id, d_ops[l])));
    }
    if ((casc.H_AB.matrix - casc.H_AB.matrix.adjoint()).norm() >
        tol.herm * std::max(1.0, casc.H_AB.matrix.norm()))
        throw NumericsError("build_cascaded: H_AB not Hermitian");
    return casc;
}

DarkStateResult dark_state(const CascadedSystem& casc, const Tolerances& tol) {
    const int n = casc.space.total_dim;
    const int m = static_cast<int>(casc.collective_jumps.size());

    DarkStateResult out;
    Matrix kernel;
    if (m == 0) {
        kernel = Matrix::Identity(n, n);
        out.jump_kernel_dim = n;
    } else {
        Matrix stacked(m * n, n);
        for (int l = 0; l < m; ++l)
            stacked.middleRows(l * n, n) = casc.collective_jumps[l].matrix;
        Eigen::BDCSVD<Matrix> svd(stacked, Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        const double cut = 10 * tol.null_rel * std::max(sv(0), 1e-300);
        int k = 0;
        for (int i = static_cast<int>(sv.size()) - 1; i >= 0 && sv(i) < cut; --i) ++k;
        out.jump_kernel_dim = k;
        if (k == 0) return out;  // no dark state for this (U, E)
        kernel = svd.matrixV().rightCols(k);
    }

    // H_AB compressed to the jump kernel; Hermitian, so the restricted
    // problem is self-adjoint.
    Matrix h_k = kernel.adjoint() * (casc.H_AB.matrix * kernel);
    h_k = Matrix(0.5 * (h_k + h_k.adjoint()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(h_k);
    const double h_scale = std::max(casc.H_AB.matrix.norm(), 1e-300);

    LindbladModel casc_model = casc.as_model();
    for (int j = 0; j < es.eigenvalues().size(); ++j) {
        if (std::abs(es.eigenvalues()(j) - casc.E_shift) > tol.energy * h_scale) continue;
        Vector v = kernel * es.eigenvectors().col(j);
        v /= v.norm();
        // Verify against the full operators (the compression alone is not
        // sufficient when H_AB does not preserve the kernel).
        const double h_res = ((casc.H_AB.matrix * v) - casc.E_shift * v).norm();
        if (h_res > 100 * tol.energy * h_scale) continue;
        Matrix proj = v * v.adjoint();
        const double l_res = apply_liouvillian(casc_model, proj).norm();
        if (l_res > 1e-8 * std::max(1.0, h_scale)) continue;
        out.states.emplace_back(casc.space, v);
        out.hamiltonian_residuals.push_back(h_res);
        out.liouvillian_residuals.push_back(l_res);
    }
    return out;
}

CqaResult cqa_steady_state(const LindbladModel& model, const Matrix& u, double e_shift,
                           int select, const CascadedOptions& opts, const Tolerances& tol) {
    CascadedSystem casc = build_cascaded(model, u, e_shift, opts, tol);
    DarkStateResult dark = dark_state(casc, tol);
    if (dark.states.empty())
        throw NumericsError("cqa_steady_state: no dark state (jump kernel dim " +
                            std::to_string(dark.jump_kernel_dim) + ")");
    int pick = select;
    if (pick < 0) {
        if (dark.states.size() > 1)
            throw NumericsError("cqa_steady_state: " + std::to_string(dark.states.size()) +
                                " dark states; caller must select one");
        pick = 0;
    }
    if (pick >= static_cast<int>(dark.states.size()))
        throw std::invalid_argument("cqa_steady_state: selection out of range");

    const StateVector& psi = dark.states[pick];
    DensityMatrix rho = partial_trace(psi.projector(), 0, tol);
    CqaResult out{rho, apply_liouvillian(model, rho.matrix()).norm(), psi,
                  static_cast<int>(dark.states.size())};
    return out;
}

AbsorberReport verify_absorber(const CascadedSystem& casc, const StateVector& psi) {
    AbsorberReport rep;
    for (const auto& c : casc.collective_jumps)
        rep.jump_residuals.push_back((c.matrix * psi.amplitudes).norm());
    rep.hamiltonian_residual =
        (casc.H_AB.matrix * psi.amplitudes - casc.E_shift * psi.amplitudes).norm();
    Matrix proj = psi.amplitudes * psi.amplitudes.adjoint();
    rep.liouvillian_residual = apply_liouvillian(casc.as_model(), proj).norm();
    return rep;
}

}  // namespace htrs
