// htrs — command-line front end: steady states, spectra, hidden-TRS
// detection, correlation traces, asymmetry scans, absorber roundtrips and
// Wigner grids, from JSON configs.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "htrs/absorber.hpp"
#include "htrs/asymmetry.hpp"
#include "htrs/config.hpp"
#include "htrs/hidden_trs.hpp"

namespace {

using namespace htrs;
using cli::ConfigError;
using cli::RunConfig;
using cli::fmt_g17;
using nlohmann::json;

void write_json(const std::string& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    out << doc.dump(2) << "\n";
}

AntiUnitary resolve_trs(const RunConfig& cfg, const LindbladModel& model,
                        const cli::TrsSpec& spec) {
    switch (spec.kind) {
        case cli::TrsSpec::Kind::qubit_family:
        case cli::TrsSpec::Kind::hidden: {
            if (cfg.model.type != cli::ModelConfig::Type::qubit)
                throw ConfigError("trs: qubit_family/hidden requires a qubit model");
            const double bp = cfg.model.qubit.b_prime();
            const double psi =
                spec.kind == cli::TrsSpec::Kind::hidden ? M_PI : spec.psi;
            return qubit_trs_family(bp, psi);
        }
        case cli::TrsSpec::Kind::conjugation:
            return AntiUnitary::conjugation(model.space);
        case cli::TrsSpec::Kind::detected: {
            DetectionReport rep = detect(model, {}, cfg.tol);
            if (!rep.found())
                throw NumericsError("trs: detection found no hidden TRS for this model");
            if (spec.index < 0 || spec.index >= static_cast<int>(rep.solutions.size()))
                throw ConfigError("trs.index out of range (found " +
                                  std::to_string(rep.solutions.size()) + " solutions)");
            return rep.solutions[spec.index].T_extracted;
        }
    }
    throw ConfigError("trs: unresolved specification");
}

int cmd_steady_state(const RunConfig& cfg, const std::string& out_path) {
    std::string warn;
    LindbladModel model = cfg.model.build(&warn);
    if (!warn.empty()) std::cerr << "warning: " << warn << "\n";
    SteadyStateResult ss = steady_state(model, cfg.tol);
    json doc{{"rho", cli::matrix_json(ss.rho.matrix())},
             {"residual", ss.residual},
             {"multiplicity", ss.multiplicity}};
    write_json(out_path, doc);
    return 0;
}

int cmd_spectrum(const RunConfig& cfg, const std::string& out_path) {
    LindbladModel model = cfg.model.build();
    LiouvillianSpectrum sp = spectrum(model, cfg.tol);
    json evs = json::array();
    for (int k = 0; k < sp.size(); ++k) evs.push_back(cli::complex_json(sp.eigenvalues(k)));
    json doc{{"eigenvalues", evs},
             {"zero_index", sp.zero_index},
             {"condition", sp.condition},
             {"ill_conditioned", sp.ill_conditioned},
             {"max_re", sp.max_re}};
    write_json(out_path, doc);
    return 0;
}

int cmd_detect_trs(const RunConfig& cfg, const std::string& out_path) {
    LindbladModel model = cfg.model.build();
    cli::DetectOptionsConfig dopts = cfg.detect();
    DetectOptions opts;
    opts.enumeration.psi_grid_points = dopts.psi_grid_points;
    opts.enumeration.refine_grid = dopts.refine;

    SteadyStateResult ss = steady_state(model, cfg.tol);
    DetectionReport rep = detect(model, ss, opts, cfg.tol);

    json sols = json::array();
    for (const auto& s : rep.solutions) {
        sols.push_back(json{{"E", s.E},
                            {"U", cli::matrix_json(s.U)},
                            {"family", s.family},
                            {"T_V", cli::matrix_json(s.T_extracted.canonical_v())},
                            {"psi_matrix", cli::matrix_json(s.tfd.psi)},
                            {"residual_jump", s.residual_jump},
                            {"residual_sylvester", s.residual_sylvester},
                            {"residual_match", s.residual_match},
                            {"residual_invariance", s.residual_invariance}});
    }
    json doc{{"solutions", sols},
             {"cqdb", rep.cqdb},
             {"cqdb_residual", rep.cqdb_residual},
             {"steady_state_multiplicity", rep.steady_state_multiplicity},
             {"searched_families", rep.searched_families}};
    write_json(out_path, doc);
    return 0;
}

cli::CsvWriter trace_csv(const CorrelatorTrace& trace) {
    cli::CsvWriter csv;
    csv.header = {"t", "re", "im"};
    for (Eigen::Index i = 0; i < trace.times.size(); ++i)
        csv.rows.push_back({fmt_g17(trace.times(i)), fmt_g17(trace.values(i).real()),
                            fmt_g17(trace.values(i).imag())});
    return csv;
}

int cmd_correlator(const RunConfig& cfg, const std::string& out_path) {
    std::string warn;
    LindbladModel model = cfg.model.build(&warn);
    if (!warn.empty()) std::cerr << "warning: " << warn << "\n";
    cli::CorrelatorOptions opts = cfg.correlator();
    const Eigen::VectorXd times = opts.times.grid();

    using Variant = cli::CorrelatorOptions::Variant;
    if (opts.variant == Variant::single) {
        Matrix x = cli::parse_operator(opts.x, model, cfg.model.type);
        Matrix y = cli::parse_operator(opts.y, model, cfg.model.type);
        CorrelatorTrace trace = correlator(model, Operator(model.space, x),
                                           Operator(model.space, y), times,
                                           opts.connected, cfg.tol);
        trace_csv(trace).write(out_path);
        return 0;
    }
    if (opts.variant == Variant::two_sided) {
        Matrix x = cli::parse_operator(opts.x, model, cfg.model.type);
        Matrix y = cli::parse_operator(opts.y, model, cfg.model.type);
        AntiUnitary t = resolve_trs(cfg, model, opts.trs);
        CorrelatorTrace trace =
            two_sided_correlator(model, Operator(model.space, x), Operator(model.space, y),
                                 t, times, opts.connected, cfg.tol);
        if (!trace.warning.empty()) std::cerr << "warning: " << trace.warning << "\n";
        trace_csv(trace).write(out_path);
        return 0;
    }
    if (opts.variant == Variant::tfd) {
        Matrix x = cli::parse_operator(opts.x, model, cfg.model.type);
        Matrix y = cli::parse_operator(opts.y, model, cfg.model.type);
        AntiUnitary t = resolve_trs(cfg, model, opts.trs);
        auto engine = SpectralCorrelator::make(model, cfg.tol);
        TfdState tfd = build_tfd(engine.steady().rho, t, cfg.tol);
        TfdCorrelator tc = tfd_correlator(engine, tfd, Operator(model.space, x),
                                          Operator(model.space, y), times, opts.connected);
        cli::CsvWriter csv;
        csv.header = {"t", "re", "im", "re_cl", "im_cl", "re_en", "im_en"};
        for (Eigen::Index i = 0; i < tc.times.size(); ++i)
            csv.rows.push_back({fmt_g17(tc.times(i)), fmt_g17(tc.total(i).real()),
                                fmt_g17(tc.total(i).imag()), fmt_g17(tc.classical(i).real()),
                                fmt_g17(tc.classical(i).imag()),
                                fmt_g17(tc.entanglement(i).real()),
                                fmt_g17(tc.entanglement(i).imag())});
        csv.write(out_path);
        return 0;
    }
    // special: swap correlator for a pair with simple exchange action
    auto parse_simple = [](const std::string& token) {
        if (token == "H_eff") return SimpleJOperand::h_eff();
        if (token == "a") return SimpleJOperand::a_pow(1);
        if (token.rfind("a^", 0) == 0) {
            try {
                return SimpleJOperand::a_pow(std::stoi(token.substr(2)));
            } catch (...) {
            }
        }
        throw ConfigError("correlator.special: operand \"" + token +
                          "\" is not in the simple exchange class (use a, a^m, H_eff)");
    };
    SimpleJOperand x = parse_simple(opts.x), y = parse_simple(opts.y);
    DetectionReport rep = detect(model, {}, cfg.tol);
    if (!rep.found())
        throw NumericsError("correlator.special: no hidden TRS detected for this model");
    auto engine = SpectralCorrelator::make(model, cfg.tol);
    SpecialSymmetryResult res = special_correlator_symmetry(
        engine, rep.solutions[0], x, y, times, opts.connected);
    trace_csv(res.trace).write(out_path);
    return 0;
}

int cmd_asymmetry_scan(const RunConfig& cfg, const std::string& out_path, int jobs) {
    cli::ScanOptions opts = cfg.scan();
    const bool is_qubit = cfg.model.type == cli::ModelConfig::Type::qubit;

    auto family = [&](double n_bar) {
        if (is_qubit) {
            QubitParams p = cfg.model.qubit;
            p.n_th = n_bar;
            if (opts.scale_omega) p.Omega = p.kappa * (1.0 + 2.0 * n_bar);
            return driven_qubit(p);
        }
        KerrParams p = cfg.model.kerr;
        p.n_th = n_bar;
        return kerr_cavity(p);
    };

    std::vector<PairBuilder> builders;
    for (const auto& [xs, ys] : opts.pairs) {
        if (opts.correlator == cli::ScanOptions::Correlator::swap) {
            builders.push_back(swap_pair(
                [xs = xs, type = cfg.model.type](const LindbladModel& m) {
                    return cli::parse_operator(xs, m, type);
                },
                [ys = ys, type = cfg.model.type](const LindbladModel& m) {
                    return cli::parse_operator(ys, m, type);
                }));
        } else {
            if (!is_qubit)
                throw ConfigError("asymmetry_scan: tfd correlator scan implemented for "
                                  "the qubit family");
            builders.push_back([xs = xs, ys = ys, psi = opts.psi, cfg,
                                opts](const SpectralCorrelator& engine) {
                const LindbladModel& m = engine.model();
                Matrix x = cli::parse_operator(xs, m, cli::ModelConfig::Type::qubit);
                Matrix y = cli::parse_operator(ys, m, cli::ModelConfig::Type::qubit);
                // b' of the scan member (kappa and n_th fixed by the engine model)
                const Matrix sz = pauli_ops().z.matrix;
                QubitParams p = cfg.model.qubit;
                // recover n_th from the scan: Omega fixed per member
                // (engine model already carries the member's jumps)
                double gdown = engine.model().jumps[0].matrix.squaredNorm();  // k(1+n)
                double gup = engine.model().jumps.size() > 1
                                 ? engine.model().jumps[1].matrix.squaredNorm()
                                 : 0.0;  // k n
                const double kappa = gdown - gup;
                const double omega = 2.0 * engine.model().H.matrix(0, 1).real();
                const double bp = omega / (gdown + gup);
                AntiUnitary t = qubit_trs_family(bp, psi);
                TfdState tfd = build_tfd(engine.steady().rho, t);
                (void)sz;
                (void)p;
                (void)kappa;
                return BranchSpec{x, tfd.psi * y.transpose() * tfd.psi.adjoint(), y,
                                  tfd.psi * x.transpose() * tfd.psi.adjoint()};
            });
        }
    }

    AsymmetryScan scan = temperature_scan(family, opts.n_bar, builders, jobs, cfg.tol);

    cli::CsvWriter csv;
    csv.header = {"n_bar", "kT_over_hw"};
    for (size_t p = 0; p < opts.pairs.size(); ++p) {
        csv.header.push_back("m_" + opts.pairs[p].first + "_" + opts.pairs[p].second);
        csv.header.push_back("m_re_" + opts.pairs[p].first + "_" + opts.pairs[p].second);
    }
    csv.header.push_back("gap_estimate");
    for (const auto& pt : scan.points) {
        std::vector<std::string> row{fmt_g17(pt.n_bar), fmt_g17(pt.temperature)};
        if (!pt.converged) std::cerr << "warning: scan point n_bar=" << pt.n_bar
                                     << " failed: " << pt.note << "\n";
        for (size_t p = 0; p < opts.pairs.size(); ++p) {
            if (p < pt.m.size()) {
                row.push_back(fmt_g17(pt.m[p].m));
                row.push_back(fmt_g17(pt.m[p].m_real));
            } else {
                row.push_back("nan");
                row.push_back("nan");
            }
        }
        double gap = 0.0;
        if (!is_qubit)
            gap = dissipative_gap_estimate(cfg.model.kerr).value_or(0.0);
        row.push_back(fmt_g17(gap));
        csv.rows.push_back(std::move(row));
    }
    csv.write(out_path);
    return 0;
}

int cmd_cqa(const RunConfig& cfg, const std::string& out_path) {
    std::string warn;
    LindbladModel model = cfg.model.build(&warn);
    if (!warn.empty()) std::cerr << "warning: " << warn << "\n";
    cli::CqaOptions opts = cfg.cqa();

    Matrix u;
    double e_shift = opts.E;
    if (opts.u_source == cli::CqaOptions::USource::literal) {
        u = opts.u_literal;
    } else if (opts.u_source == cli::CqaOptions::USource::family) {
        if (model.num_jumps() != 2)
            throw ConfigError("cqa.u family form needs a two-jump (thermal) model");
        u = Matrix::Zero(2, 2);
        u(0, 1) = std::exp(I_UNIT * opts.psi);
        u(1, 0) = std::exp(-I_UNIT * opts.psi);
    } else {
        DetectionReport rep = detect(model, {}, cfg.tol);
        if (!rep.found()) throw NumericsError("cqa: no hidden TRS detected");
        if (opts.detected_index < 0 ||
            opts.detected_index >= static_cast<int>(rep.solutions.size()))
            throw ConfigError("cqa.index out of range");
        u = rep.solutions[opts.detected_index].U;
        e_shift = rep.solutions[opts.detected_index].E;
    }

    CqaResult res = cqa_steady_state(model, u, e_shift, opts.select, {}, cfg.tol);
    SteadyStateResult ss = steady_state(model, cfg.tol);
    const double roundtrip = rel_fro(res.rho.matrix(), ss.rho.matrix());

    CascadedSystem casc = build_cascaded(model, u, e_shift, {}, cfg.tol);
    AbsorberReport rep = verify_absorber(casc, res.dark);

    json amps = json::array();
    for (Eigen::Index i = 0; i < res.dark.amplitudes.size(); ++i)
        amps.push_back(cli::complex_json(res.dark.amplitudes(i)));
    json doc{{"dark_state", amps},
             {"n_dark_states", res.n_dark_states},
             {"rho", cli::matrix_json(res.rho.matrix())},
             {"lindblad_residual", res.residual},
             {"roundtrip_error", roundtrip},
             {"jump_residuals", rep.jump_residuals},
             {"hamiltonian_residual", rep.hamiltonian_residual},
             {"cascaded_liouvillian_residual", rep.liouvillian_residual},
             {"E_shift", e_shift},
             {"U", cli::matrix_json(u)}};
    write_json(out_path, doc);
    return 0;
}

int cmd_wigner(const RunConfig& cfg, const std::string& out_path) {
    if (cfg.model.type != cli::ModelConfig::Type::kerr)
        throw ConfigError("wigner: a bosonic (kerr) model is required");
    std::string warn;
    LindbladModel model = cfg.model.build(&warn);
    if (!warn.empty()) std::cerr << "warning: " << warn << "\n";
    cli::WignerOptions opts = cfg.wigner();
    const int d = model.dim();

    WignerGrid grid = WignerGrid::square(opts.extent, opts.spacing);
    WignerResult res;
    using Source = cli::WignerOptions::Source;
    if (opts.source == Source::steady) {
        res = wigner(steady_state(model, cfg.tol).rho, grid);
    } else if (opts.source == Source::vacuum) {
        Vector v = Vector::Zero(d);
        v(0) = 1.0;
        res = wigner(StateVector(model.space, v), grid);
    } else {
        DetectionReport rep = detect(model, {}, cfg.tol);
        const double want_u = opts.source == Source::t_plus_on_coherent ? 1.0 : -1.0;
        const TrsSolution* pick = nullptr;
        for (const auto& s : rep.solutions)
            if (s.U.rows() == 1 && std::abs(s.U(0, 0).real() - want_u) < 1e-6) pick = &s;
        if (!pick)
            throw NumericsError("wigner: no detected hidden TRS with u = " +
                                std::to_string(int(want_u)));
        Vector coh(d);
        double lf = 0.0;  // log n!
        for (int n = 0; n < d; ++n) {
            if (n > 0) lf += std::log(double(n));
            coh(n) = std::pow(opts.alpha, n) * std::exp(-0.5 * std::norm(opts.alpha) -
                                                        0.5 * lf);
        }
        coh /= coh.norm();
        Vector transformed = pick->T_extracted.apply(coh);
        res = wigner(StateVector(model.space, transformed), grid);
    }
    if (res.truncation_warning)
        std::cerr << "warning: grid reaches |alpha|^2 > n_max/2; tails unreliable\n";

    cli::CsvWriter csv;
    csv.header = {"x", "p", "w"};
    for (Eigen::Index i = 0; i < res.x.size(); ++i)
        for (Eigen::Index j = 0; j < res.p.size(); ++j)
            csv.rows.push_back(
                {fmt_g17(res.x(i)), fmt_g17(res.p(j)), fmt_g17(res.w(i, j))});
    csv.write(out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hidden time-reversal symmetry toolkit for Lindblad systems"};
    app.require_subcommand(1);

    std::string config_path, out_path = "out";
    int jobs = 1;
    std::vector<std::string> tol_overrides;
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--out", out_path, "output path (CSV or JSON per command)");
    app.add_option("--jobs", jobs, "worker threads for scans");
    app.add_option("--tol", tol_overrides, "tolerance override NAME=VALUE");

    auto* c_ss = app.add_subcommand("steady-state", "null-space steady state");
    auto* c_sp = app.add_subcommand("spectrum", "Liouvillian eigendecomposition");
    auto* c_dt = app.add_subcommand("detect-trs", "hidden-TRS constraint search");
    auto* c_co = app.add_subcommand("correlator", "two-time correlation traces");
    auto* c_as = app.add_subcommand("asymmetry-scan", "integrated asymmetry vs n_bar");
    auto* c_cq = app.add_subcommand("cqa", "coherent-quantum-absorber roundtrip");
    auto* c_wg = app.add_subcommand("wigner", "Wigner function grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = cli::load_config(config_path);
        for (const auto& ov : tol_overrides) cli::apply_tol_override(cfg.tol, ov);
        if (c_ss->parsed()) return cmd_steady_state(cfg, out_path);
        if (c_sp->parsed()) return cmd_spectrum(cfg, out_path);
        if (c_dt->parsed()) return cmd_detect_trs(cfg, out_path);
        if (c_co->parsed()) return cmd_correlator(cfg, out_path);
        if (c_as->parsed()) return cmd_asymmetry_scan(cfg, out_path, jobs);
        if (c_cq->parsed()) return cmd_cqa(cfg, out_path);
        if (c_wg->parsed()) return cmd_wigner(cfg, out_path);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const NumericsError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
