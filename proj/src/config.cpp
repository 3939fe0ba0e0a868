#include "htrs/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace htrs::cli {

namespace {

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
}

double get_num(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError(key + ": expected a number");
    return obj[key].get<double>();
}

cplx get_cplx(const json& obj, const std::string& key, cplx fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj[key];
    if (v.is_number()) return cplx(v.get<double>(), 0.0);
    require_keys(v, key, {"re", "im"});
    return cplx(get_num(v, "re", 0.0), get_num(v, "im", 0.0));
}

}  // namespace

LindbladModel ModelConfig::build(std::string* warning) const {
    if (type == Type::qubit) {
        if (warning) warning->clear();
        return driven_qubit(qubit);
    }
    return kerr_cavity(kerr, warning);
}

Eigen::VectorXd TimesSpec::grid() const {
    if (count < 2) throw ConfigError("times.count must be >= 2");
    if (!(stop > start)) throw ConfigError("times.stop must exceed times.start");
    Eigen::VectorXd t(count);
    t.setLinSpaced(count, start, stop);
    return t;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(doc);
}

RunConfig parse_config(const json& doc) {
    require_keys(doc, "config",
                 {"schema_version", "model", "tolerances", "correlator", "detect_trs",
                  "asymmetry_scan", "cqa", "wigner", "steady_state", "spectrum"});
    RunConfig cfg;
    cfg.raw = doc;
    if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer())
        throw ConfigError("config: schema_version (integer) is required");
    cfg.schema_version = doc["schema_version"].get<int>();
    if (cfg.schema_version != 1)
        throw ConfigError("config: unsupported schema_version " +
                          std::to_string(cfg.schema_version));

    if (!doc.contains("model")) throw ConfigError("config: model section is required");
    const json& m = doc["model"];
    if (!m.contains("type") || !m["type"].is_string())
        throw ConfigError("model.type must be \"qubit\" or \"kerr\"");
    const std::string type = m["type"].get<std::string>();
    if (type == "qubit") {
        require_keys(m, "model", {"type", "Delta", "Omega", "kappa", "n_th"});
        cfg.model.type = ModelConfig::Type::qubit;
        cfg.model.qubit.Delta = get_num(m, "Delta", 0.0);
        cfg.model.qubit.Omega = get_num(m, "Omega", 0.0);
        cfg.model.qubit.kappa = get_num(m, "kappa", 1.0);
        cfg.model.qubit.n_th = get_num(m, "n_th", 0.0);
        cfg.model.qubit.validate();
    } else if (type == "kerr") {
        require_keys(m, "model",
                     {"type", "K", "Delta", "Lambda1", "Lambda2", "kappa1", "kappa2",
                      "n_th", "n_max"});
        cfg.model.type = ModelConfig::Type::kerr;
        cfg.model.kerr.K = get_num(m, "K", 0.0);
        cfg.model.kerr.Delta = get_num(m, "Delta", 0.0);
        cfg.model.kerr.Lambda1 = get_cplx(m, "Lambda1", 0.0);
        cfg.model.kerr.Lambda2 = get_cplx(m, "Lambda2", 0.0);
        cfg.model.kerr.kappa1 = get_num(m, "kappa1", 0.0);
        cfg.model.kerr.kappa2 = get_num(m, "kappa2", 0.0);
        cfg.model.kerr.n_th = get_num(m, "n_th", 0.0);
        if (m.contains("n_max")) {
            if (!m["n_max"].is_number_integer()) throw ConfigError("model.n_max: integer");
            cfg.model.kerr.n_max = m["n_max"].get<int>();
        }
        cfg.model.kerr.validate();
    } else {
        throw ConfigError("model.type: unknown type \"" + type + "\"");
    }

    if (doc.contains("tolerances")) {
        const json& t = doc["tolerances"];
        require_keys(t, "tolerances",
                     {"herm", "trace", "psd", "rank", "degeneracy", "null_rel", "match",
                      "energy", "solution", "cqdb"});
        cfg.tol.herm = get_num(t, "herm", cfg.tol.herm);
        cfg.tol.trace = get_num(t, "trace", cfg.tol.trace);
        cfg.tol.psd = get_num(t, "psd", cfg.tol.psd);
        cfg.tol.rank = get_num(t, "rank", cfg.tol.rank);
        cfg.tol.degeneracy = get_num(t, "degeneracy", cfg.tol.degeneracy);
        cfg.tol.null_rel = get_num(t, "null_rel", cfg.tol.null_rel);
        cfg.tol.match = get_num(t, "match", cfg.tol.match);
        cfg.tol.energy = get_num(t, "energy", cfg.tol.energy);
        cfg.tol.solution = get_num(t, "solution", cfg.tol.solution);
        cfg.tol.cqdb = get_num(t, "cqdb", cfg.tol.cqdb);
    }
    return cfg;
}

void apply_tol_override(Tolerances& tol, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw ConfigError("--tol expects NAME=VALUE");
    const std::string name = spec.substr(0, eq);
    double value = 0;
    try {
        value = std::stod(spec.substr(eq + 1));
    } catch (...) {
        throw ConfigError("--tol: bad value in \"" + spec + "\"");
    }
    std::map<std::string, double*> table{
        {"herm", &tol.herm},         {"trace", &tol.trace},
        {"psd", &tol.psd},           {"rank", &tol.rank},
        {"degeneracy", &tol.degeneracy}, {"null_rel", &tol.null_rel},
        {"match", &tol.match},       {"energy", &tol.energy},
        {"solution", &tol.solution}, {"cqdb", &tol.cqdb}};
    auto it = table.find(name);
    if (it == table.end()) throw ConfigError("--tol: unknown tolerance \"" + name + "\"");
    *it->second = value;
}

// ---------------------------------------------------------------------------

namespace {

TrsSpec parse_trs(const json& obj, const std::string& where) {
    TrsSpec out;
    require_keys(obj, where, {"type", "psi", "index"});
    const std::string kind = obj.value("type", "hidden");
    if (kind == "qubit_family") out.kind = TrsSpec::Kind::qubit_family;
    else if (kind == "hidden") out.kind = TrsSpec::Kind::hidden;
    else if (kind == "detected") out.kind = TrsSpec::Kind::detected;
    else if (kind == "conjugation") out.kind = TrsSpec::Kind::conjugation;
    else throw ConfigError(where + ".type: unknown \"" + kind + "\"");
    out.psi = get_num(obj, "psi", M_PI);
    out.index = static_cast<int>(get_num(obj, "index", 0));
    return out;
}

}  // namespace

CorrelatorOptions RunConfig::correlator() const {
    if (!raw.contains("correlator")) throw ConfigError("config: correlator section missing");
    const json& c = raw["correlator"];
    require_keys(c, "correlator", {"variant", "x", "y", "times", "connected", "trs"});
    CorrelatorOptions out;
    const std::string v = c.value("variant", "single");
    if (v == "single") out.variant = CorrelatorOptions::Variant::single;
    else if (v == "two_sided") out.variant = CorrelatorOptions::Variant::two_sided;
    else if (v == "tfd") out.variant = CorrelatorOptions::Variant::tfd;
    else if (v == "special") out.variant = CorrelatorOptions::Variant::special;
    else throw ConfigError("correlator.variant: unknown \"" + v + "\"");
    if (!c.contains("x") || !c.contains("y"))
        throw ConfigError("correlator: x and y operator tokens are required");
    out.x = c["x"].get<std::string>();
    out.y = c["y"].get<std::string>();
    if (!c.contains("times")) throw ConfigError("correlator.times is required");
    require_keys(c["times"], "correlator.times", {"start", "stop", "count"});
    out.times.start = get_num(c["times"], "start", 0.0);
    out.times.stop = get_num(c["times"], "stop", 1.0);
    out.times.count = static_cast<int>(get_num(c["times"], "count", 101));
    if (c.contains("connected")) {
        if (!c["connected"].is_boolean()) throw ConfigError("correlator.connected: bool");
        out.connected = c["connected"].get<bool>();
    }
    if (c.contains("trs")) out.trs = parse_trs(c["trs"], "correlator.trs");
    return out;
}

DetectOptionsConfig RunConfig::detect() const {
    DetectOptionsConfig out;
    if (!raw.contains("detect_trs")) return out;
    const json& d = raw["detect_trs"];
    require_keys(d, "detect_trs", {"psi_grid_points", "refine"});
    out.psi_grid_points = static_cast<int>(get_num(d, "psi_grid_points", 24));
    if (d.contains("refine")) out.refine = d["refine"].get<bool>();
    return out;
}

ScanOptions RunConfig::scan() const {
    if (!raw.contains("asymmetry_scan"))
        throw ConfigError("config: asymmetry_scan section missing");
    const json& s = raw["asymmetry_scan"];
    require_keys(s, "asymmetry_scan", {"n_bar", "pairs", "correlator", "scale_omega", "psi"});
    ScanOptions out;
    if (!s.contains("n_bar") || !s["n_bar"].is_array() || s["n_bar"].empty())
        throw ConfigError("asymmetry_scan.n_bar: non-empty array required");
    for (const auto& v : s["n_bar"]) out.n_bar.push_back(v.get<double>());
    if (!s.contains("pairs") || !s["pairs"].is_array() || s["pairs"].empty())
        throw ConfigError("asymmetry_scan.pairs: non-empty array required");
    for (const auto& p : s["pairs"]) {
        require_keys(p, "asymmetry_scan.pairs[]", {"x", "y"});
        out.pairs.emplace_back(p["x"].get<std::string>(), p["y"].get<std::string>());
    }
    const std::string corr = s.value("correlator", "swap");
    if (corr == "swap") out.correlator = ScanOptions::Correlator::swap;
    else if (corr == "tfd") out.correlator = ScanOptions::Correlator::tfd;
    else throw ConfigError("asymmetry_scan.correlator: unknown \"" + corr + "\"");
    if (s.contains("scale_omega")) out.scale_omega = s["scale_omega"].get<bool>();
    out.psi = get_num(s, "psi", M_PI);
    return out;
}

CqaOptions RunConfig::cqa() const {
    CqaOptions out;
    if (!raw.contains("cqa")) return out;
    const json& c = raw["cqa"];
    require_keys(c, "cqa", {"u", "E", "select", "psi", "index"});
    if (c.contains("u")) {
        const json& u = c["u"];
        if (u.is_string()) {
            const std::string s = u.get<std::string>();
            if (s == "detected") out.u_source = CqaOptions::USource::detected;
            else if (s == "family") out.u_source = CqaOptions::USource::family;
            else throw ConfigError("cqa.u: unknown source \"" + s + "\"");
        } else {
            out.u_source = CqaOptions::USource::literal;
            out.u_literal = matrix_from_json(u);
        }
    }
    out.E = get_num(c, "E", 0.0);
    out.select = static_cast<int>(get_num(c, "select", -1));
    out.psi = get_num(c, "psi", 0.0);
    out.detected_index = static_cast<int>(get_num(c, "index", 0));
    return out;
}

WignerOptions RunConfig::wigner() const {
    if (!raw.contains("wigner")) throw ConfigError("config: wigner section missing");
    const json& w = raw["wigner"];
    require_keys(w, "wigner", {"source", "alpha", "extent", "spacing"});
    WignerOptions out;
    const std::string src = w.value("source", "steady");
    if (src == "steady") out.source = WignerOptions::Source::steady;
    else if (src == "vacuum") out.source = WignerOptions::Source::vacuum;
    else if (src == "T_plus_on_coherent")
        out.source = WignerOptions::Source::t_plus_on_coherent;
    else if (src == "T_minus_on_coherent")
        out.source = WignerOptions::Source::t_minus_on_coherent;
    else throw ConfigError("wigner.source: unknown \"" + src + "\"");
    out.alpha = get_cplx(w, "alpha", 0.0);
    out.extent = get_num(w, "extent", 4.0);
    out.spacing = get_num(w, "spacing", 0.1);
    if (out.spacing <= 0 || out.extent <= 0)
        throw ConfigError("wigner: extent and spacing must be positive");
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::map<std::string, Matrix> name_table(const LindbladModel& model, ModelConfig::Type type) {
    std::map<std::string, Matrix> t;
    const int d = model.dim();
    t["I"] = Matrix::Identity(d, d);
    t["H_eff"] = effective_hamiltonian(model).matrix;
    if (type == ModelConfig::Type::qubit) {
        PauliSet s = pauli_ops();
        t["sigma_x"] = s.x.matrix;
        t["sigma_y"] = s.y.matrix;
        t["sigma_z"] = s.z.matrix;
        t["sigma_p"] = s.plus.matrix;
        t["sigma_m"] = s.minus.matrix;
    } else {
        const Matrix a = annihilation_op(d).matrix;
        t["a"] = a;
        t["adag"] = a.adjoint();
        t["n"] = a.adjoint() * a;
        t["X"] = quadrature_x(d).matrix;
        t["P"] = quadrature_p(d).matrix;
    }
    return t;
}

}  // namespace

Matrix parse_operator(const std::string& token, const LindbladModel& model,
                      ModelConfig::Type type) {
    const auto table = name_table(model, type);
    const int d = model.dim();
    Matrix acc = Matrix::Identity(d, d);

    size_t pos = 0;
    while (pos < token.size()) {
        size_t star = token.find('*', pos);
        std::string factor = token.substr(pos, star == std::string::npos ? star : star - pos);
        pos = (star == std::string::npos) ? token.size() : star + 1;
        // trim
        const auto l = factor.find_first_not_of(" \t");
        const auto r = factor.find_last_not_of(" \t");
        if (l == std::string::npos) throw ConfigError("operator token: empty factor");
        factor = factor.substr(l, r - l + 1);

        int power = 1;
        std::string name = factor;
        const auto caret = factor.find('^');
        if (caret != std::string::npos) {
            name = factor.substr(0, caret);
            try {
                power = std::stoi(factor.substr(caret + 1));
            } catch (...) {
                throw ConfigError("operator token: bad power in \"" + factor + "\"");
            }
            if (power < 0) throw ConfigError("operator token: negative power");
        }
        auto it = table.find(name);
        if (it == table.end()) {
            std::string known;
            for (const auto& [k, v] : table) known += (known.empty() ? "" : ", ") + k;
            throw ConfigError("operator token: unknown name \"" + name + "\" (known: " +
                              known + ")");
        }
        for (int i = 0; i < power; ++i) acc = acc * it->second;
    }
    return acc;
}

// ---------------------------------------------------------------------------

std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void CsvWriter::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);  // LF endings everywhere
    if (!out) throw std::runtime_error("cannot open output file " + path);
    for (size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "");
    out << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
}

json complex_json(cplx v) { return json{{"re", v.real()}, {"im", v.imag()}}; }

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
        rows.push_back(row);
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Matrix matrix_from_json(const json& j) {
    if (j.is_array()) {  // bare array-of-rows form
        const auto rows = j.size();
        if (rows == 0) throw ConfigError("matrix: empty");
        const auto cols = j[0].size();
        Matrix m(rows, cols);
        for (size_t i = 0; i < rows; ++i) {
            if (j[i].size() != cols) throw ConfigError("matrix: ragged rows");
            for (size_t k = 0; k < cols; ++k) {
                const json& e = j[i][k];
                if (e.is_number()) m(i, k) = e.get<double>();
                else m(i, k) = cplx(e.value("re", 0.0), e.value("im", 0.0));
            }
        }
        return m;
    }
    require_keys(j, "matrix", {"rows", "cols", "data"});
    return matrix_from_json(j["data"]);
}

}  // namespace htrs::cli
