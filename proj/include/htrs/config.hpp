// config.hpp — CLI run configuration: strict JSON parsing, the operator token
// grammar, and CSV/JSON output formatting shared by the command front end.

#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "htrs/models.hpp"

namespace htrs::cli {

using nlohmann::json;

/// Config/usage problems map to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelConfig {
    enum class Type { qubit, kerr };
    Type type = Type::qubit;
    QubitParams qubit;
    KerrParams kerr;

    LindbladModel build(std::string* warning = nullptr) const;
    int dim() const { return type == Type::qubit ? 2 : kerr.n_max; }
};

struct TimesSpec {
    double start = 0.0, stop = 1.0;
    int count = 101;
    Eigen::VectorXd grid() const;
};

struct TrsSpec {
    enum class Kind { qubit_family, hidden, detected, conjugation } kind = Kind::hidden;
    double psi = M_PI;  // qubit_family angle
    int index = 0;      // detected-solution index
};

struct CorrelatorOptions {
    enum class Variant { single, two_sided, tfd, special };
    Variant variant = Variant::single;
    std::string x = "sigma_y", y = "sigma_z";
    TimesSpec times;
    bool connected = true;
    TrsSpec trs;
};

struct DetectOptionsConfig {
    int psi_grid_points = 24;
    bool refine = true;
};

struct ScanOptions {
    std::vector<double> n_bar;
    std::vector<std::pair<std::string, std::string>> pairs;
    enum class Correlator { swap, tfd } correlator = Correlator::swap;
    bool scale_omega = false;  // qubit: Omega = kappa (1 + 2 n_bar)
    double psi = M_PI;         // TFD family angle for the tfd correlator
};

struct CqaOptions {
    enum class USource { detected, family, literal } u_source = USource::detected;
    double psi = 0.0;  // swap-family angle
    Matrix u_literal;
    double E = 0.0;
    int select = -1;
    int detected_index = 0;
};

struct WignerOptions {
    enum class Source { steady, vacuum, t_plus_on_coherent, t_minus_on_coherent };
    Source source = Source::steady;
    cplx alpha = 0.0;
    double extent = 4.0;
    double spacing = 0.1;
};

struct RunConfig {
    int schema_version = 1;
    ModelConfig model;
    Tolerances tol;
    json raw;  // full document for command-specific sections

    CorrelatorOptions correlator() const;
    DetectOptionsConfig detect() const;
    ScanOptions scan() const;
    CqaOptions cqa() const;
    WignerOptions wigner() const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const json& doc);

/// Apply a --tol NAME=VALUE override.
void apply_tol_override(Tolerances& tol, const std::string& spec);

// ---------------------------------------------------------------------------
// Operator token grammar: product of factors NAME or NAME^INT joined by '*'.
// Qubit names: sigma_x sigma_y sigma_z sigma_p sigma_m I.
// Cavity names: a adag n X P H_eff I.
Matrix parse_operator(const std::string& token, const LindbladModel& model,
                      ModelConfig::Type type);

// ---------------------------------------------------------------------------
// Output formatting

std::string fmt_g17(double v);

struct CsvWriter {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    void write(const std::string& path) const;
};

json complex_json(cplx v);
json matrix_json(const Matrix& m);  // row-major, entries {re, im}
Matrix matrix_from_json(const json& j);

}  // namespace htrs::cli
