#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cpree/background.hpp"
#include "cpree/estimators.hpp"
#include "cpree/renormalization.hpp"

namespace cpree {

// Bad config: exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
    Survival,
    Duality,
    UpperDensity,
    CriticalScan,
    Fstc,
    Orthant,
    Blocks,
    Field,
    OpCompare,
    OracleCompare
};

const char* to_string(ExperimentKind k);

struct GeometrySpec {
    int n = 0;
    int a = 1;
    double b = 1.0;
    int k = 1;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Survival;
    Params params;
    Box box;
    double horizon = 0.0;
    std::uint64_t replicates = 0;
    std::uint64_t master_seed = 0;
    int workers = 1;
    std::string output_path;  // empty: stdout
    std::string series_path;  // empty: no series

    InitLaw init;
    std::vector<Point> A, B;
    double t = 0.0;
    std::vector<double> t_grid;
    std::vector<double> p_grid;
    double threshold = 0.5;
    int n = 0, L = 0;
    double T = 0.0;
    std::vector<FstcVariant> variants;
    std::vector<std::pair<int, double>> steps;  // (L, T)
    std::vector<int> Ns, Ms;
    GeometrySpec geometry;
    Point start_x{};
    double start_t = 0.0;
    bool reflected = false;
    int rows = 0, cols = 0;
    double p_target = 0.25;
    std::vector<double> p_bond;
    int depth = 0;

    std::string canonical;  // sorted-key JSON of the inputs that define the output
    std::uint64_t digest = 0;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out;
    std::optional<std::uint64_t> env_seed;  // CPREE_SEED, lowest priority
};

// Parses and fully validates a config (throws ConfigError).
ExperimentConfig parse_config(const std::string& text, const Overrides& ov = {});
ExperimentConfig load_config(const std::string& path, const Overrides& ov = {});

// One CSV row of the estimate schema; oracle and op comparisons also fill
// `exact`.
struct ResultRow {
    std::string estimator;
    Params params;
    int box_L = 0;
    double horizon = 0.0;
    std::string variant;
    Estimate estimate;
    std::optional<double> exact;
};

struct SeriesPoint {
    double x = 0.0;
    std::optional<double> x2;
    double y = 0.0, ci_low = 0.0, ci_high = 0.0;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::vector<SeriesPoint> series;
    std::optional<std::string> json;  // renormalization report
    std::string summary;
    bool ok = true;  // false when a built-in comparison fails
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

void write_csv(std::ostream& out, const ExperimentConfig& cfg, const std::vector<ResultRow>& rows);
// Long format: x, y, ci_low, ci_high (x, x2, ... when two-dimensional).
void emit_series(std::ostream& out, const std::vector<SeriesPoint>& series);

// Writes the artifacts named by the config; returns the summary line.
std::string write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result);

}  // namespace cpree
