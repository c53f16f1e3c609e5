#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fattn/ansatz.hpp"
#include "fattn/errors.hpp"
#include "fattn/optimizer.hpp"

namespace fattn {

// Everything a run needs. Loaded from a flat `key = value` file, then patched
// by command-line overrides; the resolved form is written next to the outputs.
struct RunConfig {
    int lx = 4;
    int ly = 4;
    double lambda = 3.05;
    std::vector<PlanKind> kinds{PlanKind::ttn};
    std::vector<int> dims{4};
    int max_sweeps = 200;
    double tol = 1e-9;
    std::uint64_t seed = 1;
    std::string out = "out";
    int checkpoint_every = 0;            // sweeps between checkpoints, 0 = final only
    FitVariable fit_variable = FitVariable::inverse_d;
    std::string reference = "auto";      // auto | ed | extrapolation | none
    bool warm_start = true;              // reuse the previous grid point as a start
    int jobs = 1;                        // concurrent grid points when warm_start is off
    bool shifted = false;                // always use shifted environments
    double k = 4.0;                      // area-law constant for the entropy report
    int total = 32;                      // disentangler budget for the balance search
    int timing_sweeps = 2;               // timed sweeps per point in the scaling run
};

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});
std::string config_to_text(const RunConfig& cfg);
void validate_config(const RunConfig& cfg);

std::vector<int> parse_int_list(const std::string& s);

struct BenchRow {
    PlanKind kind = PlanKind::ttn;
    int D = 0;
    double energy_per_site = 0.0;
    double reference_per_site = 0.0;   // NaN when no reference is available
    std::string reference_source = "none";
    double relative_error = 0.0;       // NaN when no reference is available
    int sweeps = 0;
    double seconds_per_sweep = 0.0;
    bool converged = false;
    bool failed = false;
    ExitCode error = ExitCode::ok;     // why a failed row failed
    std::string message;
};

std::string bench_rows_to_csv(const std::vector<BenchRow>& rows);

struct Reference {
    double energy_per_site = 0.0;
    std::string source = "none";       // ed | extrapolation | none
    std::optional<Extrapolation> fit;
    PlanKind fitted_kind = PlanKind::ttn;
};

struct GridPoint {
    BenchRow row;
    EnergyTrace trace;
    std::optional<AnsatzState> state;  // absent for failed points
};

struct GridResult {
    std::vector<GridPoint> points;     // ordered by kind (config order), then D
    Reference reference;
};

using Logger = std::function<void(const std::string&)>;

/**
 * Optimizes every configured kind over the D grid. With warm starts, the point
 * (kind, D) begins from whichever is lower in energy: the same kind at the
 * previous D (padded and re-orthogonalized) or the previous kind at the same D
 * (identity disentanglers on the new entries). Checkpoints and traces are
 * written below cfg.out when `write` is set. Numerical-health failures mark the
 * row failed and the grid continues.
 */
GridResult run_grid(const RunConfig& cfg, bool write = true, const Logger& log = {});

// Picks the reference per cfg.reference and fills the error columns.
void apply_reference(GridResult& result, const RunConfig& cfg);

struct ScalingPoint {
    PlanKind kind = PlanKind::ttn;
    int D = 0;
    double seconds_per_sweep = 0.0;
};

struct ScalingFit {
    PlanKind kind = PlanKind::ttn;
    std::optional<double> slope;       // absent with fewer than two distinct D
    int points = 0;
};

std::vector<ScalingPoint> measure_scaling(const RunConfig& cfg, const Logger& log = {});
std::vector<ScalingFit> fit_scaling(const std::vector<ScalingPoint>& points);

// Subcommands. Each writes its CSV files and resolved config into cfg.out and
// returns a process exit code.
int cmd_ed(const RunConfig& cfg, std::ostream& msg);
int cmd_optimize(const RunConfig& cfg, std::ostream& msg);
int cmd_benchmark(const RunConfig& cfg, std::ostream& msg);
int cmd_entropy(const RunConfig& cfg, std::ostream& msg);
int cmd_scaling(const RunConfig& cfg, std::ostream& msg);

}  // namespace fattn
