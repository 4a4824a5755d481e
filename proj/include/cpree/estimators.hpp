#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpree/background.hpp"
#include "cpree/dynamics.hpp"
#include "cpree/parallel.hpp"
#include "cpree/stats.hpp"

namespace cpree {

// Survival to `horizon` on `box` from `init`.
Estimate estimate_survival(const Params& params, const InitLaw& init, const Box& box, double horizon,
                           std::uint64_t replicates, std::uint64_t master_seed, const Exec& exec = {});

struct DualityResult {
    Estimate residual;  // forward - backward
    Estimate forward;   // P[C_t^{pi_p, A} meets B]
    Estimate backward;  // P[C_t^{pi_p, B} meets A]
};

// Both sides start from the stationary background. Each side draws its own
// replicate streams, keyed by its (start, target) pair; A == B therefore
// reuses one stream family and the residual is exactly 0.
DualityResult estimate_duality_residual(const Params& params, const std::vector<Point>& A, const std::vector<Point>& B,
                                        double t, const Box& box, std::uint64_t replicates, std::uint64_t master_seed,
                                        const Exec& exec = {});

// P[origin infected at t] from the all-ones pair.
Estimate estimate_upper_density(const Params& params, double t, const Box& box, std::uint64_t replicates,
                                std::uint64_t master_seed, const Exec& exec = {});
// Same quantity on an increasing t grid, all from shared logs. Entry k equals
// estimate_upper_density at t_grid[k] exactly.
std::vector<Estimate> upper_density_curve(const Params& params, const std::vector<double>& t_grid, const Box& box,
                                          std::uint64_t replicates, std::uint64_t master_seed, const Exec& exec = {});

struct ScanResult {
    std::vector<double> grid;
    std::vector<Estimate> estimates;
    double threshold = 0.5;
    std::optional<double> pseudo_critical;
    bool p_invariant = false;     // delta0 == delta1: every estimate equal
    bool pathwise_monotone = true;  // per replicate survival never drops as p rises
};

// Survival to horizon over a p grid. Every replicate builds one log and reads
// it at each p; the initial background uses the same per-site uniforms.
ScanResult scan_critical(const Params& params, const std::vector<double>& p_grid, const InitLaw& init, const Box& box,
                         double horizon, std::uint64_t replicates, double threshold, std::uint64_t master_seed,
                         const Exec& exec = {});

// Linear interpolation of the first upward crossing of `threshold`.
std::optional<double> threshold_crossing(const std::vector<double>& x, const std::vector<double>& y, double threshold);

enum class FstcVariant { Fstc1, Fstc2, Fstc3 };

const char* to_string(FstcVariant v);
FstcVariant parse_fstc_variant(const std::string& s);

// Smallest box half-width and horizon the variant's event needs.
int fstc_box_needed(FstcVariant v, int n, int L);
double fstc_horizon_needed(FstcVariant v, double T);

// Evaluates one variant on one log (background all 0, infected [-n,n]^d at 0).
bool fstc_event(const EventLog& log, FstcVariant v, int n, int L, double T);

struct FstcOptions {
    int box_half_width = 0;  // 0: the smallest that fits
    double horizon = 0.0;    // 0: the smallest that fits
};

Estimate estimate_fstc(const Params& params, int n, int L, double T, FstcVariant variant, std::uint64_t replicates,
                       std::uint64_t master_seed, const FstcOptions& opts = {}, const Exec& exec = {});

// |_L C_T cap [0,L)^d|, |_L C_T|, N(L,T) and N_+(L,T) of one replicate started
// from [-n,n]^d with the all-0 background.
struct OrthantSample {
    std::uint32_t orthant_count = 0;
    std::uint32_t total_count = 0;
    std::uint32_t n_count = 0;
    std::uint32_t n_plus_count = 0;
};

OrthantSample orthant_sample(const EventLog& log, int n, int L, double T);

struct OrthantRow {
    std::string inequality;  // "size" or "side"
    int threshold = 0;       // N or M
    Estimate lhs;            // P[...] on the left, before the exponent
    double lhs_exponent = 1.0;
    Estimate rhs;
    double rhs_exponent = 1.0;
    double lhs_value = 0.0;
    double rhs_value = 0.0;
    double margin = 0.0;  // rhs_value - lhs_value
    double margin_se = 0.0;
    bool holds = false;   // margin >= -3 margin_se
};

struct OrthantReport {
    std::vector<OrthantRow> rows;
    bool degenerate = false;  // T == 0: the process has not moved
    bool all_hold() const;
};

// size: P[|_L C_T cap [0,L)^d| <= N] <= P[|_L C_T| <= 2^d N]^(2^-d)
// side: P[N_+ <= M]^(d 2^d) <= P[N <= M d 2^d]
OrthantReport check_orthant_inequalities(const Params& params, int n, int L, double T, const std::vector<int>& Ns,
                                         const std::vector<int>& Ms, std::uint64_t replicates,
                                         std::uint64_t master_seed, const Exec& exec = {});

// P[|_L C_t^{0, A}| >= N] along a staircase of (L, t), all steps read from one
// log per replicate (box = largest L, horizon = largest t).
std::vector<Estimate> truncated_size_staircase(const Params& params, const std::vector<Point>& A, int N,
                                               const std::vector<std::pair<int, double>>& steps,
                                               std::uint64_t replicates, std::uint64_t master_seed,
                                               const Exec& exec = {});

// P[Richardson set from the origin inside phi_t for all t in [n, horizon]],
// for each n in n_grid, all from shared logs.
std::vector<Estimate> estimate_richardson_in_phi(const Params& params, const std::vector<double>& n_grid,
                                                 const Box& box, double horizon, std::uint64_t replicates,
                                                 std::uint64_t master_seed, const Exec& exec = {});
// The event for one log.
bool richardson_in_phi(const EventLog& log, double n);

}  // namespace cpree
