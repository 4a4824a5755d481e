#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpree/dynamics.hpp"
#include "cpree/parallel.hpp"
#include "cpree/stats.hpp"

namespace cpree {

// Block geometry in the (x_1, t) plane; the remaining axes span [-5a, 5a].
// Slab j covers ([-5a, 5a] + 2ja) x [-5a, 5a]^{d-1} x ([0, 6b] + 5jb).
// The target window for centers is ([-a, a] + 2ka) x [-a, a]^{d-1} x
// [5kb, (5k + 1)b].
struct BlockGeometry {
    int d = 1;
    int n = 0;
    int a = 1;
    double b = 1.0;
    int k = 1;
    bool reflected = false;  // mirrored in x_1
    std::vector<SpaceTimeBox> slabs;
    SpaceTimeBox target;
    int c_offset = 0;

    BlockGeometry reflect() const;
    // Slabs shifted by (x, t); the target stays put.
    SpaceTimeRegion region_from(const Point& x, double t) const;
    // Half-width of a centred box holding the region for every admissible
    // start, and the last time the block needs.
    int box_half_width() const;
    double horizon() const;
};

BlockGeometry build_block_geometry(int d, int n, int a, double b, int k);

struct BlockOutcome {
    std::optional<CoverWitness> witness;  // earliest time, then smallest center
};

// Runs one block on `log`, whose lattice is centred on the block anchor.
// Start (x, t) must lie in [-a, a]^d x [0, b]. Background is all 0 at time t,
// infection x + [-n, n]^d, all paths confined to the region shifted to (x, t).
BlockOutcome run_block(const EventLog& log, const BlockGeometry& geom, const Point& x, double t);

Estimate estimate_block_event(const Params& params, const BlockGeometry& geom, const Point& x, double t,
                              std::uint64_t replicates, std::uint64_t master_seed, const Exec& exec = {});

// P[paths from the origin reach every point of [0, 2n] x [-n, n]^{d-1} at
// time 1 inside [0, 2n] x [-n, n]^{d-1} x [0, 1]].
bool seeding_brush_event(const EventLog& log, int n);
Estimate estimate_seeding_brush(const Params& params, int n, std::uint64_t replicates, std::uint64_t master_seed,
                                const Exec& exec = {});

struct FieldSite {
    std::uint8_t x = 0;
    std::optional<CoverWitness> y;  // global coordinates
};

// levels[m][i]; anchors sit at x_1 = (2i - m) 2ka, t = 5mkb.
struct RenormField {
    std::vector<std::vector<FieldSite>> levels;

    std::vector<std::uint8_t> row(std::size_t m) const;
};

Point field_anchor(const BlockGeometry& geom, int level, int i);

RenormField build_renorm_field(const Params& params, const BlockGeometry& geom, int rows, int cols,
                               std::uint64_t master_seed);
// Parent rule, witness presence and witness placement. Empty string when fine.
std::string check_field_structure(const RenormField& field, const BlockGeometry& geom);

double lss_density_threshold(double p_target);

// Site-seeded oriented percolation on N: level m + 1 site i is open with
// probability p and reached iff open and i - 1 or i was reached at level m.
bool op_survives(double p_bond, int depth, std::uint64_t seed);
Estimate op_survival(double p_bond, int depth, std::uint64_t replicates, std::uint64_t master_seed,
                     const Exec& exec = {});
// Exact value by dynamic programming over reached sets (depth <= 10).
double op_survival_exact(double p_bond, int depth);

// Sample correlation of (row[i], row[i + lag]) pooled over rows.
struct LagCorrelation {
    int lag = 0;
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t pairs = 0;
};

std::vector<LagCorrelation> row_correlations(const std::vector<std::vector<std::uint8_t>>& rows, int max_lag);

struct DominationReport {
    BlockGeometry geometry;
    Estimate density;  // single-parent block event
    double p_target = 0.25;
    double threshold = 0.0;
    std::vector<LagCorrelation> correlations;
    double field_survival = 0.0;  // fraction of fields alive at the last row
    bool certificate = false;     // density CI lies above threshold
    std::uint64_t master_seed = 0;
    int field_rows = 0;
    int row_width = 0;
    std::uint64_t replicates = 0;

    std::string to_json() const;
};

// Rows with every parent present (all starts at the anchors) feed the
// correlation estimates; `replicates` fields of `field_rows` levels feed the
// survival fraction.
DominationReport domination_report(const Params& params, const BlockGeometry& geom, int field_rows, int row_width,
                                   std::uint64_t replicates, std::uint64_t master_seed, double p_target = 0.25,
                                   const Exec& exec = {});

}  // namespace cpree
