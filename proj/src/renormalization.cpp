#include "cpree/renormalization.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"
#include "cpree/rng.hpp"

namespace cpree {

namespace {

namespace tag {
constexpr std::uint32_t block = 16;
constexpr std::uint32_t field = 17;
constexpr std::uint32_t op = 18;
constexpr std::uint32_t brush = 19;
constexpr std::uint32_t saturated = 20;
constexpr std::uint32_t field_runs = 21;
}  // namespace tag

SpaceTimeBox mirror(SpaceTimeBox b) {
    const int lo = b.lo[0];
    b.lo[0] = -b.hi[0];
    b.hi[0] = -lo;
    return b;
}

bool point_in(const SpaceTimeBox& b, const Point& x, int d) {
    for (int j = 0; j < d; ++j)
        if (x[j] < b.lo[j] || x[j] > b.hi[j]) return false;
    return true;
}

}  // namespace

BlockGeometry build_block_geometry(int d, int n, int a, double b, int k) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("unsupported dimension");
    if (n < 0) throw std::invalid_argument("n must be nonnegative");
    if (n >= a) throw std::invalid_argument("need n < a");
    if (!(b > 0.0)) throw std::invalid_argument("b must be positive");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    BlockGeometry g;
    g.d = d;
    g.n = n;
    g.a = a;
    g.b = b;
    g.k = k;
    for (int j = 0; j < k; ++j) {
        SpaceTimeBox s;
        for (int i = 0; i < d; ++i) {
            s.lo[i] = -5 * a;
            s.hi[i] = 5 * a;
        }
        s.lo[0] += 2 * j * a;
        s.hi[0] += 2 * j * a;
        s.t0 = 5.0 * j * b;
        s.t1 = s.t0 + 6.0 * b;
        g.slabs.push_back(s);
    }
    for (int i = 0; i < d; ++i) {
        g.target.lo[i] = -a;
        g.target.hi[i] = a;
    }
    g.target.lo[0] += 2 * k * a;
    g.target.hi[0] += 2 * k * a;
    g.target.t0 = 5.0 * k * b;
    g.target.t1 = (5.0 * k + 1.0) * b;
    // Gap between the mirrored block's right edge, which reaches 6a for a
    // start at x_1 = a, and the target's left corner 2ka - a.
    g.c_offset = std::max(0, (2 * k - 7) * a);
    return g;
}

BlockGeometry BlockGeometry::reflect() const {
    BlockGeometry g = *this;
    g.reflected = !reflected;
    for (auto& s : g.slabs) s = mirror(s);
    g.target = mirror(target);
    return g;
}

SpaceTimeRegion BlockGeometry::region_from(const Point& x, double t) const {
    std::vector<SpaceTimeBox> boxes;
    for (SpaceTimeBox s : slabs) {
        for (int i = 0; i < d; ++i) {
            s.lo[i] += x[i];
            s.hi[i] += x[i];
        }
        s.t0 += t;
        s.t1 += t;
        boxes.push_back(s);
    }
    return SpaceTimeRegion(d, std::move(boxes));
}

int BlockGeometry::box_half_width() const { return (2 * k + 4) * a; }

double BlockGeometry::horizon() const { return target.t1; }

BlockOutcome run_block(const EventLog& log, const BlockGeometry& geom, const Point& x, double t) {
    const Lattice& lat = log.lattice();
    if (lat.dim() != geom.d) throw std::invalid_argument("dimension mismatch between log and geometry");
    if (lat.box().half_width < geom.box_half_width() || log.horizon() < geom.horizon())
        throw std::invalid_argument("block geometry does not fit the log");
    if (sup_norm(x, geom.d) > geom.a || !(t >= 0.0 && t <= geom.b))
        throw std::invalid_argument("block start must lie in [-a, a]^d x [0, b]");
    const SpaceTimeRegion region = geom.region_from(x, t);
    Configuration c(lat.size());
    for (const Point& o : cube_offsets(geom.d, geom.n)) {
        Point y{};
        for (int j = 0; j < geom.d; ++j) y[j] = x[j] + o[j];
        c.infected[lat.index(y)] = 1;
    }
    std::vector<Point> centers;
    const auto span = cube_offsets(geom.d, geom.a);
    for (const Point& o : span) {
        Point y = o;
        y[0] += (geom.target.lo[0] + geom.target.hi[0]) / 2;
        centers.push_back(y);
    }
    BlockOutcome out;
    out.witness = first_cover(log, c, Mode::full(), &region, t, std::max(t, geom.target.t0), geom.target.t1, true,
                              std::move(centers), geom.n);
    return out;
}

namespace {

Box block_box(const BlockGeometry& g) { return Box{g.box_half_width(), Boundary::Closed}; }

Digest geometry_digest(const char* name, const Params& params, const BlockGeometry& g) {
    Digest h;
    h.add(name)
        .add(std::int64_t{params.d})
        .add(params.gamma)
        .add(params.delta0)
        .add(params.delta1)
        .add(params.p)
        .add(std::int64_t{g.n})
        .add(std::int64_t{g.a})
        .add(g.b)
        .add(std::int64_t{g.k})
        .add(std::int64_t{g.reflected});
    return h;
}

}  // namespace

Estimate estimate_block_event(const Params& params, const BlockGeometry& geom, const Point& x, double t,
                              std::uint64_t replicates, std::uint64_t master_seed, const Exec& exec) {
    params.validate();
    if (replicates == 0) throw std::invalid_argument("replicates must be >= 1");
    if (params.d != geom.d) throw std::invalid_argument("dimension mismatch between params and geometry");
    if (sup_norm(x, geom.d) > geom.a || !(t >= 0.0 && t <= geom.b))
        throw std::invalid_argument("block start must lie in [-a, a]^d x [0, b]");
    auto hits = replicate_map<std::uint8_t>(replicates, exec, [&](std::uint64_t i) -> std::uint8_t {
        const EventLog log = build_event_log(params, block_box(geom), geom.horizon(),
                                             substream_seed(master_seed, tag::block, i));
        return run_block(log, geom, x, t).witness ? 1 : 0;
    });
    std::uint64_t k = 0;
    for (auto h : hits) k += h;
    Estimate e = proportion_estimate(k, replicates);
    Digest h = geometry_digest("blocks", params, geom);
    h.add(std::string_view(format_point(x, geom.d))).add(t);
    e.master_seed = master_seed;
    e.config_digest = h.value();
    return e;
}

bool seeding_brush_event(const EventLog& log, int n) {
    const Lattice& lat = log.lattice();
    const int d = lat.dim();
    if (lat.box().half_width < 2 * n || log.horizon() < 1.0) throw std::invalid_argument("brush does not fit the log");
    SpaceTimeBox slab;
    for (int j = 0; j < d; ++j) {
        slab.lo[j] = -n;
        slab.hi[j] = n;
    }
    slab.lo[0] = 0;
    slab.hi[0] = 2 * n;
    slab.t0 = 0.0;
    slab.t1 = 1.0;
    // Time 1 itself is still inside, so close the region just after.
    SpaceTimeBox open = slab;
    open.t1 = std::nextafter(1.0, 2.0);
    const SpaceTimeRegion region(d, {open});
    Configuration c(lat.size());
    c.infected[lat.origin()] = 1;
    SweepObserver none;
    sweep(log, c, Mode::full(), SweepWindow{0.0, 1.0, &region, true}, none);
    for (std::uint32_t s = 0; s < lat.size(); ++s)
        if (point_in(slab, lat.point(s), d) && !c.infected[s]) return false;
    return true;
}

Estimate estimate_seeding_brush(const Params& params, int n, std::uint64_t replicates, std::uint64_t master_seed,
                                const Exec& exec) {
    params.validate();
    if (replicates == 0) throw std::invalid_argument("replicates must be >= 1");
    if (n < 0) throw std::invalid_argument("n must be nonnegative");
    const Box box{std::max(1, 2 * n), Boundary::Closed};
    auto hits = replicate_map<std::uint8_t>(replicates, exec, [&](std::uint64_t i) -> std::uint8_t {
        const EventLog log = build_event_log(params, box, 1.0, substream_seed(master_seed, tag::brush, i));
        return seeding_brush_event(log, n) ? 1 : 0;
    });
    std::uint64_t k = 0;
    for (auto h : hits) k += h;
    Estimate e = proportion_estimate(k, replicates);
    e.master_seed = master_seed;
    return e;
}

std::vector<std::uint8_t> RenormField::row(std::size_t m) const {
    std::vector<std::uint8_t> out;
    for (const auto& s : levels.at(m)) out.push_back(s.x);
    return out;
}

Point field_anchor(const BlockGeometry& geom, int level, int i) {
    Point x{};
    x[0] = (2 * i - level) * 2 * geom.k * geom.a;
    return x;
}

namespace {

double anchor_time(const BlockGeometry& g, int level) { return 5.0 * level * g.k * g.b; }

bool earlier(const CoverWitness& a, const CoverWitness& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.center < b.center;
}

void offer(FieldSite& site, const CoverWitness& w) {
    site.x = 1;
    if (!site.y || earlier(w, *site.y)) site.y = w;
}

// Both blocks leaving one parent, read from one log around the parent anchor.
// Returns the (left, right) witnesses in global coordinates.
std::pair<std::optional<CoverWitness>, std::optional<CoverWitness>> parent_blocks(const EventLog& log,
                                                                                  const BlockGeometry& right,
                                                                                  const BlockGeometry& left,
                                                                                  const Point& anchor, double t_anchor,
                                                                                  const CoverWitness& start) {
    Point local{};
    for (int j = 0; j < right.d; ++j) local[j] = start.center[j] - anchor[j];
    const double t_local = start.time - t_anchor;
    auto globalize = [&](std::optional<CoverWitness> w) {
        if (w) {
            for (int j = 0; j < right.d; ++j) w->center[j] += anchor[j];
            w->time += t_anchor;
        }
        return w;
    };
    auto l = globalize(run_block(log, left, local, t_local).witness);
    auto r = globalize(run_block(log, right, local, t_local).witness);
    return {l, r};
}

}  // namespace

RenormField build_renorm_field(const Params& params, const BlockGeometry& geom, int rows, int cols,
                               std::uint64_t master_seed) {
    params.validate();
    if (rows < 1 || cols < 1) throw std::invalid_argument("rows and cols must be >= 1");
    if (params.d != geom.d) throw std::invalid_argument("dimension mismatch between params and geometry");
    const BlockGeometry right = geom.reflected ? geom.reflect() : geom;
    const BlockGeometry left = right.reflect();
    RenormField field;
    field.levels.assign(static_cast<std::size_t>(rows), std::vector<FieldSite>(static_cast<std::size_t>(cols)));
    field.levels[0][0].x = 1;
    field.levels[0][0].y = CoverWitness{0.0, Point{}};
    for (int m = 0; m + 1 < rows; ++m) {
        const std::uint64_t level_seed = substream_seed(master_seed, tag::field, static_cast<std::uint64_t>(m));
        for (int j = 0; j < cols; ++j) {
            const FieldSite& parent = field.levels[m][j];
            if (!parent.x) continue;
            const EventLog log = build_event_log(params, block_box(right), right.horizon(),
                                                 substream_seed(level_seed, 0, static_cast<std::uint64_t>(j)));
            const auto [l, r] = parent_blocks(log, right, left, field_anchor(geom, m, j), anchor_time(geom, m), *parent.y);
            auto& next = field.levels[m + 1];
            if (l) offer(next[j], *l);
            if (r && j + 1 < cols) offer(next[j + 1], *r);
        }
    }
    return field;
}

std::string check_field_structure(const RenormField& field, const BlockGeometry& geom) {
    for (std::size_t m = 0; m < field.levels.size(); ++m) {
        const auto& row = field.levels[m];
        for (std::size_t i = 0; i < row.size(); ++i) {
            const FieldSite& s = row[i];
            const std::string at = "level " + std::to_string(m) + " site " + std::to_string(i);
            if (s.x != 0 && s.x != 1) return at + ": value not 0/1";
            if (static_cast<bool>(s.x) != s.y.has_value()) return at + ": witness present iff occupied fails";
            if (m == 0) {
                if ((i == 0) != static_cast<bool>(s.x)) return at + ": level 0 must be the single seed";
                continue;
            }
            if (!s.x) continue;
            const auto& prev = field.levels[m - 1];
            const bool parent = prev[i].x || (i > 0 && prev[i - 1].x);
            if (!parent) return at + ": occupied without a parent";
            const Point anchor = field_anchor(geom, static_cast<int>(m), static_cast<int>(i));
            Point rel{};
            for (int j = 0; j < geom.d; ++j) rel[j] = s.y->center[j] - anchor[j];
            const double dt = s.y->time - anchor_time(geom, static_cast<int>(m));
            if (sup_norm(rel, geom.d) > geom.a || dt < 0.0 || dt > geom.b) return at + ": witness outside its window";
        }
    }
    return {};
}

double lss_density_threshold(double p_target) {
    if (!(p_target >= 0.0 && p_target <= 1.0)) throw std::invalid_argument("p_target must lie in [0, 1]");
    const double q = 1.0 - std::sqrt(p_target);
    return 1.0 - q * q * q;
}

bool op_survives(double p_bond, int depth, std::uint64_t seed) {
    if (!(p_bond >= 0.0 && p_bond <= 1.0)) throw std::invalid_argument("p_bond must lie in [0, 1]");
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    std::vector<std::uint8_t> prev{1}, next;
    for (int m = 1; m <= depth; ++m) {
        next.assign(static_cast<std::size_t>(m) + 1, 0);
        bool any = false;
        for (int i = 0; i <= m; ++i) {
            const bool fed = (i < m && prev[i]) || (i > 0 && prev[i - 1]);
            if (!fed) continue;
            Stream u(seed, stream_kind::percolation, (static_cast<std::uint64_t>(m) << 32) | static_cast<std::uint32_t>(i));
            if (u.next_uniform() < p_bond) {
                next[i] = 1;
                any = true;
            }
        }
        if (!any) return false;
        prev.swap(next);
    }
    return true;
}

Estimate op_survival(double p_bond, int depth, std::uint64_t replicates, std::uint64_t master_seed, const Exec& exec) {
    if (!(p_bond >= 0.0 && p_bond <= 1.0)) throw std::invalid_argument("p_bond must lie in [0, 1]");
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    if (replicates == 0) throw std::invalid_argument("replicates must be >= 1");
    auto hits = replicate_map<std::uint8_t>(replicates, exec, [&](std::uint64_t i) -> std::uint8_t {
        return op_survives(p_bond, depth, substream_seed(master_seed, tag::op, i)) ? 1 : 0;
    });
    std::uint64_t k = 0;
    for (auto h : hits) k += h;
    Estimate e = proportion_estimate(k, replicates);
    e.master_seed = master_seed;
    e.config_digest = Digest().add("op-survival").add(p_bond).add(std::int64_t{depth}).value();
    return e;
}

double op_survival_exact(double p_bond, int depth) {
    if (!(p_bond >= 0.0 && p_bond <= 1.0)) throw std::invalid_argument("p_bond must lie in [0, 1]");
    if (depth < 1 || depth > 10) throw std::invalid_argument("exact depth must lie in [1, 10]");
    std::unordered_map<std::uint32_t, double> law{{1u, 1.0}};
    for (int m = 1; m <= depth; ++m) {
        std::unordered_map<std::uint32_t, double> next;
        for (const auto& [set, w] : law) {
            const std::uint32_t cand = set | (set << 1);
            const int c = std::popcount(cand);
            // Every subset of the candidates, including the empty one.
            for (std::uint32_t sub = cand;; sub = (sub - 1) & cand) {
                const int k = std::popcount(sub);
                const double pr = std::pow(p_bond, k) * std::pow(1.0 - p_bond, c - k);
                if (sub != 0 && pr > 0.0) next[sub] += w * pr;
                if (sub == 0) break;
            }
        }
        law.swap(next);
    }
    double alive = 0.0;
    for (const auto& [set, w] : law) alive += w;
    return alive;
}

std::vector<LagCorrelation> row_correlations(const std::vector<std::vector<std::uint8_t>>& rows, int max_lag) {
    if (max_lag < 1) throw std::invalid_argument("max_lag must be >= 1");
    std::vector<LagCorrelation> out;
    for (int lag = 1; lag <= max_lag; ++lag) {
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        std::uint64_t n = 0;
        for (const auto& row : rows) {
            for (std::size_t i = 0; i + static_cast<std::size_t>(lag) < row.size(); ++i) {
                const double x = row[i], y = row[i + static_cast<std::size_t>(lag)];
                sx += x;
                sy += y;
                sxx += x * x;
                syy += y * y;
                sxy += x * y;
                ++n;
            }
        }
        if (n < 3) throw std::invalid_argument("insufficient rows for correlation estimates");
        const double nn = static_cast<double>(n);
        const double cov = sxy / nn - (sx / nn) * (sy / nn);
        const double vx = sxx / nn - (sx / nn) * (sx / nn);
        const double vy = syy / nn - (sy / nn) * (sy / nn);
        LagCorrelation c;
        c.lag = lag;
        c.pairs = n;
        c.value = (vx > 0.0 && vy > 0.0) ? cov / std::sqrt(vx * vy) : 0.0;
        c.std_error = 1.0 / std::sqrt(nn);
        out.push_back(c);
    }
    return out;
}

DominationReport domination_report(const Params& params, const BlockGeometry& geom, int field_rows, int row_width,
                                   std::uint64_t replicates, std::uint64_t master_seed, double p_target,
                                   const Exec& exec) {
    params.validate();
    if (field_rows < 2) throw std::invalid_argument("need at least 2 field rows");
    if (row_width < 3) throw std::invalid_argument("insufficient rows for correlation estimates: width must be >= 3");
    if (replicates == 0) throw std::invalid_argument("replicates must be >= 1");
    if (p_target < 0.25 || p_target >= 1.0) throw std::invalid_argument("p_target must lie in [1/4, 1)");
    const BlockGeometry right = geom.reflected ? geom.reflect() : geom;
    const BlockGeometry left = right.reflect();

    DominationReport rep;
    rep.geometry = right;
    rep.p_target = p_target;
    rep.threshold = lss_density_threshold(p_target);
    rep.master_seed = master_seed;
    rep.field_rows = field_rows;
    rep.row_width = row_width;
    rep.replicates = replicates;
    rep.density = estimate_block_event(params, right, Point{}, 0.0, replicates,
                                       substream_seed(master_seed, tag::block, 0), exec);
    rep.density.master_seed = master_seed;

    // One child row with every parent present. Parent j in [-1, width) feeds
    // children j and j + 1; its two blocks share one log.
    const std::uint64_t sat_seed = substream_seed(master_seed, tag::saturated, 0);
    auto rows = replicate_map<std::vector<std::uint8_t>>(replicates, exec, [&](std::uint64_t r) {
        std::vector<std::uint8_t> row(static_cast<std::size_t>(row_width), 0);
        const std::uint64_t rep_seed = substream_seed(sat_seed, 0, r);
        for (int j = -1; j < row_width; ++j) {
            const EventLog log = build_event_log(params, block_box(right), right.horizon(),
                                                 substream_seed(rep_seed, 0, static_cast<std::uint64_t>(j + 1)));
            if (j >= 0 && run_block(log, left, Point{}, 0.0).witness) row[j] = 1;
            if (j + 1 < row_width && run_block(log, right, Point{}, 0.0).witness) row[j + 1] = 1;
        }
        return row;
    });
    rep.correlations = row_correlations(rows, std::min(3, row_width - 1));

    const std::uint64_t field_seed = substream_seed(master_seed, tag::field_runs, 0);
    auto alive = replicate_map<std::uint8_t>(replicates, exec, [&](std::uint64_t r) -> std::uint8_t {
        const RenormField f = build_renorm_field(params, right, field_rows, field_rows, substream_seed(field_seed, 0, r));
        const auto last = f.row(static_cast<std::size_t>(field_rows - 1));
        return std::any_of(last.begin(), last.end(), [](std::uint8_t x) { return x != 0; }) ? 1 : 0;
    });
    std::uint64_t k = 0;
    for (auto a : alive) k += a;
    rep.field_survival = static_cast<double>(k) / static_cast<double>(replicates);
    rep.certificate = rep.density.ci_low > rep.threshold;
    return rep;
}

std::string DominationReport::to_json() const {
    using nlohmann::ordered_json;
    ordered_json j;
    j["report"] = "domination";
    j["rigorous"] = false;
    j["note"] = "numerical echo of the comparison argument, not a proof";
    ordered_json g;
    g["d"] = geometry.d;
    g["n"] = geometry.n;
    g["a"] = geometry.a;
    g["b"] = geometry.b;
    g["k"] = geometry.k;
    g["c_offset"] = geometry.c_offset;
    g["box_half_width"] = geometry.box_half_width();
    g["horizon"] = geometry.horizon();
    j["geometry"] = g;
    j["density"] = {{"value", density.value},       {"ci_low", density.ci_low},
                    {"ci_high", density.ci_high},   {"replicates", density.replicates},
                    {"master_seed", density.master_seed}};
    j["p_target"] = p_target;
    j["threshold"] = threshold;
    ordered_json corr = ordered_json::array();
    for (const auto& c : correlations)
        corr.push_back({{"lag", c.lag}, {"value", c.value}, {"std_error", c.std_error}, {"pairs", c.pairs}});
    j["correlations"] = corr;
    j["field_rows"] = field_rows;
    j["row_width"] = row_width;
    j["field_survival"] = field_survival;
    j["certificate"] = certificate;
    j["master_seed"] = master_seed;
    j["replicates"] = replicates;
    return j.dump(2);
}

}  // namespace cpree
