#include "cpree/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cpree/rng.hpp"

namespace cpree {

namespace {

namespace tag {
constexpr std::uint32_t survival = 1;
constexpr std::uint32_t duality = 2;
constexpr std::uint32_t upper = 3;
constexpr std::uint32_t scan = 4;
constexpr std::uint32_t fstc = 5;
constexpr std::uint32_t orthant = 6;
constexpr std::uint32_t staircase = 7;
constexpr std::uint32_t richardson = 8;
}  // namespace tag

Digest& add_params(Digest& h, const Params& p) {
    return h.add(std::int64_t{p.d}).add(p.gamma).add(p.delta0).add(p.delta1).add(p.p);
}

Digest& add_box(Digest& h, const Box& b) {
    return h.add(std::int64_t{b.half_width}).add(std::string_view(to_string(b.boundary)));
}

Digest& add_points(Digest& h, const std::vector<Point>& xs, int dim) {
    h.add(std::int64_t(xs.size()));
    for (const Point& x : xs) h.add(std::string_view(format_point(x, dim)));
    return h;
}

Estimate finish(Estimate e, std::uint64_t master_seed, const Digest& h) {
    e.master_seed = master_seed;
    e.config_digest = h.value();
    return e;
}

std::uint64_t count_ones(const std::vector<std::uint8_t>& v) {
    std::uint64_t n = 0;
    for (auto b : v) n += b;
    return n;
}

void require_replicates(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("replicates must be >= 1");
}

std::vector<Point> cube(int dim, int n) { return cube_offsets(dim, n); }

bool in_orthant(const Point& x, int dim, int L) {
    for (int j = 0; j < dim; ++j)
        if (x[j] < 0 || x[j] >= L) return false;
    return true;
}

}  // namespace

Estimate estimate_survival(const Params& params, const InitLaw& init, const Box& box, double horizon,
                           std::uint64_t replicates, std::uint64_t master_seed, const Exec& exec) {
    params.validate();
    require_replicates(replicates);
    Digest h;
    h.add("survival");
    add_params(h, params);
    add_box(h, box).add(horizon);
    add_points(h, init.infected, params.d).add(std::int64_t(init.background.index()));
    // Validates the law once before the loop.
    sample_initial(init, params, box, master_seed);
    auto hits = replicate_map<std::uint8_t>(replicates, exec, [&](std::uint64_t i) -> std::uint8_t {
        if (init.infected.empty()) return 0;
        const std::uint64_t seed = substream_seed(master_seed, tag::survival, i);
        const EventLog log = build_event_log(params, box, horizon, seed);
        Configuration c = sample_initial(init, params, box, seed);
        SweepObserver none;
        sweep(log, c, Mode::full(), SweepWindow{0.0, horizon, nullptr, true}, none);
        return c.any_infected() ? 1 : 0;
    });
    return finish(proportion_estimate(count_ones(hits), replicates), master_seed, h);
}

namespace {

Estimate duality_side(const Params& params, const std::vector<Point>& from, const std::vector<Point>& to, double t,
                      const Box& box, std::uint64_t replicates, std::uint64_t master_seed, const Exec& exec) {
    std::vector<Point> a = from, b = to;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    Digest key;
    add_points(key, a, params.d);
    add_points(key, b, params.d);
    const std::uint64_t family = substream_seed(master_seed, tag::duality, key.value());
    const Lattice lat(params.d, box);
    std::vector<std::uint32_t> targets;
    for (const Point& y : b) targets.push_back(lat.index(y));
    const InitLaw law{Stationary{}, a};
    auto hits = replicate_map<std::uint8_t>(replicates, exec, [&](std::uint64_t i) -> std::uint8_t {
        const std::uint64_t seed = substream_seed(family, 0, i);
        const EventLog log = build_event_log(params, box, t, seed);
        Configuration c = sample_initial(law, params, box, seed);
        SweepObserver none;
        sweep(log, c, Mode::full(), SweepWindow{0.0, t, nullptr, true}, none);
        for (auto s : targets)
            if (c.infected[s]) return 1;
        return 0;
    });
    return proportion_estimate(count_ones(hits), replicates);
}

}  // namespace

DualityResult estimate_duality_residual(const Params& params, const std::vector<Point>& A, const std::vector<Point>& B,
                                        double t, const Box& box, std::uint64_t replicates, std::uint64_t master_seed,
                                        const Exec& exec) {
    params.validate();
    require_replicates(replicates);
    if (A.empty() || B.empty()) throw std::invalid_argument("duality needs nonempty A and B");
    if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
    const Lattice lat(params.d, box);
    for (const auto* set : {&A, &B})
        for (const Point& x : *set)
            if (!lat.contains(x)) throw std::invalid_argument("site " + format_point(x, params.d) + " outside box");
    Digest h;
    h.add("duality");
    add_params(h, params);
    add_box(h, box).add(t);
    add_points(h, A, params.d);
    add_points(h, B, params.d);
    DualityResult r;
    r.forward = finish(duality_side(params, A, B, t, box, replicates, master_seed, exec), master_seed, h);
    r.backward = finish(duality_side(params, B, A, t, box, replicates, master_seed, exec), master_seed, h);
    r.residual = finish(difference_estimate(r.forward, r.backward), master_seed, h);
    return r;
}

std::vector<Estimate> upper_density_curve(const Params& params, const std::vector<double>& t_grid, const Box& box,
                                          std::uint64_t replicates, std::uint64_t master_seed, const Exec& exec) {
    params.validate();
    require_replicates(replicates);
    if (t_grid.empty()) throw std::invalid_argument("empty t grid");
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        if (!(t_grid[k] >= 0.0)) throw std::invalid_argument("t must be nonnegative");
        if (k > 0 && !(t_grid[k] > t_grid[k - 1])) throw std::invalid_argument("t grid must be strictly increasing");
    }
    const double horizon = t_grid.back();
    const Lattice lat(params.d, box);
    const std::uint32_t origin = lat.origin();
    auto rows = replicate_map<std::vector<std::uint8_t>>(replicates, exec, [&](std::uint64_t i) {
        std::vector<std::uint8_t> out(t_grid.size(), 1);
        if (horizon == 0.0) return out;
        const std::uint64_t seed = substream_seed(master_seed, tag::upper, i);
        const EventLog log = build_event_log(params, box, horizon, seed);
        Configuration c(lat.size());
        std::fill(c.background.begin(), c.background.end(), 1);
        std::fill(c.infected.begin(), c.infected.end(), 1);
        SweepObserver none;
        double prev = 0.0;
        for (std::size_t k = 0; k < t_grid.size(); ++k) {
            sweep(log, c, Mode::full(), SweepWindow{prev, t_grid[k], nullptr, true}, none);
            prev = t_grid[k];
            out[k] = c.infected[origin];
        }
        return out;
    });
    std::vector<Estimate> out;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        std::uint64_t hits = 0;
        for (const auto& r : rows) hits += r[k];
        Digest h;
        h.add("upper-density");
        add_params(h, params);
        add_box(h, box).add(t_grid[k]);
        out.push_back(finish(proportion_estimate(hits, replicates), master_seed, h));
    }
    return out;
}

Estimate estimate_upper_density(const Params& params, double t, const Box& box, std::uint64_t replicates,
                                std::uint64_t master_seed, const Exec& exec) {
    return upper_density_curve(params, {t}, box, replicates, master_seed, exec).front();
}

std::optional<double> threshold_crossing(const std::vector<double>& x, const std::vector<double>& y, double threshold) {
    if (x.size() != y.size()) throw std::invalid_argument("x and y differ in length");
    for (std::size_t k = 1; k < x.size(); ++k) {
        if (y[k - 1] < threshold && y[k] >= threshold)
            return x[k - 1] + (threshold - y[k - 1]) * (x[k] - x[k - 1]) / (y[k] - y[k - 1]);
    }
    return std::nullopt;
}

ScanResult scan_critical(const Params& params, const std::vector<double>& p_grid, const InitLaw& init, const Box& box,
                         double horizon, std::uint64_t replicates, double threshold, std::uint64_t master_seed,
                         const Exec& exec) {
    params.validate();
    require_replicates(replicates);
    if (p_grid.empty()) throw std::invalid_argument("empty p grid");
    for (std::size_t k = 0; k < p_grid.size(); ++k) {
        if (!(p_grid[k] >= 0.0 && p_grid[k] <= 1.0)) throw std::invalid_argument("grid values must lie in [0, 1]");
        if (k > 0 && !(p_grid[k] > p_grid[k - 1])) throw std::invalid_argument("p grid must be strictly increasing");
    }
    if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold must lie in (0, 1)");
    sample_initial(init, params, box, master_seed);

    auto rows = replicate_map<std::vector<std::uint8_t>>(replicates, exec, [&](std::uint64_t i) {
        std::vector<std::uint8_t> out(p_grid.size(), 0);
        if (init.infected.empty()) return out;
        const std::uint64_t seed = substream_seed(master_seed, tag::scan, i);
        const EventLog base = build_event_log(params, box, horizon, seed);
        for (std::size_t k = 0; k < p_grid.size(); ++k) {
            Params at = params;
            at.p = p_grid[k];
            const EventLog log = base.with_p(at.p);
            Configuration c = sample_initial(init, at, box, seed);
            SweepObserver none;
            sweep(log, c, Mode::full(), SweepWindow{0.0, horizon, nullptr, true}, none);
            out[k] = c.any_infected() ? 1 : 0;
        }
        return out;
    });

    ScanResult r;
    r.grid = p_grid;
    r.threshold = threshold;
    r.p_invariant = params.delta0 == params.delta1;
    std::vector<double> values;
    for (std::size_t k = 0; k < p_grid.size(); ++k) {
        std::uint64_t hits = 0;
        for (const auto& row : rows) hits += row[k];
        Params at = params;
        at.p = p_grid[k];
        Digest h;
        h.add("critical-scan");
        add_params(h, at);
        add_box(h, box).add(horizon);
        add_points(h, init.infected, params.d).add(std::int64_t(init.background.index()));
        r.estimates.push_back(finish(proportion_estimate(hits, replicates), master_seed, h));
        values.push_back(r.estimates.back().value);
    }
    for (const auto& row : rows)
        if (!std::is_sorted(row.begin(), row.end())) r.pathwise_monotone = false;
    if (!r.p_invariant) r.pseudo_critical = threshold_crossing(p_grid, values, threshold);
    return r;
}

const char* to_string(FstcVariant v) {
    switch (v) {
        case FstcVariant::Fstc1: return "fstc1";
        case FstcVariant::Fstc2: return "fstc2";
        case FstcVariant::Fstc3: return "fstc3";
    }
    return "?";
}

FstcVariant parse_fstc_variant(const std::string& s) {
    if (s == "fstc1") return FstcVariant::Fstc1;
    if (s == "fstc2") return FstcVariant::Fstc2;
    if (s == "fstc3") return FstcVariant::Fstc3;
    throw std::invalid_argument("unknown fstc variant '" + s + "'");
}

int fstc_box_needed(FstcVariant v, int n, int L) {
    switch (v) {
        case FstcVariant::Fstc1: return L + n;
        case FstcVariant::Fstc2: return L + 2 * n + 1;
        case FstcVariant::Fstc3: return 2 * L + 3 * n;
    }
    return 0;
}

double fstc_horizon_needed(FstcVariant v, double T) { return v == FstcVariant::Fstc3 ? 2.0 * T : T + 1.0; }

namespace {

// Target centers: first axis in [lo, hi], the others in [0, other_hi).
std::vector<Point> slab_centers(int dim, int lo, int hi, int other_hi) {
    std::vector<Point> out;
    Point x{};
    for (int j = 1; j < dim; ++j) x[j] = 0;
    if (other_hi <= 0 && dim > 1) return out;
    x[0] = lo;
    while (true) {
        out.push_back(x);
        int j = dim - 1;
        while (j >= 1 && x[j] == other_hi - 1) {
            x[j] = 0;
            --j;
        }
        if (j >= 1) {
            ++x[j];
            continue;
        }
        if (x[0] == hi) break;
        ++x[0];
    }
    return out;
}

void check_fstc_args(int n, int L, double T) {
    if (n < 0) throw std::invalid_argument("n must be nonnegative");
    if (n >= L) throw std::invalid_argument("need n < L");
    if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
}

}  // namespace

bool fstc_event(const EventLog& log, FstcVariant v, int n, int L, double T) {
    check_fstc_args(n, L, T);
    const Lattice& lat = log.lattice();
    const int dim = lat.dim();
    if (lat.box().half_width < fstc_box_needed(v, n, L) || lat.box().boundary != Boundary::Closed)
        throw std::invalid_argument("fstc geometry does not fit the log's box");
    if (log.horizon() < fstc_horizon_needed(v, T)) throw std::invalid_argument("fstc window exceeds the log's horizon");
    Configuration c(lat.size());
    for (const Point& o : cube(dim, n)) c.infected[lat.index(o)] = 1;
    switch (v) {
        case FstcVariant::Fstc1: {
            const auto found = first_cover(log, c, Mode::truncated(L + n), nullptr, 0.0, T + 1.0, T + 1.0, true,
                                           slab_centers(dim, 0, L - 1, L), n);
            return found.has_value();
        }
        case FstcVariant::Fstc2: {
            const auto found = first_cover(log, c, Mode::truncated(L + 2 * n + 1), nullptr, 0.0, 1.0, T + 1.0, false,
                                           slab_centers(dim, L + n, L + n, L), n);
            return found.has_value();
        }
        case FstcVariant::Fstc3: {
            const auto found = first_cover(log, c, Mode::truncated(2 * L + 3 * n), nullptr, 0.0, T, 2.0 * T, false,
                                           slab_centers(dim, L + n, 2 * L + n, 2 * L), n);
            return found.has_value();
        }
    }
    return false;
}

Estimate estimate_fstc(const Params& params, int n, int L, double T, FstcVariant variant, std::uint64_t replicates,
                       std::uint64_t master_seed, const FstcOptions& opts, const Exec& exec) {
    params.validate();
    require_replicates(replicates);
    check_fstc_args(n, L, T);
    const int need_box = fstc_box_needed(variant, n, L);
    const double need_horizon = fstc_horizon_needed(variant, T);
    const Box box{opts.box_half_width > 0 ? opts.box_half_width : need_box, Boundary::Closed};
    const double horizon = opts.horizon > 0.0 ? opts.horizon : need_horizon;
    if (box.half_width < need_box) throw std::invalid_argument("fstc geometry does not fit the box");
    if (horizon < need_horizon) throw std::invalid_argument("fstc window exceeds the horizon");
    Digest h;
    h.add("fstc").add(std::string_view(to_string(variant)));
    add_params(h, params);
    add_box(h, box).add(horizon).add(std::int64_t{n}).add(std::int64_t{L}).add(T);
    auto hits = replicate_map<std::uint8_t>(replicates, exec, [&](std::uint64_t i) -> std::uint8_t {
        const std::uint64_t seed = substream_seed(master_seed, tag::fstc, i);
        const EventLog log = build_event_log(params, box, horizon, seed);
        return fstc_event(log, variant, n, L, T) ? 1 : 0;
    });
    return finish(proportion_estimate(count_ones(hits), replicates), master_seed, h);
}

OrthantSample orthant_sample(const EventLog& log, int n, int L, double T) {
    const Lattice& lat = log.lattice();
    const auto A = cube(lat.dim(), n);
    OrthantSample out;
    const BoundaryStats stats = boundary_stats(log, A, L, T);
    out.n_count = static_cast<std::uint32_t>(stats.n_count);
    out.n_plus_count = static_cast<std::uint32_t>(stats.n_plus_count);
    Configuration c(lat.size());
    for (const Point& x : A) c.infected[lat.index(x)] = 1;
    if (T > 0.0) {
        SweepObserver none;
        sweep(log, c, Mode::truncated(L), SweepWindow{0.0, T, nullptr, true}, none);
    }
    for (std::uint32_t s = 0; s < lat.size(); ++s) {
        if (!c.infected[s]) continue;
        ++out.total_count;
        if (in_orthant(lat.point(s), lat.dim(), L)) ++out.orthant_count;
    }
    return out;
}

bool OrthantReport::all_hold() const {
    return std::all_of(rows.begin(), rows.end(), [](const OrthantRow& r) { return r.holds; });
}

namespace {

// Delta-method standard error of x^a with a floor from the Wilson width, so
// that a side observed at exactly 0 or 1 still carries some uncertainty.
double power_se(const Estimate& e, double a) {
    const double se = std::max(e.std_error, e.half_width() / kZ95);
    if (e.value == 0.0) return a < 1.0 ? std::pow(se, a) : (a == 1.0 ? se : 0.0);
    return a * std::pow(e.value, a - 1.0) * se;
}

OrthantRow make_row(std::string name, int threshold, const Estimate& lhs, double lhs_exp, const Estimate& rhs,
                    double rhs_exp) {
    OrthantRow r;
    r.inequality = std::move(name);
    r.threshold = threshold;
    r.lhs = lhs;
    r.lhs_exponent = lhs_exp;
    r.rhs = rhs;
    r.rhs_exponent = rhs_exp;
    r.lhs_value = std::pow(lhs.value, lhs_exp);
    r.rhs_value = std::pow(rhs.value, rhs_exp);
    r.margin = r.rhs_value - r.lhs_value;
    const double sl = power_se(lhs, lhs_exp), sr = power_se(rhs, rhs_exp);
    r.margin_se = std::sqrt(sl * sl + sr * sr);
    r.holds = r.margin >= -3.0 * r.margin_se;
    return r;
}

}  // namespace

OrthantReport check_orthant_inequalities(const Params& params, int n, int L, double T, const std::vector<int>& Ns,
                                         const std::vector<int>& Ms, std::uint64_t replicates,
                                         std::uint64_t master_seed, const Exec& exec) {
    params.validate();
    require_replicates(replicates);
    if (n < 0 || n >= L) throw std::invalid_argument("need 0 <= n < L");
    if (!(T >= 0.0)) throw std::invalid_argument("T must be nonnegative");
    const int d = params.d;
    const Box box{L, Boundary::Closed};
    OrthantReport report;
    report.degenerate = T == 0.0;
    std::vector<OrthantSample> samples;
    if (report.degenerate) {
        OrthantSample s;
        for (const Point& x : cube(d, n)) {
            ++s.total_count;
            if (in_orthant(x, d, L)) ++s.orthant_count;
        }
        samples.assign(replicates, s);
    } else {
        samples = replicate_map<OrthantSample>(replicates, exec, [&](std::uint64_t i) {
            const std::uint64_t seed = substream_seed(master_seed, tag::orthant, i);
            const EventLog log = build_event_log(params, box, T, seed);
            return orthant_sample(log, n, L, T);
        });
    }
    Digest h;
    h.add("orthant");
    add_params(h, params);
    h.add(std::int64_t{n}).add(std::int64_t{L}).add(T);
    auto prob = [&](auto&& pred) {
        std::uint64_t k = 0;
        for (const auto& s : samples) k += pred(s) ? 1 : 0;
        return finish(proportion_estimate(k, replicates), master_seed, h);
    };
    const double two_d = std::pow(2.0, d);
    for (int N : Ns) {
        const auto lhs = prob([&](const OrthantSample& s) { return s.orthant_count <= static_cast<std::uint32_t>(N); });
        const auto rhs = prob([&](const OrthantSample& s) { return s.total_count <= two_d * N; });
        report.rows.push_back(make_row("size", N, lhs, 1.0, rhs, 1.0 / two_d));
    }
    for (int M : Ms) {
        const auto lhs = prob([&](const OrthantSample& s) { return s.n_plus_count <= static_cast<std::uint32_t>(M); });
        const auto rhs = prob([&](const OrthantSample& s) { return s.n_count <= M * d * two_d; });
        report.rows.push_back(make_row("side", M, lhs, d * two_d, rhs, 1.0));
    }
    return report;
}

std::vector<Estimate> truncated_size_staircase(const Params& params, const std::vector<Point>& A, int N,
                                               const std::vector<std::pair<int, double>>& steps,
                                               std::uint64_t replicates, std::uint64_t master_seed,
                                               const Exec& exec) {
    params.validate();
    require_replicates(replicates);
    if (steps.empty()) throw std::invalid_argument("empty staircase");
    int box_L = 0;
    double horizon = 0.0;
    for (const auto& [L, t] : steps) {
        if (L < 1 || !(t > 0.0)) throw std::invalid_argument("staircase steps need L >= 1 and t > 0");
        for (const Point& x : A)
            if (sup_norm(x, params.d) >= L) throw std::invalid_argument("A must lie inside (-L, L)^d");
        box_L = std::max(box_L, L);
        horizon = std::max(horizon, t);
    }
    const Box box{box_L, Boundary::Closed};
    const Lattice lat(params.d, box);
    auto rows = replicate_map<std::vector<std::uint8_t>>(replicates, exec, [&](std::uint64_t i) {
        const std::uint64_t seed = substream_seed(master_seed, tag::staircase, i);
        const EventLog log = build_event_log(params, box, horizon, seed);
        std::vector<std::uint8_t> out;
        for (const auto& [L, t] : steps) {
            Configuration c(lat.size());
            for (const Point& x : A) c.infected[lat.index(x)] = 1;
            SweepObserver none;
            sweep(log, c, Mode::truncated(L), SweepWindow{0.0, t, nullptr, true}, none);
            out.push_back(c.infected_count() >= static_cast<std::size_t>(N) ? 1 : 0);
        }
        return out;
    });
    std::vector<Estimate> out;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        std::uint64_t hits = 0;
        for (const auto& r : rows) hits += r[k];
        Digest h;
        h.add("staircase");
        add_params(h, params);
        add_points(h, A, params.d).add(std::int64_t{N}).add(std::int64_t{steps[k].first}).add(steps[k].second);
        out.push_back(finish(proportion_estimate(hits, replicates), master_seed, h));
    }
    return out;
}

namespace {

struct FirstInfection : SweepObserver {
    std::vector<double>* times;
    bool on_jump(const Jump& j, const Configuration&) {
        if (j.kind == JumpKind::Infection) (*times)[j.site] = j.time;
        return true;
    }
};

// Richardson first-infection times from the origin (+inf if never).
std::vector<double> richardson_times(const EventLog& log) {
    const Lattice& lat = log.lattice();
    std::vector<double> times(lat.size(), std::numeric_limits<double>::infinity());
    Configuration c(lat.size());
    c.infected[lat.origin()] = 1;
    times[lat.origin()] = 0.0;
    FirstInfection obs;
    obs.times = &times;
    sweep(log, c, Mode::richardson(), SweepWindow{0.0, log.horizon(), nullptr, false}, obs);
    return times;
}

// C~_t within phi_t for all t in [n, horizon] iff every site reached by time
// horizon has agreed by max(n, its infection time).
bool contained(const std::vector<double>& infected_at, const std::vector<double>& agreed_at, double n) {
    for (std::size_t s = 0; s < infected_at.size(); ++s) {
        if (std::isinf(infected_at[s])) continue;
        if (agreed_at[s] > std::max(n, infected_at[s])) return false;
    }
    return true;
}

}  // namespace

bool richardson_in_phi(const EventLog& log, double n) {
    if (!(n >= 0.0 && n <= log.horizon())) throw std::invalid_argument("n must lie in [0, horizon]");
    return contained(richardson_times(log), agreement_times(log), n);
}

std::vector<Estimate> estimate_richardson_in_phi(const Params& params, const std::vector<double>& n_grid,
                                                 const Box& box, double horizon, std::uint64_t replicates,
                                                 std::uint64_t master_seed, const Exec& exec) {
    params.validate();
    require_replicates(replicates);
    if (n_grid.empty()) throw std::invalid_argument("empty n grid");
    for (double n : n_grid)
        if (!(n >= 0.0 && n <= horizon)) throw std::invalid_argument("n must lie in [0, horizon]");
    auto rows = replicate_map<std::vector<std::uint8_t>>(replicates, exec, [&](std::uint64_t i) {
        const std::uint64_t seed = substream_seed(master_seed, tag::richardson, i);
        const EventLog log = build_event_log(params, box, horizon, seed);
        const auto infected_at = richardson_times(log);
        const auto agreed_at = agreement_times(log);
        std::vector<std::uint8_t> out;
        for (double n : n_grid) out.push_back(contained(infected_at, agreed_at, n) ? 1 : 0);
        return out;
    });
    std::vector<Estimate> out;
    for (std::size_t k = 0; k < n_grid.size(); ++k) {
        std::uint64_t hits = 0;
        for (const auto& r : rows) hits += r[k];
        Digest h;
        h.add("richardson-in-phi");
        add_params(h, params);
        add_box(h, box).add(horizon).add(n_grid[k]);
        out.push_back(finish(proportion_estimate(hits, replicates), master_seed, h));
    }
    return out;
}

}  // namespace cpree
