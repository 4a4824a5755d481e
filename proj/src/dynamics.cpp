#include "cpree/dynamics.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace cpree {

SpaceTimeRegion::SpaceTimeRegion(int dim, std::vector<SpaceTimeBox> boxes) : dim_(dim), boxes_(std::move(boxes)) {
    for (const auto& b : boxes_) {
        if (!(b.t0 <= b.t1)) throw std::invalid_argument("space-time box with t0 > t1");
        close_times_.push_back(b.t1);
    }
    std::sort(close_times_.begin(), close_times_.end());
    close_times_.erase(std::unique(close_times_.begin(), close_times_.end()), close_times_.end());
}

namespace {

bool spatially_inside(const SpaceTimeBox& b, const Point& x, int dim) {
    for (int j = 0; j < dim; ++j)
        if (x[j] < b.lo[j] || x[j] > b.hi[j]) return false;
    return true;
}

}  // namespace

bool SpaceTimeRegion::contains(const Point& x, double t) const {
    for (const auto& b : boxes_)
        if (t >= b.t0 && t <= b.t1 && spatially_inside(b, x, dim_)) return true;
    return false;
}

bool SpaceTimeRegion::contains_after(const Point& x, double t) const {
    for (const auto& b : boxes_)
        if (t >= b.t0 && t < b.t1 && spatially_inside(b, x, dim_)) return true;
    return false;
}

namespace detail {

void clip_to_mode(const Lattice& lat, Configuration& state, Mode mode, const SpaceTimeRegion* region, double t) {
    if (state.size() != lat.size() || state.background.size() != lat.size())
        throw std::invalid_argument("configuration does not match the log's box");
    for (std::uint32_t s = 0; s < state.size(); ++s) {
        if (!state.infected[s]) continue;
        if (mode.kind == ModeKind::Truncated && lat.sup_norm(s) >= mode.truncation) state.infected[s] = 0;
        if (region && !region->contains(lat.point(s), t)) state.infected[s] = 0;
    }
}

}  // namespace detail

const Configuration& Trajectory::state_at(double t) const {
    if (states.empty()) throw std::logic_error("empty trajectory");
    if (t < jump_times.front()) throw std::out_of_range("time before trajectory start");
    const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
    return states[static_cast<std::size_t>(it - jump_times.begin()) - 1];
}

namespace {

struct Recorder : SweepObserver {
    Trajectory* traj;
    bool on_jump(const Jump& j, const Configuration& c) {
        traj->jump_times.push_back(j.time);
        traj->states.push_back(c);
        if (!traj->extinction_time && !c.any_infected()) traj->extinction_time = j.time;
        return true;
    }
};

}  // namespace

Trajectory simulate(const EventLog& log, const Configuration& init, double from_time, Mode mode) {
    if (!(from_time >= 0.0 && from_time < log.horizon())) throw std::invalid_argument("from_time must lie in [0, horizon)");
    if (mode.kind == ModeKind::Truncated && mode.truncation < 1) throw std::invalid_argument("truncation must be >= 1");
    Configuration state = init;
    detail::clip_to_mode(log.lattice(), state, mode, nullptr, from_time);
    Trajectory traj;
    traj.mode = mode;
    traj.jump_times.push_back(from_time);
    traj.states.push_back(state);
    if (!state.any_infected()) traj.extinction_time = from_time;
    Recorder rec;
    rec.traj = &traj;
    sweep(log, state, mode, SweepWindow{from_time, log.horizon(), nullptr, false}, rec);
    return traj;
}

std::vector<Trajectory> coupled_simulate(const EventLog& log, std::span<const Configuration> inits, Mode mode) {
    for (const auto& c : inits)
        if (c.size() != log.lattice().size()) throw std::invalid_argument("initial configurations over different boxes");
    std::vector<Trajectory> out;
    out.reserve(inits.size());
    for (const auto& c : inits) out.push_back(simulate(log, c, 0.0, mode));
    return out;
}

namespace {

std::vector<double> merged_times(std::span<const Trajectory* const> ts) {
    std::vector<double> times;
    for (const Trajectory* t : ts) times.insert(times.end(), t->jump_times.begin(), t->jump_times.end());
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    return times;
}

}  // namespace

bool trajectories_ordered(const Trajectory& a, const Trajectory& b) {
    const Trajectory* both[] = {&a, &b};
    const double start = std::max(a.jump_times.front(), b.jump_times.front());
    for (double t : merged_times(both)) {
        if (t < start) continue;
        if (!config_leq(a.state_at(t), b.state_at(t))) return false;
    }
    return true;
}

bool trajectory_is_union(const Trajectory& whole, std::span<const Trajectory> parts) {
    std::vector<const Trajectory*> all{&whole};
    for (const auto& p : parts) all.push_back(&p);
    for (double t : merged_times(all)) {
        const BitArray& w = whole.state_at(t).infected;
        BitArray u(w.size(), 0);
        for (const auto& p : parts) {
            const BitArray& x = p.state_at(t).infected;
            for (std::size_t i = 0; i < u.size(); ++i) u[i] |= x[i];
        }
        if (u != w) return false;
    }
    return true;
}

bool active_path_exists(const EventLog& log, const BitArray& beta0, const Point& from, double s, const Point& to,
                        double t) {
    if (!(s >= 0.0 && s < t && t <= log.horizon())) throw std::invalid_argument("need 0 <= s < t <= horizon");
    const Lattice& lat = log.lattice();
    if (beta0.size() != lat.size()) throw std::invalid_argument("background does not match the log's box");
    Configuration c(lat.size());
    c.background = beta0;
    c.infected[lat.index(from)] = 1;
    const std::uint32_t target = lat.index(to);
    SweepObserver none;
    sweep(log, c, Mode::full(), SweepWindow{s, t, nullptr, true}, none);
    return c.infected[target] != 0;
}

namespace {

struct BoundaryCollector : SweepObserver {
    const Lattice* lat;
    int L;
    double T;
    std::map<std::uint32_t, std::vector<double>>* points;
    void on_blocked_arrow(double time, std::uint32_t, std::uint32_t to) {
        if (time <= T && lat->sup_norm(to) == L) (*points)[to].push_back(time);
    }
};

}  // namespace

BoundaryStats boundary_stats(const EventLog& log, std::span<const Point> A, int L, double T) {
    const Lattice& lat = log.lattice();
    if (L < 1 || L > lat.box().half_width) throw std::invalid_argument("L must lie in [1, box half-width]");
    if (!(T >= 0.0 && T <= log.horizon())) throw std::invalid_argument("T must lie in [0, horizon]");
    Configuration c(lat.size());
    for (const Point& x : A) {
        if (sup_norm(x, lat.dim()) >= L) throw std::invalid_argument("A must lie strictly inside (-L, L)^d");
        c.infected[lat.index(x)] = 1;
    }
    BoundaryStats stats;
    if (T == 0.0) return stats;
    BoundaryCollector col;
    col.lat = &lat;
    col.L = L;
    col.T = T;
    col.points = &stats.side_points;
    sweep(log, c, Mode::truncated(L), SweepWindow{0.0, T, nullptr, true}, col);
    for (auto& [site, times] : stats.side_points) {
        std::sort(times.begin(), times.end());
        const std::size_t count = max_separated_count(times);
        stats.n_count += count;
        const Point x = lat.point(site);
        bool plus = x[0] == L;
        for (int j = 1; j < lat.dim(); ++j) plus = plus && x[j] >= 0;
        if (plus) stats.n_plus_count += count;
    }
    return stats;
}

std::size_t max_separated_count(std::span<const double> sorted_times, double separation) {
    std::size_t count = 0;
    double last = -std::numeric_limits<double>::infinity();
    for (double t : sorted_times) {
        if (count == 0 || t - last >= separation) {
            ++count;
            last = t;
        }
    }
    return count;
}

double extinction_lower_bound(const Params& params, int M) {
    if (M < 0) throw std::invalid_argument("M must be nonnegative");
    params.validate();
    return std::pow(params.delta1 / params.total_rate(), M);
}

double side_extinction_lower_bound(const Params& params, int k) {
    if (k < 0) throw std::invalid_argument("k must be nonnegative");
    params.validate();
    return std::pow(std::exp(-4.0 * params.d) * params.delta1 / params.total_rate(), k);
}

}  // namespace cpree

namespace cpree {

std::vector<Point> cube_offsets(int dim, int n) {
    if (n < 0) throw std::invalid_argument("cube radius must be nonnegative");
    std::vector<Point> out;
    Point x{};
    for (int j = 0; j < dim; ++j) x[j] = -n;
    while (true) {
        out.push_back(x);
        int j = dim - 1;
        while (j >= 0 && x[j] == n) {
            x[j] = -n;
            --j;
        }
        if (j < 0) break;
        ++x[j];
    }
    return out;
}

bool cube_covered(const Lattice& lat, const BitArray& infected, const Point& x, std::span<const Point> offsets) {
    for (const Point& o : offsets) {
        Point y{};
        for (int j = 0; j < lat.dim(); ++j) y[j] = x[j] + o[j];
        if (!lat.contains(y) || !infected[lat.index(y)]) return false;
    }
    return true;
}

namespace {

struct CoverWatch : SweepObserver {
    const Lattice* lat;
    const std::vector<std::uint8_t>* is_center;
    std::span<const Point> offsets;
    double until;
    bool close_end;
    std::optional<CoverWitness> found;

    bool on_jump(const Jump& j, const Configuration& c) {
        if (j.kind != JumpKind::Infection) return true;
        if (j.time > until || (!close_end && j.time == until)) return false;
        const Point y = lat->point(j.site);
        std::optional<Point> best;
        for (const Point& o : offsets) {
            Point x{};
            for (int k = 0; k < lat->dim(); ++k) x[k] = y[k] - o[k];
            if (!lat->contains(x) || !(*is_center)[lat->index(x)]) continue;
            if (best && !(x < *best)) continue;
            if (cube_covered(*lat, c.infected, x, offsets)) best = x;
        }
        if (!best) return true;
        found = CoverWitness{j.time, *best};
        return false;
    }
};

}  // namespace

std::optional<CoverWitness> first_cover(const EventLog& log, Configuration& state, Mode mode,
                                        const SpaceTimeRegion* region, double from, double check_from,
                                        double check_until, bool close_end, std::vector<Point> centers, int n) {
    const Lattice& lat = log.lattice();
    if (!(from <= check_from && check_from <= check_until && check_until <= log.horizon()))
        throw std::invalid_argument("need from <= check_from <= check_until <= horizon");
    SweepObserver none;
    sweep(log, state, mode, SweepWindow{from, check_from, region, true}, none);
    if (!close_end && check_from == check_until) return std::nullopt;

    const auto offsets = cube_offsets(lat.dim(), n);
    std::sort(centers.begin(), centers.end());
    for (const Point& x : centers)
        if (lat.contains(x) && cube_covered(lat, state.infected, x, offsets)) return CoverWitness{check_from, x};

    std::vector<std::uint8_t> is_center(lat.size(), 0);
    for (const Point& x : centers)
        if (lat.contains(x)) is_center[lat.index(x)] = 1;
    CoverWatch watch;
    watch.lat = &lat;
    watch.is_center = &is_center;
    watch.offsets = offsets;
    watch.until = check_until;
    watch.close_end = close_end;
    sweep(log, state, mode, SweepWindow{check_from, check_until, region, true}, watch);
    return watch.found;
}

}  // namespace cpree
