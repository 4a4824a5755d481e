#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cpree/background.hpp"
#include "cpree/event_log.hpp"

namespace cpree {

enum class ModeKind : std::uint8_t { Full, Truncated, Richardson };

// Truncated(L) keeps only paths inside (-L, L)^d; Richardson ignores all
// recoveries.
struct Mode {
    ModeKind kind = ModeKind::Full;
    int truncation = 0;

    static Mode full() { return {}; }
    static Mode truncated(int L) { return {ModeKind::Truncated, L}; }
    static Mode richardson() { return {ModeKind::Richardson, 0}; }
};

// Space-time box: integer spatial bounds per axis (inclusive) and a closed
// time interval.
struct SpaceTimeBox {
    Point lo{};
    Point hi{};
    double t0 = 0.0;
    double t1 = 0.0;
};

// Union of space-time boxes; paths are confined to it.
class SpaceTimeRegion {
public:
    SpaceTimeRegion(int dim, std::vector<SpaceTimeBox> boxes);

    int dim() const { return dim_; }
    const std::vector<SpaceTimeBox>& boxes() const { return boxes_; }
    bool contains(const Point& x, double t) const;
    // Membership for times just after t, used when a box closes at t.
    bool contains_after(const Point& x, double t) const;
    // Distinct box end times, ascending.
    const std::vector<double>& close_times() const { return close_times_; }

private:
    int dim_;
    std::vector<SpaceTimeBox> boxes_;
    std::vector<double> close_times_;
};

enum class JumpKind : std::uint8_t { Background, Infection, Recovery, Confinement };

struct Jump {
    double time;
    std::uint32_t site;
    JumpKind kind;
};

// Default observer hooks; observers override what they need.
struct SweepObserver {
    // Return false to stop the sweep after this jump.
    bool on_jump(const Jump&, const Configuration&) { return true; }
    void on_blocked_arrow(double /*time*/, std::uint32_t /*from*/, std::uint32_t /*to*/) {}
};

struct SweepWindow {
    double from = 0.0;   // uses events with time in (from, until]
    double until = 0.0;
    const SpaceTimeRegion* region = nullptr;
    bool stop_when_extinct = false;
};

namespace detail {
void clip_to_mode(const Lattice& lat, Configuration& state, Mode mode, const SpaceTimeRegion* region, double t);
}

// Forward event sweep of the graphical representation. Mutates `state` from
// time window.from to window.until (or to an early stop) and reports every
// change to the observer. Returns the time the sweep stopped at.
template <class Observer>
double sweep(const EventLog& log, Configuration& state, Mode mode, const SweepWindow& window, Observer& obs) {
    const Lattice& lat = log.lattice();
    const auto timeline = log.timeline();
    const double p = log.params().p;
    const bool richardson = mode.kind == ModeKind::Richardson;
    const bool truncated = mode.kind == ModeKind::Truncated;
    const int trunc = mode.truncation;
    const SpaceTimeRegion* region = window.region;

    detail::clip_to_mode(lat, state, mode, region, window.from);
    std::size_t infected = state.infected_count();
    if (window.stop_when_extinct && infected == 0) return window.from;

    std::size_t next_close = 0;
    if (region) {
        const auto& ct = region->close_times();
        next_close = static_cast<std::size_t>(std::upper_bound(ct.begin(), ct.end(), window.from) - ct.begin());
    }
    auto close_until = [&](double t, bool inclusive) -> bool {
        const auto& ct = region->close_times();
        while (next_close < ct.size() && (ct[next_close] < t || (inclusive && ct[next_close] <= t))) {
            const double tc = ct[next_close++];
            for (std::uint32_t s = 0; s < state.size(); ++s) {
                if (state.infected[s] && !region->contains_after(lat.point(s), tc)) {
                    state.infected[s] = 0;
                    --infected;
                    if (!obs.on_jump(Jump{tc, s, JumpKind::Confinement}, state)) return false;
                    if (window.stop_when_extinct && infected == 0) return false;
                }
            }
        }
        return true;
    };

    auto it = std::upper_bound(timeline.begin(), timeline.end(), window.from,
                               [](double t, const Event& e) { return t < e.time; });
    for (; it != timeline.end(); ++it) {
        const Event& e = *it;
        if (e.time > window.until) break;
        if (region && !close_until(e.time, false)) return e.time;
        const std::uint32_t s = e.site;
        switch (e.kind) {
            case EventKind::BgFlip: {
                const std::uint8_t target = e.flips_to_one(p) ? 1 : 0;
                if (state.background[s] != target) {
                    state.background[s] = target;
                    if (!obs.on_jump(Jump{e.time, s, JumpKind::Background}, state)) return e.time;
                }
                break;
            }
            case EventKind::Recovery1:
            case EventKind::RecoveryExtra: {
                if (richardson || !state.infected[s]) break;
                if (e.kind == EventKind::RecoveryExtra && state.background[s]) break;
                state.infected[s] = 0;
                --infected;
                if (!obs.on_jump(Jump{e.time, s, JumpKind::Recovery}, state)) return e.time;
                if (window.stop_when_extinct && infected == 0) return e.time;
                break;
            }
            case EventKind::Arrow: {
                if (!state.infected[s]) break;
                const std::int32_t to = lat.neighbor(s, e.direction);
                if (to < 0) break;
                const auto target = static_cast<std::uint32_t>(to);
                if (truncated && lat.sup_norm(target) >= trunc) {
                    obs.on_blocked_arrow(e.time, s, target);
                    break;
                }
                if (region && !region->contains(lat.point(target), e.time)) {
                    obs.on_blocked_arrow(e.time, s, target);
                    break;
                }
                if (state.infected[target]) break;
                state.infected[target] = 1;
                ++infected;
                if (!obs.on_jump(Jump{e.time, target, JumpKind::Infection}, state)) return e.time;
                break;
            }
        }
    }
    if (region) close_until(window.until, true);
    return window.until;
}

// Piecewise-constant evolution recorded at jump times. states[0] is the
// initial configuration at jump_times[0] = from_time.
struct Trajectory {
    std::vector<double> jump_times;
    std::vector<Configuration> states;
    Mode mode;
    std::optional<double> extinction_time;

    const Configuration& state_at(double t) const;
    bool infected_at(std::uint32_t site, double t) const { return state_at(t).infected[site] != 0; }
};

// Runs the process from `init` at `from_time` to the log's horizon. In
// Truncated mode, initially infected sites outside (-L, L)^d are dropped.
Trajectory simulate(const EventLog& log, const Configuration& init, double from_time, Mode mode);

std::vector<Trajectory> coupled_simulate(const EventLog& log, std::span<const Configuration> inits, Mode mode);

// a <= b (pairwise, background and infection) at every jump time of either.
bool trajectories_ordered(const Trajectory& a, const Trajectory& b);
// Infection sets of `whole` equal the union of those of `parts` at every time.
bool trajectory_is_union(const Trajectory& whole, std::span<const Trajectory> parts);

// beta0-active path from (x, s) to (y, t), decided by a forward sweep.
bool active_path_exists(const EventLog& log, const BitArray& beta0, const Point& from, double s, const Point& to,
                        double t);

// Reachable points on the sides of [-L, L]^d x [0, T] for the process started
// from A with the all-0 background.
struct BoundaryStats {
    std::map<std::uint32_t, std::vector<double>> side_points;  // boundary site -> reach times
    std::size_t n_count = 0;       // over |x|_inf = L
    std::size_t n_plus_count = 0;  // over x_1 = L, x_i >= 0
};

BoundaryStats boundary_stats(const EventLog& log, std::span<const Point> A, int L, double T);

// Largest subset of sorted times with pairwise gaps >= separation
// (earliest-first greedy).
std::size_t max_separated_count(std::span<const double> sorted_times, double separation = 1.0);

// Offsets of the cube [-n, n]^d, lexicographic.
std::vector<Point> cube_offsets(int dim, int n);
// x + [-n, n]^d lies in the box and is entirely infected.
bool cube_covered(const Lattice& lat, const BitArray& infected, const Point& x, std::span<const Point> offsets);

struct CoverWitness {
    double time = 0.0;
    Point center{};
};

// Sweeps `state` from `from` and returns the earliest time s in
// [check_from, check_until) (closed at the end when close_end) at which some
// x + [-n, n]^d with x in `centers` is fully infected; ties go to the
// lexicographically smallest x. Leaves `state` at the stopping time.
std::optional<CoverWitness> first_cover(const EventLog& log, Configuration& state, Mode mode,
                                        const SpaceTimeRegion* region, double from, double check_from,
                                        double check_until, bool close_end, std::vector<Point> centers, int n);

// Lower bound (delta1 / (delta0 + gamma + 2d))^M on extinction from any state
// with at most M infected sites.
double extinction_lower_bound(const Params& params, int M);
// Side-count variant with the extra factor e^{-4d} per point.
double side_extinction_lower_bound(const Params& params, int k);

}  // namespace cpree
