#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "cpree/event_log.hpp"

namespace cpree {

using BitArray = std::vector<std::uint8_t>;

// A (background, infected) pair over the sites of one box.
struct Configuration {
    BitArray background;
    BitArray infected;

    Configuration() = default;
    explicit Configuration(std::size_t sites) : background(sites, 0), infected(sites, 0) {}

    std::size_t size() const { return infected.size(); }
    std::size_t infected_count() const;
    bool any_infected() const;
    friend bool operator==(const Configuration&, const Configuration&) = default;
};

// Coordinatewise order on bit arrays and on pairs.
bool bits_leq(const BitArray& a, const BitArray& b);
bool config_leq(const Configuration& a, const Configuration& b);

struct AllZero {};
struct AllOne {};
struct Product {
    double q = 0.5;
};
// Product measure at the density of the run's own p; under the shared uniforms
// of sample_initial it is monotone in p.
struct Stationary {};
struct Explicit {
    BitArray bits;
};
using BackgroundLaw = std::variant<AllZero, AllOne, Product, Stationary, Explicit>;

struct InitLaw {
    BackgroundLaw background = AllZero{};
    std::vector<Point> infected;
};

// Background sampled per law (site x is 1 iff u_x < q with u_x drawn from the
// (seed, x) substream); infected set exactly law.infected.
Configuration sample_initial(const InitLaw& law, const Params& params, const Box& box, std::uint64_t seed);

// Piecewise-constant 0/1 path of one site's background on [start, end].
struct BackgroundPath {
    double start = 0.0;
    double end = 0.0;
    bool initial = false;
    std::vector<double> flip_times;  // times at which the value changes

    bool value_at(double t) const;
};

BackgroundPath background_path(const EventLog& log, const Point& site, bool initial_bit, double from_time);

// Transient law of the two-state chain with 0->1 rate gamma*p and 1->0 rate
// gamma*(1-p).
double background_transition_prob(double gamma, double p, double t, bool from_bit, bool to_bit);

// Time at which the backgrounds started from all-0 and all-1 at time 0 first
// agree at each site: the first BgFlip of any mark. +inf if none in the log.
std::vector<double> agreement_times(const EventLog& log);

// phi_t(x) = 1{B_t started from all-0 equals B_t started from all-1}.
BitArray phi_field(const EventLog& log, double t);

}  // namespace cpree
