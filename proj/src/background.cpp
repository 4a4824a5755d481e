#include "cpree/background.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cpree/rng.hpp"

namespace cpree {

std::size_t Configuration::infected_count() const {
    return static_cast<std::size_t>(std::count(infected.begin(), infected.end(), std::uint8_t{1}));
}

bool Configuration::any_infected() const {
    return std::find(infected.begin(), infected.end(), std::uint8_t{1}) != infected.end();
}

bool bits_leq(const BitArray& a, const BitArray& b) {
    if (a.size() != b.size()) throw std::invalid_argument("bit arrays over different boxes");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}

bool config_leq(const Configuration& a, const Configuration& b) {
    return bits_leq(a.background, b.background) && bits_leq(a.infected, b.infected);
}

Configuration sample_initial(const InitLaw& law, const Params& params, const Box& box, std::uint64_t seed) {
    const Lattice lat(params.d, box);
    Configuration c(lat.size());

    auto product = [&](double q) {
        if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("product density must lie in [0, 1]");
        for (std::uint32_t s = 0; s < lat.size(); ++s) {
            Stream u(seed, stream_kind::initial_background, Lattice::site_code(lat.point(s)));
            c.background[s] = u.next_uniform() < q ? 1 : 0;
        }
    };
    std::visit(
        [&](const auto& bg) {
            using T = std::decay_t<decltype(bg)>;
            if constexpr (std::is_same_v<T, AllZero>) {
            } else if constexpr (std::is_same_v<T, AllOne>) {
                std::fill(c.background.begin(), c.background.end(), 1);
            } else if constexpr (std::is_same_v<T, Product>) {
                product(bg.q);
            } else if constexpr (std::is_same_v<T, Stationary>) {
                product(params.p);
            } else {
                if (bg.bits.size() != lat.size()) throw std::invalid_argument("explicit background has wrong size");
                for (std::size_t s = 0; s < lat.size(); ++s) c.background[s] = bg.bits[s] ? 1 : 0;
            }
        },
        law.background);

    for (const Point& x : law.infected) {
        if (!lat.contains(x)) throw std::invalid_argument("infected site " + format_point(x, params.d) + " outside box");
        c.infected[lat.index(x)] = 1;
    }
    return c;
}

bool BackgroundPath::value_at(double t) const {
    if (t < start || t > end) throw std::out_of_range("time outside background path");
    const auto flips = static_cast<std::size_t>(std::upper_bound(flip_times.begin(), flip_times.end(), t) -
                                                flip_times.begin());
    return initial != (flips % 2 == 1);
}

BackgroundPath background_path(const EventLog& log, const Point& site, bool initial_bit, double from_time) {
    if (!(from_time >= 0.0 && from_time <= log.horizon())) throw std::invalid_argument("start time outside window");
    const std::uint32_t idx = log.lattice().index(site);
    BackgroundPath path{from_time, log.horizon(), initial_bit, {}};
    bool state = initial_bit;
    const double p = log.params().p;
    for (std::uint32_t slot : log.site_slots(idx)) {
        const Event& e = log.timeline()[slot];
        if (e.kind != EventKind::BgFlip || e.time <= from_time) continue;
        const bool target = e.flips_to_one(p);
        if (target != state) {
            state = target;
            path.flip_times.push_back(e.time);
        }
    }
    return path;
}

double background_transition_prob(double gamma, double p, double t, bool from_bit, bool to_bit) {
    if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
    const double decay = std::exp(-gamma * t);
    const double to_one = from_bit ? p + (1.0 - p) * decay : p * (1.0 - decay);
    return to_bit ? to_one : 1.0 - to_one;
}

std::vector<double> agreement_times(const EventLog& log) {
    std::vector<double> out(log.lattice().size(), std::numeric_limits<double>::infinity());
    for (std::uint32_t s = 0; s < out.size(); ++s) {
        for (std::uint32_t slot : log.site_slots(s)) {
            const Event& e = log.timeline()[slot];
            if (e.kind == EventKind::BgFlip) {
                out[s] = e.time;
                break;
            }
        }
    }
    return out;
}

BitArray phi_field(const EventLog& log, double t) {
    if (!(t >= 0.0 && t <= log.horizon())) throw std::invalid_argument("time outside window");
    const auto agree = agreement_times(log);
    BitArray phi(agree.size(), 0);
    for (std::size_t s = 0; s < agree.size(); ++s) phi[s] = agree[s] <= t ? 1 : 0;
    return phi;
}

}  // namespace cpree
