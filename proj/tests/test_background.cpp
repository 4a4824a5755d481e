#include "doctest.h"

#include <cmath>

#include "cpree/background.hpp"
#include "cpree/dynamics.hpp"
#include "cpree/rng.hpp"
#include "support.hpp"

using namespace cpree;

namespace {

Params params(double gamma, double p, int d = 1) {
    Params q;
    q.d = d;
    q.gamma = gamma;
    q.delta0 = 1;
    q.delta1 = 1;
    q.p = p;
    return q;
}

}  // namespace

TEST_CASE("transition probabilities of the two-state chain") {
    CHECK(background_transition_prob(2, 0.3, 0, false, true) == 0.0);
    CHECK(background_transition_prob(2, 0.3, 0, true, true) == 1.0);
    CHECK(background_transition_prob(2, 0.3, 1, false, true) == doctest::Approx(0.3 * (1 - std::exp(-2.0))).epsilon(1e-14));
    CHECK(background_transition_prob(2, 0.3, 1, false, true) == doctest::Approx(0.2594).epsilon(1e-3));
    CHECK(background_transition_prob(1, 0.7, 80, false, true) == doctest::Approx(0.7));
    CHECK(background_transition_prob(1, 0.7, 80, true, true) == doctest::Approx(0.7));
    CHECK(background_transition_prob(1, 0.7, 0.4, true, false) + background_transition_prob(1, 0.7, 0.4, true, true) ==
          doctest::Approx(1.0));
    CHECK_THROWS(background_transition_prob(1, 0.5, -1, false, true));
}

TEST_CASE("closed form matches the dense reference chain") {
    Params q = params(2, 0.3);
    const auto Q = ref::generator(q, 1, false);
    const auto mu = ref::evolve(ref::product_law({0.0}, {0}), Q, 1.0);
    const double exact = ref::prob(mu, 1, [](const auto& c) { return c[0].bg == 1; });
    CHECK(background_transition_prob(2, 0.3, 1, false, true) == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("background_path examples") {
    const Params p = params(1, 0.5);
    const auto quiet = EventLog::from_events(p, Box{0}, 3.0, 0, {{1.0, 0.0, 0, EventKind::Recovery1, 0}});
    auto path = background_path(quiet, Point{}, true, 0.0);
    CHECK(path.flip_times.empty());
    CHECK(path.value_at(2.5));

    const auto one = EventLog::from_events(p, Box{0}, 3.0, 0, {{1.2, 0.1, 0, EventKind::BgFlip, 0}});
    path = background_path(one, Point{}, false, 0.5);
    REQUIRE(path.flip_times.size() == 1);
    CHECK(path.flip_times[0] == 1.2);
    CHECK_FALSE(path.value_at(1.1999));
    CHECK(path.value_at(1.2));
    CHECK(path.value_at(3.0));
    // the flip lies before the start, so it is not used
    CHECK(background_path(one, Point{}, false, 1.5).flip_times.empty());
    // flip to the current value changes nothing
    CHECK(background_path(one, Point{}, true, 0.0).flip_times.empty());
    CHECK_THROWS(background_path(one, Point{2}, false, 0.0));
}

TEST_CASE("empirical P[B_1 = 1] from 0") {
    const Params p = params(2, 0.3);
    const int n = 100000;
    int hits = 0;
    for (int s = 0; s < n; ++s) {
        const auto log = build_event_log(p, Box{0}, 1.0, s);
        hits += background_path(log, Point{}, false, 0.0).value_at(1.0);
    }
    CHECK(ref::within(static_cast<double>(hits) / n, 0.3 * (1 - std::exp(-2.0)), n));
}

TEST_CASE("phi field") {
    const Params p = params(1, 0.5);
    const auto log = build_event_log(p, Box{300}, 2.0, 4);
    const auto phi0 = phi_field(log, 0.0);
    CHECK(std::all_of(phi0.begin(), phi0.end(), [](auto v) { return v == 0; }));
    const auto phi1 = phi_field(log, 1.0);
    const auto phi2 = phi_field(log, 2.0);
    CHECK(bits_leq(phi0, phi1));
    CHECK(bits_leq(phi1, phi2));
    const double density = static_cast<double>(std::count(phi1.begin(), phi1.end(), 1)) / phi1.size();
    CHECK(ref::within(density, 1 - std::exp(-1.0), phi1.size()));
    CHECK_THROWS(phi_field(log, 2.5));
    CHECK_THROWS(phi_field(log, -0.1));

    // against two explicit background runs from all-0 and all-1
    for (std::uint32_t s = 0; s < log.lattice().size(); s += 37) {
        const Point x = log.lattice().point(s);
        const bool lo = background_path(log, x, false, 0).value_at(1.0);
        const bool hi = background_path(log, x, true, 0).value_at(1.0);
        CHECK(phi1[s] == (lo == hi));
    }
}

TEST_CASE("phi marginal over many sites and seeds") {
    const Params p = params(1, 0.5);
    std::uint64_t hits = 0, total = 0;
    for (int s = 0; s < 50; ++s) {
        const auto phi = phi_field(build_event_log(p, Box{500}, 1.0, 900 + s), 1.0);
        hits += std::count(phi.begin(), phi.end(), 1);
        total += phi.size();
    }
    CHECK(ref::within(static_cast<double>(hits) / total, 0.63212, total));
}

TEST_CASE("agreement time is exponential with mean 1/gamma") {
    const Params p = params(2.5, 0.5);
    const auto log = build_event_log(p, Box{5000}, 50.0, 17);
    const auto times = agreement_times(log);
    double sum = 0, sq = 0;
    for (double t : times) {
        REQUIRE(std::isfinite(t));
        sum += t;
        sq += t * t;
    }
    const double n = static_cast<double>(times.size());
    CHECK(std::abs(sum / n - 0.4) <= 3 * 0.4 / std::sqrt(n));
}

TEST_CASE("sample_initial laws") {
    const Params p2 = params(1, 0.5, 2);
    const Box box{158};  // 317^2 sites
    InitLaw law;
    law.background = Product{0.0};
    auto c = sample_initial(law, p2, box, 1);
    CHECK(std::count(c.background.begin(), c.background.end(), 1) == 0);
    law.background = Product{1.0};
    c = sample_initial(law, p2, box, 1);
    CHECK(static_cast<std::size_t>(std::count(c.background.begin(), c.background.end(), 1)) == c.size());
    law.background = Product{0.4};
    c = sample_initial(law, p2, box, 1);
    CHECK(ref::within(static_cast<double>(std::count(c.background.begin(), c.background.end(), 1)) / c.size(), 0.4,
                      c.size()));
    CHECK(c == sample_initial(law, p2, box, 1));
    CHECK(!(c == sample_initial(law, p2, box, 2)));

    const Params p = params(1, 0.5);

    law.infected = {Point{3}, Point{-2}};
    c = sample_initial(law, p, Box{4}, 9);
    CHECK(c.infected_count() == 2);
    CHECK(c.infected[Lattice(1, Box{4}).index(Point{3})] == 1);
    law.infected = {Point{5}};
    CHECK_THROWS(sample_initial(law, p, Box{4}, 9));

    // Stationary uses p and the same uniforms as Product(p)
    law.infected.clear();
    law.background = Stationary{};
    const auto st = sample_initial(law, p, Box{100}, 3);
    law.background = Product{0.5};
    CHECK(st == sample_initial(law, p, Box{100}, 3));
}

TEST_CASE("stationarity of Product(p)") {
    const Params p = params(1.3, 0.35);
    InitLaw law;
    law.background = Stationary{};
    std::uint64_t ones = 0, pairs = 0, total = 0;
    for (int s = 0; s < 40; ++s) {
        const auto log = build_event_log(p, Box{500}, 2.0, 5000 + s);
        Configuration c = sample_initial(law, p, log.box(), 6000 + s);
        SweepObserver obs;
        sweep(log, c, Mode::full(), SweepWindow{0.0, 2.0}, obs);
        for (std::size_t i = 0; i + 1 < c.size(); ++i) {
            ones += c.background[i];
            pairs += c.background[i] & c.background[i + 1];
        }
        total += c.size() - 1;
    }
    CHECK(ref::within(static_cast<double>(ones) / total, 0.35, total));
    CHECK(ref::within(static_cast<double>(pairs) / total, 0.35 * 0.35, total));
}

TEST_CASE("coupled backgrounds stay ordered") {
    const Params p = params(1, 0.6);
    const auto log = build_event_log(p, Box{20}, 5.0, 8);
    InitLaw lo, hi;
    lo.background = Product{0.3};
    hi.background = Product{0.7};
    const auto a = sample_initial(lo, p, log.box(), 4);
    const auto b = sample_initial(hi, p, log.box(), 4);
    REQUIRE(bits_leq(a.background, b.background));
    for (std::uint32_t s = 0; s < log.lattice().size(); ++s) {
        const Point x = log.lattice().point(s);
        const auto pa = background_path(log, x, a.background[s], 0);
        const auto pb = background_path(log, x, b.background[s], 0);
        for (double t = 0; t <= 5.0; t += 0.01) REQUIRE(pa.value_at(t) <= pb.value_at(t));
    }
}
