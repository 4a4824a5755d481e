#include "doctest.h"

#include <bit>
#include <cmath>
#include <sstream>

#include "cpree/oracle.hpp"
#include "support.hpp"

using namespace cpree;
namespace o = cpree::oracle;

namespace {

Params params(double gamma, double d0, double d1, double p) {
    Params q;
    q.gamma = gamma;
    q.delta0 = d0;
    q.delta1 = d1;
    q.p = p;
    return q;
}

std::vector<std::uint8_t> mask(int n, unsigned bits) {
    std::vector<std::uint8_t> m(n);
    for (int i = 0; i < n; ++i) m[i] = bits >> i & 1;
    return m;
}

}  // namespace

TEST_CASE("single-site rates") {
    const Params p = params(1.5, 2.0, 0.5, 0.3);
    const auto g = o::build_generator(p, 1, Boundary::Closed);
    CHECK(g.n_states() == 4);
    const auto s = [](int bg, int inf) { return o::encode({static_cast<std::uint8_t>(bg)}, {static_cast<std::uint8_t>(inf)}); };
    CHECK(g.rate(s(0, 1), s(0, 0)) == 2.0);
    CHECK(g.rate(s(1, 1), s(1, 0)) == 0.5);
    CHECK(g.rate(s(0, 0), s(1, 0)) == doctest::Approx(1.5 * 0.3));
    CHECK(g.rate(s(0, 1), s(1, 1)) == doctest::Approx(1.5 * 0.3));
    CHECK(g.rate(s(1, 0), s(0, 0)) == doctest::Approx(1.5 * 0.7));
    CHECK(g.rate(s(0, 0), s(0, 1)) == 0.0);
    CHECK(g.rate(s(1, 0), s(1, 1)) == 0.0);
    CHECK(s(1, 1) == 3);
}

TEST_CASE("two-site infection rate and encoding") {
    const Params p = params(1, 1, 1, 0.5);
    const auto g = o::build_generator(p, 2, Boundary::Closed);
    const auto from = o::encode({0, 0}, {0, 1});
    const auto to = o::encode({0, 0}, {1, 1});
    CHECK(g.rate(from, to) == 1.0);
    CHECK(from == 8);
    CHECK(o::infected_bit(from, 1));
    CHECK_FALSE(o::background_bit(from, 1));
    const auto ring = o::build_generator(p, 2, Boundary::Periodic);
    CHECK(ring.rate(from, to) == 2.0);
}

TEST_CASE("generator agrees with the dense reference and rows sum to zero") {
    for (const auto boundary : {Boundary::Closed, Boundary::Periodic})
        for (int n = 1; n <= 4; ++n) {
            const Params p = params(0.7, 3.0, 0.4, 0.65);
            const auto g = o::build_generator(p, n, boundary);
            const auto Q = ref::generator(p, n, boundary == Boundary::Periodic);
            REQUIRE(g.n_states() == Q.size());
            for (o::StateIndex s = 0; s < g.n_states(); ++s) {
                double sum = g.diagonal(s);
                for (const auto& e : g.row(s)) {
                    REQUIRE(e.rate > 0.0);
                    REQUIRE(e.to != s);
                    sum += e.rate;
                    // single-site moves only
                    const auto diff = s ^ e.to;
                    REQUIRE(std::has_single_bit(diff));
                }
                REQUIRE(std::abs(sum) < 1e-12);
                for (o::StateIndex t = 0; t < g.n_states(); ++t) REQUIRE(g.rate(s, t) == doctest::Approx(Q[s][t]));
            }
        }
    CHECK_THROWS(o::build_generator(params(1, 1, 1, 0.5), 5, Boundary::Closed));
    Params d2 = params(1, 1, 1, 0.5);
    d2.d = 2;
    CHECK_THROWS(o::build_generator(d2, 2, Boundary::Closed));
}

TEST_CASE("transient law against the dense Taylor exponential") {
    const Params p = params(1, 2, 0.5, 0.5);
    const auto g = o::build_generator(p, 3, Boundary::Closed);
    const auto Q = ref::generator(p, 3, false);
    const auto mu = o::product_initial(3, {0.2, 0.5, 0.9}, {1, 0, 1});
    CHECK(mu == ref::product_law({0.2, 0.5, 0.9}, {1, 0, 1}));
    for (double t : {0.1, 0.5, 1.0, 3.0}) {
        const auto a = o::transient_distribution(g, mu, t);
        const auto b = ref::evolve(mu, Q, t);
        double total = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            REQUIRE(a[i] >= 0.0);
            REQUIRE(std::abs(a[i] - b[i]) < 1e-9);
            total += a[i];
        }
        CHECK(std::abs(total - 1.0) < 1e-9);
    }
    CHECK(o::transient_distribution(g, mu, 0.0) == mu);
    CHECK_THROWS(o::transient_distribution(g, mu, -1.0));
    CHECK_THROWS(o::transient_distribution(g, mu, 1.0, 0.0));
    auto bad = mu;
    bad[0] += 0.5;
    CHECK_THROWS(o::transient_distribution(g, bad, 1.0));
}

TEST_CASE("closed-form anchors") {
    const Params p = params(1, 1, 1, 0.3);
    const auto g = o::build_generator(p, 1, Boundary::Closed);
    for (double q : {0.0, 1.0})
        CHECK(std::abs(o::exact_event_prob(g, o::product_initial(1, q, {1}), 1.0, o::any_infected(1)) - std::exp(-1.0)) <
              1e-10);
    const auto far = o::transient_distribution(g, o::product_initial(1, 0.0, {0}), 60.0);
    CHECK(std::abs(far[1] + far[3] - 0.3) < 1e-9);
    const auto g3 = o::build_generator(params(1, 2, 0.5, 0.5), 3, Boundary::Closed);
    const auto mu = o::product_initial(3, 0.5, {0, 1, 0});
    CHECK(std::abs(o::exact_event_prob(g3, mu, 2.0, [](o::StateIndex) { return true; }) - 1.0) < 1e-10);
    const auto empty = o::product_initial(3, 0.5, {0, 0, 0});
    auto none = [](o::StateIndex s) { return (s & 0b101010) == 0; };
    for (double t : {0.3, 1.0, 5.0}) CHECK(std::abs(o::exact_event_prob(g3, empty, t, none) - 1.0) < 1e-10);
}

TEST_CASE("semigroup property") {
    const auto g = o::build_generator(params(1.3, 2.2, 0.6, 0.4), 3, Boundary::Closed);
    const auto mu = o::product_initial(3, 0.4, {1, 1, 0});
    const auto a = o::transient_distribution(g, o::transient_distribution(g, mu, 0.7), 1.1);
    const auto b = o::transient_distribution(g, mu, 1.8);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 2e-10);
}

TEST_CASE("exact duality on three sites") {
    const Params p = params(1, 2, 0.5, 0.5);
    const auto g = o::build_generator(p, 3, Boundary::Closed);
    for (unsigned A = 1; A < 8; ++A)
        for (unsigned B = 1; B < 8; ++B) {
            const double fwd =
                o::exact_event_prob(g, o::product_initial(3, p.p, mask(3, A)), 0.8, o::meets(3, mask(3, B)));
            const double bwd =
                o::exact_event_prob(g, o::product_initial(3, p.p, mask(3, B)), 0.8, o::meets(3, mask(3, A)));
            REQUIRE(std::abs(fwd - bwd) <= 2e-10);
        }
}

TEST_CASE("equal recovery rates: infection marginal is p-invariant") {
    auto infection_law = [](double p, double t) {
        const auto g = o::build_generator(params(1, 1.5, 1.5, p), 3, Boundary::Closed);
        const auto d = o::transient_distribution(g, o::product_initial(3, p, {1, 0, 1}), t);
        std::vector<double> m(8, 0.0);
        for (o::StateIndex s = 0; s < d.size(); ++s) {
            unsigned inf = 0;
            for (int i = 0; i < 3; ++i) inf |= o::infected_bit(s, i) << i;
            m[inf] += d[s];
        }
        return m;
    };
    const auto a = infection_law(0.1, 1.2), b = infection_law(0.85, 1.2);
    for (int i = 0; i < 8; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10);
}

TEST_CASE("monotone pair at the law level") {
    const auto g = o::build_generator(params(1, 2, 0.5, 0.5), 2, Boundary::Closed);
    for (double t : {0.2, 1.0, 3.0}) {
        const double top = o::exact_event_prob(g, o::product_initial(2, 1.0, {1, 1}), t, o::any_infected(2));
        for (unsigned inf = 0; inf < 4; ++inf)
            for (double q : {0.0, 0.5, 1.0}) {
                const double lower = o::exact_event_prob(g, o::product_initial(2, q, mask(2, inf)), t, o::any_infected(2));
                CHECK(lower <= top + 1e-10);
            }
        const double site = o::exact_event_prob(g, o::product_initial(2, 1.0, {1, 1}), t, o::site_infected(0));
        CHECK(o::exact_event_prob(g, o::product_initial(2, 0.0, {1, 0}), t, o::site_infected(0)) <= site + 1e-10);
    }
}

TEST_CASE("fixture csv") {
    std::ostringstream out;
    o::write_fixture_csv(out, {{params(1, 2, 0.5, 0.5), 3, 0.5, "origin-infected", 0.25}});
    const std::string s = out.str();
    CHECK(s.find("origin-infected") != std::string::npos);
    CHECK(s.find("0.25") != std::string::npos);
    CHECK(std::count(s.begin(), s.end(), '\n') == 2);
}
