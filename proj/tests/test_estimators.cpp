#include "doctest.h"

#include <cmath>

#include "cpree/estimators.hpp"
#include "cpree/oracle.hpp"
#include "cpree/rng.hpp"
#include "support.hpp"

using namespace cpree;

namespace {

Params params(double gamma, double d0, double d1, double p, int d = 1) {
    Params q;
    q.d = d;
    q.gamma = gamma;
    q.delta0 = d0;
    q.delta1 = d1;
    q.p = p;
    return q;
}

const Params kOracle = params(1, 2, 0.5, 0.5);

double ref_prob(const Params& p, const std::vector<double>& q, const std::vector<int>& inf, double t,
                const std::function<bool(const std::vector<ref::Site>&)>& pred) {
    const int n = static_cast<int>(q.size());
    return ref::prob(ref::evolve(ref::product_law(q, inf), ref::generator(p, n, false), t), n, pred);
}

bool agrees(const Estimate& e, double exact) { return std::abs(e.value - exact) <= 3.0 * e.half_width(); }

}  // namespace

TEST_CASE("statistics helpers") {
    const auto e = proportion_estimate(30, 100);
    CHECK(e.value == doctest::Approx(0.3));
    CHECK(e.ci_low < 0.3);
    CHECK(e.ci_high > 0.3);
    const auto zero = proportion_estimate(0, 50);
    CHECK(zero.ci_low == 0.0);
    CHECK(zero.ci_high > 0.0);
    CHECK(proportion_estimate(50, 50).ci_high == doctest::Approx(1.0));
    const auto diff = difference_estimate(e, e);
    CHECK(diff.value == 0.0);
    CHECK(within_sigma(diff, 0.0));
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(hex64(255) == "00000000000000ff");
    CHECK(Digest().add(std::string_view("a")).value() != Digest().add(std::string_view("b")).value());
}

TEST_CASE("survival") {
    InitLaw none;
    const auto empty = estimate_survival(kOracle, none, Box{1}, 1.0, 500, 1);
    CHECK(empty.value == 0.0);
    CHECK(empty.successes == 0);

    InitLaw one;
    one.infected = {Point{0}};
    const auto lone = estimate_survival(params(1, 1, 1, 0.5), one, Box{0}, 1.0, 40000, 2);
    CHECK(within_sigma(lone, std::exp(-1.0)));
    CHECK(lone.ci_low <= lone.value);
    CHECK(lone.value <= lone.ci_high);

    InitLaw law;
    law.background = Stationary{};
    law.infected = {Point{0}};
    const auto e = estimate_survival(kOracle, law, Box{1}, 1.0, 40000, 3);
    const double exact = ref_prob(kOracle, {0.5, 0.5, 0.5}, {0, 1, 0}, 1.0, [](const auto& c) {
        return c[0].inf || c[1].inf || c[2].inf;
    });
    CHECK(agrees(e, exact));
    CHECK(e == estimate_survival(kOracle, law, Box{1}, 1.0, 40000, 3));
    CHECK_THROWS(estimate_survival(kOracle, law, Box{1}, 1.0, 0, 3));
}

TEST_CASE("duality") {
    const std::vector<Point> A = {Point{0}}, B = {Point{-1}, Point{0}, Point{1}};
    const auto same = estimate_duality_residual(kOracle, B, B, 0.5, Box{1}, 5000, 4);
    CHECK(same.residual.value == 0.0);
    CHECK(same.forward == same.backward);

    const auto sym = estimate_duality_residual(kOracle, {Point{0}}, {Point{1}}, 1.0, Box{3}, 20000, 5);
    CHECK(within_sigma(sym.residual, 0.0));

    const auto r = estimate_duality_residual(kOracle, A, B, 0.5, Box{1}, 40000, 6);
    const double fwd = ref_prob(kOracle, {0.5, 0.5, 0.5}, {0, 1, 0}, 0.5, [](const auto& c) {
        return c[0].inf || c[1].inf || c[2].inf;
    });
    const double bwd = ref_prob(kOracle, {0.5, 0.5, 0.5}, {1, 1, 1}, 0.5, [](const auto& c) { return c[1].inf == 1; });
    CHECK(std::abs(fwd - bwd) < 1e-9);
    CHECK(agrees(r.forward, fwd));
    CHECK(agrees(r.backward, bwd));
    CHECK(within_sigma(r.residual, 0.0));
    CHECK_THROWS(estimate_duality_residual(kOracle, {}, B, 0.5, Box{1}, 10, 6));
    CHECK_THROWS(estimate_duality_residual(kOracle, {Point{2}}, B, 0.5, Box{1}, 10, 6));
}

TEST_CASE("upper density") {
    CHECK(estimate_upper_density(kOracle, 0.0, Box{2}, 100, 7).value == 1.0);
    const auto dead = estimate_upper_density(params(1, 50, 50, 0.5), 1.0, Box{5}, 5000, 8);
    CHECK(dead.value < 0.05);

    const auto e = estimate_upper_density(kOracle, 0.5, Box{1}, 40000, 9);
    const double exact = ref_prob(kOracle, {1, 1, 1}, {1, 1, 1}, 0.5, [](const auto& c) { return c[1].inf == 1; });
    CHECK(agrees(e, exact));

    const std::vector<double> grid = {0.0, 0.25, 0.5, 1.0, 2.0};
    const auto curve = upper_density_curve(kOracle, grid, Box{1}, 2000, 9);
    for (std::size_t k = 0; k < grid.size(); ++k) CHECK(curve[k] == estimate_upper_density(kOracle, grid[k], Box{1}, 2000, 9));
    for (std::size_t k = 1; k < grid.size(); ++k) CHECK(curve[k].value <= curve[k - 1].value + 3 * curve[k].half_width());
    CHECK_THROWS(upper_density_curve(kOracle, {1.0, 0.5}, Box{1}, 10, 9));
}

TEST_CASE("critical scan") {
    const std::vector<double> grid = {0.1, 0.3, 0.5, 0.7, 0.9};
    InitLaw law;
    law.background = Stationary{};
    law.infected = {Point{0}, Point{1}};
    const auto flat = scan_critical(params(1, 1.1, 1.1, 0.5), grid, law, Box{10}, 5, 300, 0.5, 10);
    CHECK(flat.p_invariant);
    CHECK_FALSE(flat.pseudo_critical.has_value());
    for (const auto& e : flat.estimates) CHECK(e.value == flat.estimates.front().value);

    const auto scan = scan_critical(params(2, 3.0, 0.3, 0.5), grid, law, Box{10}, 5, 300, 0.5, 11);
    CHECK_FALSE(scan.p_invariant);
    CHECK(scan.pathwise_monotone);
    for (std::size_t k = 1; k < grid.size(); ++k) CHECK(scan.estimates[k].successes >= scan.estimates[k - 1].successes);
    CHECK(scan.estimates.back().value > scan.estimates.front().value);

    CHECK_THROWS(scan_critical(kOracle, {}, law, Box{5}, 5, 10, 0.5, 1));
    CHECK_THROWS(scan_critical(kOracle, {0.5, 0.4}, law, Box{5}, 5, 10, 0.5, 1));
    CHECK_THROWS(scan_critical(kOracle, {0.5}, law, Box{5}, 5, 10, 1.0, 1));
}

TEST_CASE("threshold crossing") {
    CHECK(threshold_crossing({0, 1, 2}, {0.1, 0.3, 0.7}, 0.5) == doctest::Approx(1.5));
    CHECK_FALSE(threshold_crossing({0, 1}, {0.1, 0.2}, 0.5).has_value());
    CHECK(threshold_crossing({0, 1}, {0.1, 0.5}, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("fstc") {
    CHECK(parse_fstc_variant("fstc2") == FstcVariant::Fstc2);
    CHECK_THROWS(parse_fstc_variant("fstc4"));
    const auto tiny = estimate_fstc(params(1, 20, 20, 0.5), 2, 3, 0.01, FstcVariant::Fstc1, 2000, 12);
    CHECK(tiny.value < 0.01);
    CHECK(tiny == estimate_fstc(params(1, 20, 20, 0.5), 2, 3, 0.01, FstcVariant::Fstc1, 2000, 12));
    CHECK_THROWS(estimate_fstc(kOracle, 3, 3, 1, FstcVariant::Fstc1, 10, 1));
    FstcOptions small;
    small.box_half_width = 3;
    CHECK_THROWS(estimate_fstc(kOracle, 1, 3, 1, FstcVariant::Fstc1, 10, 1, small));

    // pathwise: fstc1 grows with L, fstc2 with T, on one shared log
    const Params p = params(1, 0.6, 0.6, 0.5);
    const int n = 1;
    int seen1 = 0, seen2 = 0;
    for (int rep = 0; rep < 150; ++rep) {
        const auto log = build_event_log(p, Box{fstc_box_needed(FstcVariant::Fstc2, n, 8)}, 9.0, 700 + rep);
        bool prev = false;
        for (int L = 2; L <= 8; ++L) {
            const bool now = fstc_event(log, FstcVariant::Fstc1, n, L, 4.0);
            REQUIRE((!prev || now));
            prev = now;
        }
        seen1 += prev;
        prev = false;
        for (double T : {1.0, 2.0, 4.0, 8.0}) {
            const bool now = fstc_event(log, FstcVariant::Fstc2, n, 4, T);
            REQUIRE((!prev || now));
            prev = now;
        }
        seen2 += prev;
    }
    CHECK(seen1 > 0);
    CHECK(seen2 > 0);
}

TEST_CASE("orthant inequalities") {
    const Params p = params(1, 1, 0.5, 0.5);
    const auto rep = check_orthant_inequalities(p, 1, 5, 4.0, {1, 2, 4}, {1, 2}, 3000, 13);
    CHECK_FALSE(rep.degenerate);
    CHECK(rep.rows.size() == 5);
    CHECK(rep.all_hold());
    for (const auto& r : rep.rows) {
        if (r.inequality == "size") {
            CHECK(r.rhs_exponent == 0.5);
        } else {
            CHECK(r.lhs_exponent == 2.0);
        }
        CHECK(r.lhs_value == doctest::Approx(std::pow(r.lhs.value, r.lhs_exponent)));
    }

    const auto huge = check_orthant_inequalities(p, 1, 5, 4.0, {1000}, {1000}, 500, 13);
    for (const auto& r : huge.rows) {
        CHECK(r.lhs.value == 1.0);
        CHECK(r.rhs.value == 1.0);
        CHECK(r.margin == 0.0);
        CHECK(r.holds);
    }
    const auto flat = check_orthant_inequalities(p, 1, 5, 0.0, {1}, {1}, 100, 13);
    CHECK(flat.degenerate);
    CHECK_THROWS(check_orthant_inequalities(p, 5, 5, 1.0, {1}, {1}, 10, 1));

    // a sample against direct counting
    const auto log = build_event_log(p, Box{5}, 4.0, 99);
    const auto s = orthant_sample(log, 1, 5, 4.0);
    Configuration c(log.lattice().size());
    for (int x = -1; x <= 1; ++x) c.infected[log.lattice().index(Point{x})] = 1;
    const auto tr = simulate(log, c, 0, Mode::truncated(5));
    const auto& last = tr.state_at(4.0).infected;
    std::uint32_t total = 0, orth = 0;
    for (std::uint32_t i = 0; i < last.size(); ++i)
        if (last[i]) {
            ++total;
            orth += log.lattice().point(i)[0] >= 0;
        }
    CHECK(s.total_count == total);
    CHECK(s.orthant_count == orth);
}

TEST_CASE("truncated size staircase trends upward") {
    const Params p = params(2, 0.5, 0.5, 0.5);
    const std::vector<std::pair<int, double>> steps = {{3, 1.0}, {6, 2.0}, {12, 4.0}, {24, 8.0}};
    const auto es = truncated_size_staircase(p, {Point{0}}, 5, steps, 2000, 14);
    for (std::size_t k = 1; k < es.size(); ++k) CHECK(es[k].value >= es[k - 1].value - 3 * es[k].half_width());
    CHECK(es.back().value > es.front().value);
    InitLaw law;
    law.infected = {Point{0}};
    const auto surv = estimate_survival(p, law, Box{24}, 8.0, 2000, 15);
    CHECK(es.back().value <= surv.value + 3 * surv.half_width());
}

TEST_CASE("Richardson set inside phi") {
    // against a time-grid check on the explicit trajectory and phi fields
    const Params p = params(2, 1, 1, 0.5);
    for (int rep = 0; rep < 20; ++rep) {
        const auto log = build_event_log(p, Box{12}, 4.0, 50 + rep);
        Configuration c(log.lattice().size());
        c.infected[log.lattice().origin()] = 1;
        const auto tr = simulate(log, c, 0, Mode::richardson());
        for (double n : {0.5, 1.0, 2.0, 4.0}) {
            std::vector<double> times = {n};
            for (double t : tr.jump_times)
                if (t >= n) times.push_back(t);
            for (std::uint32_t s = 0; s < log.lattice().size(); ++s)
                for (const auto& e : log.site_events(s))
                    if (e.kind == EventKind::BgFlip && e.time >= n) times.push_back(e.time);
            bool inside = true;
            for (double t : times) {
                const auto phi = phi_field(log, t);
                const auto& inf = tr.state_at(t).infected;
                for (std::size_t i = 0; i < inf.size(); ++i) inside = inside && (!inf[i] || phi[i]);
            }
            CHECK(richardson_in_phi(log, n) == inside);
        }
    }
    const auto es = estimate_richardson_in_phi(p, {1, 2, 4, 8}, Box{30}, 10, 1000, 16);
    for (std::size_t k = 1; k < es.size(); ++k) CHECK(es[k].successes >= es[k - 1].successes);
}

TEST_CASE("serial and parallel loops agree exactly") {
    const Exec serial = Exec::reference(), par{4, false};
    InitLaw law;
    law.background = Stationary{};
    law.infected = {Point{0}};
    CHECK(estimate_survival(kOracle, law, Box{5}, 3, 500, 17, serial) ==
          estimate_survival(kOracle, law, Box{5}, 3, 500, 17, par));
    const auto a = scan_critical(kOracle, {0.2, 0.6}, law, Box{5}, 3, 300, 0.5, 18, serial);
    const auto b = scan_critical(kOracle, {0.2, 0.6}, law, Box{5}, 3, 300, 0.5, 18, par);
    CHECK(a.estimates == b.estimates);
    const auto x = check_orthant_inequalities(kOracle, 1, 4, 2, {1}, {1}, 300, 19, serial);
    const auto y = check_orthant_inequalities(kOracle, 1, 4, 2, {1}, {1}, 300, 19, par);
    CHECK(x.rows[0].lhs == y.rows[0].lhs);
    CHECK(x.rows[1].rhs == y.rows[1].rhs);
    auto failing = [](std::uint64_t i) -> int {
        if (i == 57) throw std::runtime_error("boom");
        return 0;
    };
    CHECK_THROWS_AS(replicate_map<int>(100, par, failing), std::runtime_error);
}
