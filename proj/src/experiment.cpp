#include "cpree/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "cpree/oracle.hpp"

namespace cpree {

using nlohmann::json;

const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Survival: return "survival";
        case ExperimentKind::Duality: return "duality";
        case ExperimentKind::UpperDensity: return "upper-density";
        case ExperimentKind::CriticalScan: return "critical-scan";
        case ExperimentKind::Fstc: return "fstc";
        case ExperimentKind::Orthant: return "orthant";
        case ExperimentKind::Blocks: return "blocks";
        case ExperimentKind::Field: return "field";
        case ExperimentKind::OpCompare: return "op-compare";
        case ExperimentKind::OracleCompare: return "oracle-compare";
    }
    return "?";
}

namespace {

ExperimentKind parse_kind(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(ExperimentKind::OracleCompare); ++i) {
        const auto k = static_cast<ExperimentKind>(i);
        if (s == to_string(k)) return k;
    }
    throw ConfigError("unknown experiment '" + s + "'");
}

// A JSON object whose keys must all be consumed.
class Fields {
public:
    Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j.is_object()) throw ConfigError(where_ + " must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        if (!j_.contains(key)) throw ConfigError(where_ + ": missing required key '" + key + "'");
        used_.insert(key);
        return j_.at(key);
    }

    double real(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) throw ConfigError(where_ + "." + key + " must be a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(where_ + "." + key + " must be finite");
        return x;
    }
    double real(const std::string& key, double fallback) { return has(key) ? real(key) : fallback; }

    std::int64_t integer(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number_integer()) throw ConfigError(where_ + "." + key + " must be an integer");
        return v.get<std::int64_t>();
    }
    std::int64_t integer(const std::string& key, std::int64_t fallback) { return has(key) ? integer(key) : fallback; }

    std::uint64_t unsigned_integer(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
            throw ConfigError(where_ + "." + key + " must be a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    std::string text(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) throw ConfigError(where_ + "." + key + " must be a string");
        return v.get<std::string>();
    }
    std::string text(const std::string& key, const std::string& fallback) { return has(key) ? text(key) : fallback; }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_boolean()) throw ConfigError(where_ + "." + key + " must be a boolean");
        return v.get<bool>();
    }

    std::vector<double> reals(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array() || v.empty()) throw ConfigError(where_ + "." + key + " must be a nonempty array");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) throw ConfigError(where_ + "." + key + " must hold numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    std::vector<int> integers(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array() || v.empty()) throw ConfigError(where_ + "." + key + " must be a nonempty array");
        std::vector<int> out;
        for (const auto& x : v) {
            if (!x.is_number_integer()) throw ConfigError(where_ + "." + key + " must hold integers");
            out.push_back(x.get<int>());
        }
        return out;
    }

    const std::string& where() const { return where_; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> used_;
};

Point parse_point(const json& v, int d, const std::string& where) {
    Point x{};
    if (v.is_number_integer()) {
        if (d != 1) throw ConfigError(where + ": scalar sites only in d = 1");
        x[0] = v.get<int>();
        return x;
    }
    if (!v.is_array() || static_cast<int>(v.size()) != d) throw ConfigError(where + ": a site needs " + std::to_string(d) + " coordinates");
    for (int j = 0; j < d; ++j) {
        if (!v[j].is_number_integer()) throw ConfigError(where + ": coordinates must be integers");
        x[j] = v[j].get<int>();
    }
    return x;
}

std::vector<Point> parse_sites(const json& v, int d, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + " must be an array of sites");
    std::vector<Point> out;
    for (const auto& x : v) out.push_back(parse_point(x, d, where));
    return out;
}

std::vector<Point> all_sites(int d, const Box& box) {
    const Lattice lat(d, box);
    std::vector<Point> out;
    for (std::uint32_t s = 0; s < lat.size(); ++s) out.push_back(lat.point(s));
    return out;
}

Params parse_params(const json& j) {
    Fields f(j, "params");
    Params p;
    p.d = static_cast<int>(f.integer("d"));
    p.gamma = f.real("gamma");
    p.delta0 = f.real("delta0");
    p.delta1 = f.real("delta1");
    p.p = f.real("p", 0.5);
    f.finish();
    if (p.d < 1 || p.d > kMaxDim) throw ConfigError("params.d must lie in [1, " + std::to_string(kMaxDim) + "]");
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("params: ") + e.what());
    }
    return p;
}

Box parse_box(const json& j) {
    Fields f(j, "box");
    Box b;
    b.half_width = static_cast<int>(f.integer("half_width"));
    const std::string boundary = f.text("boundary", "closed");
    f.finish();
    if (b.half_width < 0) throw ConfigError("box.half_width must be >= 0");
    if (boundary == "closed") b.boundary = Boundary::Closed;
    else if (boundary == "periodic") b.boundary = Boundary::Periodic;
    else throw ConfigError("box.boundary must be 'closed' or 'periodic'");
    return b;
}

InitLaw parse_init(const json& j, const Params& params, const Box& box) {
    Fields f(j, "init");
    InitLaw law;
    const json& bg = f.raw("background");
    if (bg.is_string()) {
        const std::string s = bg.get<std::string>();
        if (s == "zero") law.background = AllZero{};
        else if (s == "one") law.background = AllOne{};
        else if (s == "stationary") law.background = Stationary{};
        else throw ConfigError("init.background must be zero, one, stationary, {\"product\": q} or {\"explicit\": [...]}");
    } else if (bg.is_object() && bg.size() == 1 && bg.contains("product")) {
        if (!bg["product"].is_number()) throw ConfigError("init.background.product must be a number");
        const double q = bg["product"].get<double>();
        if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("init.background.product must lie in [0, 1]");
        law.background = Product{q};
    } else if (bg.is_object() && bg.size() == 1 && bg.contains("explicit")) {
        const Lattice lat(params.d, box);
        BitArray bits(lat.size(), 0);
        for (const Point& x : parse_sites(bg["explicit"], params.d, "init.background.explicit")) {
            if (!lat.contains(x)) throw ConfigError("init.background.explicit: site outside box");
            bits[lat.index(x)] = 1;
        }
        law.background = Explicit{bits};
    } else {
        throw ConfigError("init.background has an unsupported form");
    }
    const json& inf = f.raw("infected");
    if (inf.is_string()) {
        if (inf.get<std::string>() != "all") throw ConfigError("init.infected must be a site list or \"all\"");
        law.infected = all_sites(params.d, box);
    } else {
        law.infected = parse_sites(inf, params.d, "init.infected");
    }
    f.finish();
    const Lattice lat(params.d, box);
    for (const Point& x : law.infected)
        if (!lat.contains(x)) throw ConfigError("init.infected: site " + format_point(x, params.d) + " outside box");
    return law;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

void check_sites_in_box(const std::vector<Point>& xs, const Params& params, const Box& box, const std::string& what) {
    const Lattice lat(params.d, box);
    for (const Point& x : xs)
        require(lat.contains(x), what + ": site " + format_point(x, params.d) + " outside box");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const Overrides& ov) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    Fields f(j, "config");
    {
        const json& v = f.raw("version");
        require(v.is_number_integer() && v.get<int>() == 1, "config.version must be 1");
    }
    ExperimentConfig c;
    c.kind = parse_kind(f.text("experiment"));
    const auto k = c.kind;
    using K = ExperimentKind;

    if (ov.seed) c.master_seed = *ov.seed;
    else if (f.has("master_seed")) c.master_seed = f.unsigned_integer("master_seed");
    else if (ov.env_seed) c.master_seed = *ov.env_seed;
    else throw ConfigError("no master_seed: set it in the config, pass --seed, or set CPREE_SEED");
    if (ov.seed && f.has("master_seed")) f.raw("master_seed");

    c.workers = static_cast<int>(f.integer("workers", 1));
    if (ov.workers) c.workers = *ov.workers;
    require(c.workers >= 1, "workers must be >= 1");
    c.output_path = f.text("output_path", "");
    if (ov.out) c.output_path = *ov.out;
    c.series_path = f.text("series_path", "");

    {
        const std::int64_t r = f.integer("replicates");
        require(r >= 1, "replicates must be >= 1");
        c.replicates = static_cast<std::uint64_t>(r);
    }

    const bool needs_params = k != K::OpCompare;
    const bool needs_box = k == K::Survival || k == K::Duality || k == K::UpperDensity || k == K::CriticalScan ||
                           k == K::OracleCompare;
    const bool needs_horizon = k == K::Survival || k == K::CriticalScan || k == K::OracleCompare;
    if (needs_params) c.params = parse_params(f.raw("params"));
    if (needs_box) c.box = parse_box(f.raw("box"));
    if (needs_horizon) {
        c.horizon = f.real("horizon");
        require(c.horizon > 0.0, "horizon must be positive");
    }

    try {
        switch (k) {
            case K::Survival:
                c.init = parse_init(f.raw("init"), c.params, c.box);
                break;
            case K::Duality:
            case K::OracleCompare: {
                c.A = parse_sites(f.raw("A"), c.params.d, "A");
                c.B = parse_sites(f.raw("B"), c.params.d, "B");
                require(!c.A.empty() && !c.B.empty(), "A and B must be nonempty");
                check_sites_in_box(c.A, c.params, c.box, "A");
                check_sites_in_box(c.B, c.params, c.box, "B");
                c.t = f.real("t");
                require(c.t > 0.0, "t must be positive");
                if (k == K::OracleCompare) {
                    c.init = parse_init(f.raw("init"), c.params, c.box);
                    require(c.params.d == 1, "oracle-compare needs d = 1");
                    require(2 * c.box.half_width + 1 <= oracle::kMaxSites, "oracle-compare needs at most 4 sites");
                }
                break;
            }
            case K::UpperDensity:
                if (f.has("t_grid")) c.t_grid = f.reals("t_grid");
                else c.t_grid = {f.real("t")};
                for (std::size_t i = 0; i < c.t_grid.size(); ++i) {
                    require(c.t_grid[i] >= 0.0, "t values must be nonnegative");
                    require(i == 0 || c.t_grid[i] > c.t_grid[i - 1], "t_grid must be strictly increasing");
                }
                break;
            case K::CriticalScan:
                c.init = parse_init(f.raw("init"), c.params, c.box);
                c.p_grid = f.reals("p_grid");
                for (std::size_t i = 0; i < c.p_grid.size(); ++i) {
                    require(c.p_grid[i] >= 0.0 && c.p_grid[i] <= 1.0, "p_grid values must lie in [0, 1]");
                    require(i == 0 || c.p_grid[i] > c.p_grid[i - 1], "p_grid must be strictly increasing");
                }
                c.threshold = f.real("threshold", 0.5);
                require(c.threshold > 0.0 && c.threshold < 1.0, "threshold must lie in (0, 1)");
                break;
            case K::Fstc: {
                c.n = static_cast<int>(f.integer("n"));
                if (f.has("steps")) {
                    const json& s = f.raw("steps");
                    require(s.is_array() && !s.empty(), "steps must be a nonempty array of [L, T]");
                    for (const auto& st : s) {
                        require(st.is_array() && st.size() == 2 && st[0].is_number_integer() && st[1].is_number(),
                                "each step must be [L, T]");
                        c.steps.emplace_back(st[0].get<int>(), st[1].get<double>());
                    }
                } else {
                    c.steps.emplace_back(static_cast<int>(f.integer("L")), f.real("T"));
                }
                if (f.has("variants")) {
                    const json& v = f.raw("variants");
                    require(v.is_array() && !v.empty(), "variants must be a nonempty array");
                    for (const auto& s : v) {
                        require(s.is_string(), "variants must hold strings");
                        c.variants.push_back(parse_fstc_variant(s.get<std::string>()));
                    }
                } else {
                    c.variants.push_back(parse_fstc_variant(f.text("variant")));
                }
                require(c.n >= 0, "n must be >= 0");
                for (const auto& [L, T] : c.steps) {
                    require(c.n < L, "need n < L");
                    require(T > 0.0, "T must be positive");
                }
                std::sort(c.steps.begin(), c.steps.end());
                require(c.params.d <= 2, "fstc desk runs support d <= 2");
                break;
            }
            case K::Orthant:
                c.n = static_cast<int>(f.integer("n"));
                c.L = static_cast<int>(f.integer("L"));
                c.T = f.real("T");
                c.Ns = f.integers("N");
                c.Ms = f.integers("M");
                require(c.n >= 0 && c.n < c.L, "need 0 <= n < L");
                require(c.T >= 0.0, "T must be nonnegative");
                for (int v : c.Ns) require(v >= 1, "N values must be >= 1");
                for (int v : c.Ms) require(v >= 1, "M values must be >= 1");
                break;
            case K::Blocks:
            case K::Field: {
                Fields g(f.raw("geometry"), "geometry");
                c.geometry.n = static_cast<int>(g.integer("n"));
                c.geometry.a = static_cast<int>(g.integer("a"));
                c.geometry.b = g.real("b");
                c.geometry.k = static_cast<int>(g.integer("k"));
                g.finish();
                build_block_geometry(c.params.d, c.geometry.n, c.geometry.a, c.geometry.b, c.geometry.k);
                if (k == K::Blocks) {
                    c.reflected = f.boolean("reflected", false);
                    if (f.has("start")) {
                        Fields s(f.raw("start"), "start");
                        c.start_x = parse_point(s.raw("x"), c.params.d, "start.x");
                        c.start_t = s.real("t");
                        s.finish();
                    }
                    require(sup_norm(c.start_x, c.params.d) <= c.geometry.a && c.start_t >= 0.0 &&
                                c.start_t <= c.geometry.b,
                            "start must lie in [-a, a]^d x [0, b]");
                } else {
                    c.rows = static_cast<int>(f.integer("rows"));
                    c.cols = static_cast<int>(f.integer("cols"));
                    c.p_target = f.real("p_target", 0.25);
                    require(c.rows >= 2, "rows must be >= 2");
                    require(c.cols >= 3, "cols must be >= 3 for correlation estimates");
                    require(c.p_target >= 0.25 && c.p_target < 1.0, "p_target must lie in [1/4, 1)");
                }
                break;
            }
            case K::OpCompare:
                c.p_bond = f.reals("p_bond");
                for (double p : c.p_bond) require(p >= 0.0 && p <= 1.0, "p_bond values must lie in [0, 1]");
                c.depth = static_cast<int>(f.integer("depth"));
                require(c.depth >= 1, "depth must be >= 1");
                break;
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    f.finish();

    json canon = j;
    canon.erase("workers");
    canon.erase("output_path");
    canon.erase("series_path");
    canon["master_seed"] = c.master_seed;
    c.canonical = canon.dump();
    c.digest = Digest().add(std::string_view(c.canonical)).value();
    return c;
}

ExperimentConfig load_config(const std::string& path, const Overrides& ov) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), ov);
}

namespace {

ResultRow row_of(const ExperimentConfig& c, std::string name, const Estimate& e, std::string variant = "",
                 std::optional<double> exact = std::nullopt) {
    ResultRow r;
    r.estimator = std::move(name);
    r.params = c.params;
    r.box_L = c.box.half_width;
    r.horizon = c.horizon;
    r.variant = std::move(variant);
    r.estimate = e;
    r.exact = exact;
    return r;
}

Estimate plain(double value, double lo, double hi) {
    Estimate e;
    e.value = value;
    e.ci_low = lo;
    e.ci_high = hi;
    return e;
}

std::string describe(const Estimate& e) {
    return format_real(e.value) + " [" + format_real(e.ci_low) + ", " + format_real(e.ci_high) + "]";
}

oracle::Distribution oracle_initial(const ExperimentConfig& c, const InitLaw& law) {
    const Lattice lat(1, c.box);
    const int n = static_cast<int>(lat.size());
    std::vector<double> density(n, 0.0);
    std::vector<std::uint8_t> infected(n, 0);
    for (int s = 0; s < n; ++s) {
        std::visit(
            [&](const auto& bg) {
                using T = std::decay_t<decltype(bg)>;
                if constexpr (std::is_same_v<T, AllZero>) density[s] = 0.0;
                else if constexpr (std::is_same_v<T, AllOne>) density[s] = 1.0;
                else if constexpr (std::is_same_v<T, Product>) density[s] = bg.q;
                else if constexpr (std::is_same_v<T, Stationary>) density[s] = c.params.p;
                else density[s] = bg.bits[s] ? 1.0 : 0.0;
            },
            law.background);
    }
    for (const Point& x : law.infected) infected[lat.index(x)] = 1;
    return oracle::product_initial(n, density, infected);
}

std::vector<std::uint8_t> site_mask(const ExperimentConfig& c, const std::vector<Point>& xs) {
    const Lattice lat(1, c.box);
    std::vector<std::uint8_t> m(lat.size(), 0);
    for (const Point& x : xs) m[lat.index(x)] = 1;
    return m;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& c) {
    const Exec exec{c.workers, false};
    ExperimentResult out;
    using K = ExperimentKind;
    switch (c.kind) {
        case K::Survival: {
            const Estimate e = estimate_survival(c.params, c.init, c.box, c.horizon, c.replicates, c.master_seed, exec);
            out.rows.push_back(row_of(c, "survival", e));
            out.series.push_back({c.horizon, std::nullopt, e.value, e.ci_low, e.ci_high});
            out.summary = "survival to " + format_real(c.horizon) + ": " + describe(e);
            break;
        }
        case K::Duality: {
            const auto r = estimate_duality_residual(c.params, c.A, c.B, c.t, c.box, c.replicates, c.master_seed, exec);
            auto at_t = [&](ResultRow row) {
                row.horizon = c.t;
                return row;
            };
            out.rows.push_back(at_t(row_of(c, "duality-forward", r.forward)));
            out.rows.push_back(at_t(row_of(c, "duality-backward", r.backward)));
            out.rows.push_back(at_t(row_of(c, "duality-residual", r.residual)));
            out.series.push_back({c.t, std::nullopt, r.residual.value, r.residual.ci_low, r.residual.ci_high});
            out.summary = "duality residual at t=" + format_real(c.t) + ": " + describe(r.residual);
            break;
        }
        case K::UpperDensity: {
            const auto es = upper_density_curve(c.params, c.t_grid, c.box, c.replicates, c.master_seed, exec);
            for (std::size_t i = 0; i < es.size(); ++i) {
                ResultRow row = row_of(c, "upper-density", es[i]);
                row.horizon = c.t_grid[i];
                out.rows.push_back(row);
                out.series.push_back({c.t_grid[i], std::nullopt, es[i].value, es[i].ci_low, es[i].ci_high});
            }
            out.summary = "upper density at t=" + format_real(c.t_grid.back()) + ": " + describe(es.back());
            break;
        }
        case K::CriticalScan: {
            const ScanResult r = scan_critical(c.params, c.p_grid, c.init, c.box, c.horizon, c.replicates, c.threshold,
                                               c.master_seed, exec);
            const std::string flag = r.p_invariant ? "p-invariant" : "";
            std::vector<double> lo, hi;
            for (std::size_t i = 0; i < r.grid.size(); ++i) {
                ResultRow row = row_of(c, "critical-scan", r.estimates[i], flag);
                row.params.p = r.grid[i];
                out.rows.push_back(row);
                out.series.push_back({r.grid[i], std::nullopt, r.estimates[i].value, r.estimates[i].ci_low,
                                      r.estimates[i].ci_high});
                lo.push_back(r.estimates[i].ci_low);
                hi.push_back(r.estimates[i].ci_high);
            }
            // The crossing of the upper CI curve comes first in p.
            const double nan = std::nan("");
            const auto left = r.p_invariant ? std::nullopt : threshold_crossing(r.grid, hi, c.threshold);
            const auto right = r.p_invariant ? std::nullopt : threshold_crossing(r.grid, lo, c.threshold);
            Estimate pc = plain(r.pseudo_critical.value_or(nan), left.value_or(nan), right.value_or(nan));
            pc.replicates = c.replicates;
            pc.master_seed = c.master_seed;
            std::string variant = r.p_invariant ? "p-invariant" : (r.pseudo_critical ? "crossing" : "no-crossing");
            out.rows.push_back(row_of(c, "pseudo-critical", pc, variant));
            out.ok = r.pathwise_monotone;
            out.summary = "critical scan: " +
                          (r.p_invariant ? std::string("p-invariant (delta0 == delta1), no crossing")
                                         : r.pseudo_critical ? "pseudo-critical p = " + format_real(*r.pseudo_critical)
                                                             : std::string("no crossing of the threshold"));
            if (!r.pathwise_monotone) out.summary += "; pathwise monotonicity VIOLATED";
            break;
        }
        case K::Fstc: {
            for (FstcVariant v : c.variants) {
                for (const auto& [L, T] : c.steps) {
                    const Estimate e = estimate_fstc(c.params, c.n, L, T, v, c.replicates, c.master_seed, {}, exec);
                    ResultRow row = row_of(c, "fstc", e, to_string(v));
                    row.box_L = L;
                    row.horizon = T;
                    out.rows.push_back(row);
                    out.series.push_back({static_cast<double>(L), T, e.value, e.ci_low, e.ci_high});
                }
            }
            out.summary = "fstc: " + std::to_string(out.rows.size()) + " estimates, last " + describe(out.rows.back().estimate);
            break;
        }
        case K::Orthant: {
            const OrthantReport rep = check_orthant_inequalities(c.params, c.n, c.L, c.T, c.Ns, c.Ms, c.replicates,
                                                                 c.master_seed, exec);
            for (const auto& r : rep.rows) {
                const std::string tag = (r.inequality == "size" ? "N=" : "M=") + std::to_string(r.threshold);
                auto place = [&](ResultRow row) {
                    row.box_L = c.L;
                    row.horizon = c.T;
                    return row;
                };
                out.rows.push_back(place(row_of(c, "orthant-" + r.inequality + "-lhs", r.lhs, tag)));
                out.rows.push_back(place(row_of(c, "orthant-" + r.inequality + "-rhs", r.rhs, tag)));
                Estimate m = plain(r.margin, r.margin - kZ95 * r.margin_se, r.margin + kZ95 * r.margin_se);
                m.std_error = r.margin_se;
                m.replicates = c.replicates;
                m.master_seed = c.master_seed;
                out.rows.push_back(place(row_of(c, "orthant-" + r.inequality + "-margin", m, tag)));
            }
            out.ok = rep.all_hold();
            out.summary = std::string("orthant inequalities: ") + (rep.all_hold() ? "all hold" : "VIOLATED") +
                          (rep.degenerate ? " (degenerate window T=0)" : "");
            break;
        }
        case K::Blocks: {
            BlockGeometry g = build_block_geometry(c.params.d, c.geometry.n, c.geometry.a, c.geometry.b, c.geometry.k);
            if (c.reflected) g = g.reflect();
            const Estimate e = estimate_block_event(c.params, g, c.start_x, c.start_t, c.replicates, c.master_seed, exec);
            const std::string tag = "k=" + std::to_string(g.k) + (c.reflected ? ",reflected" : "");
            ResultRow row = row_of(c, "block-event", e, tag);
            row.box_L = g.box_half_width();
            row.horizon = g.horizon();
            out.rows.push_back(row);
            const Estimate brush = estimate_seeding_brush(c.params, g.n, c.replicates, c.master_seed, exec);
            ResultRow br = row_of(c, "seeding-brush", brush, "n=" + std::to_string(g.n));
            br.box_L = std::max(1, 2 * g.n);
            br.horizon = 1.0;
            out.rows.push_back(br);
            out.series.push_back({static_cast<double>(g.k), std::nullopt, e.value, e.ci_low, e.ci_high});
            out.summary = "block event (c_offset=" + std::to_string(g.c_offset) + "): " + describe(e);
            break;
        }
        case K::Field: {
            const BlockGeometry g =
                build_block_geometry(c.params.d, c.geometry.n, c.geometry.a, c.geometry.b, c.geometry.k);
            const DominationReport rep =
                domination_report(c.params, g, c.rows, c.cols, c.replicates, c.master_seed, c.p_target, exec);
            out.json = rep.to_json();
            out.summary = "block density " + describe(rep.density) + " vs threshold " + format_real(rep.threshold) +
                          (rep.certificate ? ": certificate (non-rigorous)" : ": no certificate");
            break;
        }
        case K::OpCompare: {
            for (double p : c.p_bond) {
                const Estimate e = op_survival(p, c.depth, c.replicates, c.master_seed, exec);
                std::optional<double> exact;
                if (c.depth <= 10) exact = op_survival_exact(p, c.depth);
                ResultRow row = row_of(c, "op-survival", e, "depth=" + std::to_string(c.depth), exact);
                row.params.p = p;
                row.horizon = c.depth;
                out.rows.push_back(row);
                out.series.push_back({p, std::nullopt, e.value, e.ci_low, e.ci_high});
                if (exact && std::abs(e.value - *exact) > 3.0 * e.half_width()) out.ok = false;
            }
            out.summary = std::string("oriented percolation: ") + (out.ok ? "agrees with exact values" : "DISAGREES");
            break;
        }
        case K::OracleCompare: {
            const auto gen = oracle::build_generator(c.params, 2 * c.box.half_width + 1, c.box.boundary);
            const int n = gen.n_sites();
            const int origin = c.box.half_width;
            {
                const Estimate e = estimate_upper_density(c.params, c.t, c.box, c.replicates, c.master_seed, exec);
                const double exact = oracle::exact_event_prob(
                    gen, oracle::product_initial(n, 1.0, std::vector<std::uint8_t>(n, 1)), c.t, oracle::site_infected(origin));
                ResultRow row = row_of(c, "origin-infected", e, "all-ones", exact);
                row.horizon = c.t;
                out.rows.push_back(row);
            }
            {
                const Estimate e = estimate_survival(c.params, c.init, c.box, c.horizon, c.replicates, c.master_seed, exec);
                const double exact =
                    oracle::exact_event_prob(gen, oracle_initial(c, c.init), c.horizon, oracle::any_infected(n));
                out.rows.push_back(row_of(c, "nonempty", e, "init", exact));
            }
            {
                const auto r = estimate_duality_residual(c.params, c.A, c.B, c.t, c.box, c.replicates, c.master_seed, exec);
                const auto a = site_mask(c, c.A), b = site_mask(c, c.B);
                const double fwd = oracle::exact_event_prob(gen, oracle::product_initial(n, c.params.p, a), c.t,
                                                            oracle::meets(n, b));
                const double bwd = oracle::exact_event_prob(gen, oracle::product_initial(n, c.params.p, b), c.t,
                                                            oracle::meets(n, a));
                ResultRow f = row_of(c, "duality-forward", r.forward, "", fwd);
                ResultRow g = row_of(c, "duality-backward", r.backward, "", bwd);
                f.horizon = g.horizon = c.t;
                out.rows.push_back(f);
                out.rows.push_back(g);
            }
            int inside = 0;
            for (const auto& row : out.rows) {
                const bool ok = std::abs(row.estimate.value - *row.exact) <= 3.0 * row.estimate.half_width();
                inside += ok;
                out.ok = out.ok && ok;
            }
            out.summary = "oracle compare: " + std::to_string(inside) + "/" + std::to_string(out.rows.size()) +
                          " estimates within 3 CI half-widths of the exact values";
            break;
        }
    }
    return out;
}

void write_csv(std::ostream& out, const ExperimentConfig& cfg, const std::vector<ResultRow>& rows) {
    bool with_exact = false;
    for (const auto& r : rows) with_exact = with_exact || r.exact.has_value();
    out << "config_digest,estimator_name,d,gamma,delta0,delta1,p,box_L,horizon,variant,value,ci_low,ci_high,"
           "replicates,master_seed";
    if (with_exact) out << ",exact,abs_diff,within";
    out << '\n';
    for (const auto& r : rows) {
        const Estimate& e = r.estimate;
        out << hex64(cfg.digest) << ',' << r.estimator << ',' << r.params.d << ',' << format_real(r.params.gamma) << ','
            << format_real(r.params.delta0) << ',' << format_real(r.params.delta1) << ',' << format_real(r.params.p)
            << ',' << r.box_L << ',' << format_real(r.horizon) << ',' << r.variant << ',' << format_real(e.value) << ','
            << format_real(e.ci_low) << ',' << format_real(e.ci_high) << ',' << e.replicates << ',' << e.master_seed;
        if (with_exact) {
            if (r.exact) {
                const double diff = std::abs(e.value - *r.exact);
                out << ',' << format_real(*r.exact) << ',' << format_real(diff) << ','
                    << (diff <= 3.0 * e.half_width() ? 1 : 0);
            } else {
                out << ",,,";
            }
        }
        out << '\n';
    }
}

void emit_series(std::ostream& out, const std::vector<SeriesPoint>& series) {
    if (series.empty()) throw std::invalid_argument("no results to emit");
    const bool two = series.front().x2.has_value();
    out << (two ? "x,x2,y,ci_low,ci_high\n" : "x,y,ci_low,ci_high\n");
    for (const auto& s : series) {
        out << format_real(s.x) << ',';
        if (two) out << format_real(s.x2.value_or(std::nan(""))) << ',';
        out << format_real(s.y) << ',' << format_real(s.ci_low) << ',' << format_real(s.ci_high) << '\n';
    }
}

namespace {

void write_to(const std::string& path, const std::string& body) {
    if (path.empty() || path == "-") {
        std::cout << body;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << body;
    if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace

std::string write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result) {
    if (result.json) {
        write_to(cfg.output_path, *result.json + "\n");
    } else {
        std::ostringstream csv;
        write_csv(csv, cfg, result.rows);
        write_to(cfg.output_path, csv.str());
    }
    if (!cfg.series_path.empty() && !result.series.empty()) {
        std::ostringstream s;
        emit_series(s, result.series);
        write_to(cfg.series_path, s.str());
    }
    return result.summary;
}

}  // namespace cpree
