#include "cpree/oracle.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "cpree/stats.hpp"

namespace cpree::oracle {

StateIndex encode(const std::vector<std::uint8_t>& background, const std::vector<std::uint8_t>& infected) {
    if (background.size() != infected.size()) throw std::invalid_argument("mismatched site counts");
    StateIndex s = 0;
    for (std::size_t i = 0; i < background.size(); ++i) {
        if (background[i]) s |= 1u << (2 * i);
        if (infected[i]) s |= 1u << (2 * i + 1);
    }
    return s;
}

GeneratorMatrix::GeneratorMatrix(const Params& params, int n_sites, Boundary boundary)
    : params_(params), n_sites_(n_sites), boundary_(boundary) {
    params.validate();
    if (params.d != 1) throw std::invalid_argument("the exact oracle supports d = 1 only");
    if (n_sites < 1 || n_sites > kMaxSites) throw std::invalid_argument("oracle supports 1 to 4 sites");
    const StateIndex n_states = 1u << (2 * n_sites);
    rows_.resize(n_states);
    diagonal_.assign(n_states, 0.0);
    const double up = params.gamma * params.p;
    const double down = params.gamma * (1.0 - params.p);

    auto neighbor = [&](int i, int step) -> int {
        const int j = i + step;
        if (j >= 0 && j < n_sites) return j;
        if (boundary == Boundary::Periodic) return (j + n_sites) % n_sites;
        return -1;
    };

    for (StateIndex s = 0; s < n_states; ++s) {
        auto& row = rows_[s];
        auto add = [&](StateIndex to, double r) {
            if (r <= 0.0 || to == s) return;
            for (auto& e : row)
                if (e.to == to) {
                    e.rate += r;
                    return;
                }
            row.push_back({to, r});
        };
        for (int i = 0; i < n_sites; ++i) {
            const bool b = background_bit(s, i);
            const bool c = infected_bit(s, i);
            const StateIndex flip_bg = s ^ (1u << (2 * i));
            const StateIndex flip_inf = s ^ (1u << (2 * i + 1));
            add(flip_bg, b ? down : up);
            if (c) {
                add(flip_inf, b ? params.delta1 : params.delta0);
            } else {
                // One arrow stream per direction, so a two-site ring counts
                // its neighbour twice.
                double infection = 0.0;
                for (int step : {1, -1}) {
                    const int j = neighbor(i, step);
                    if (j >= 0 && j != i && infected_bit(s, j)) infection += 1.0;
                }
                add(flip_inf, infection);
            }
        }
        double out = 0.0;
        for (const auto& e : row) out += e.rate;
        diagonal_[s] = -out;
    }
}

double GeneratorMatrix::rate(StateIndex from, StateIndex to) const {
    if (from >= n_states() || to >= n_states()) throw std::out_of_range("state index out of range");
    if (from == to) return diagonal_[from];
    for (const auto& e : rows_[from])
        if (e.to == to) return e.rate;
    return 0.0;
}

GeneratorMatrix build_generator(const Params& params, int n_sites, Boundary boundary) {
    return GeneratorMatrix(params, n_sites, boundary);
}

namespace {

void check_distribution(const GeneratorMatrix& gen, const Distribution& d) {
    if (d.size() != gen.n_states()) throw std::invalid_argument("distribution has wrong length");
    double total = 0.0;
    for (double x : d) {
        if (!(x >= 0.0)) throw std::invalid_argument("distribution has a negative entry");
        total += x;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("distribution does not sum to 1");
}

// One uniformization step over a time span with Lambda * span bounded.
Distribution uniformized_step(const GeneratorMatrix& gen, const Distribution& start, double lambda, double span,
                              double tol) {
    const std::size_t n = start.size();
    const double mean = lambda * span;
    Distribution term = start;  // start * P^k
    Distribution next(n);
    Distribution result(n, 0.0);
    double weight = std::exp(-mean);
    double accumulated = 0.0;
    for (int k = 0;; ++k) {
        for (std::size_t i = 0; i < n; ++i) result[i] += weight * term[i];
        accumulated += weight;
        if (1.0 - accumulated < tol && k >= mean) break;
        if (k > 100000) throw std::runtime_error("uniformization did not converge");
        // term <- term * P with P = I + Q / lambda
        for (std::size_t i = 0; i < n; ++i) next[i] = term[i] * (1.0 + gen.diagonal(static_cast<StateIndex>(i)) / lambda);
        for (std::size_t i = 0; i < n; ++i) {
            if (term[i] == 0.0) continue;
            for (const auto& e : gen.row(static_cast<StateIndex>(i))) next[e.to] += term[i] * e.rate / lambda;
        }
        term.swap(next);
        weight *= mean / (k + 1);
    }
    return result;
}

}  // namespace

Distribution transient_distribution(const GeneratorMatrix& gen, const Distribution& initial, double t, double tol) {
    check_distribution(gen, initial);
    if (!(t >= 0.0)) throw std::invalid_argument("t must be nonnegative");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (t == 0.0) return initial;
    double lambda = 0.0;
    for (std::size_t s = 0; s < gen.n_states(); ++s) lambda = std::max(lambda, -gen.diagonal(static_cast<StateIndex>(s)));
    if (lambda == 0.0) return initial;
    constexpr double kMaxMeanPerStep = 30.0;
    const int steps = std::max(1, static_cast<int>(std::ceil(lambda * t / kMaxMeanPerStep)));
    const double span = t / steps;
    Distribution d = initial;
    for (int i = 0; i < steps; ++i) d = uniformized_step(gen, d, lambda, span, tol / steps);
    return d;
}

double exact_event_prob(const GeneratorMatrix& gen, const Distribution& initial, double t, const Predicate& pred,
                        double tol) {
    const Distribution d = transient_distribution(gen, initial, t, tol);
    double total = 0.0;
    for (std::size_t s = 0; s < d.size(); ++s)
        if (pred(static_cast<StateIndex>(s))) total += d[s];
    return total;
}

Distribution product_initial(int n_sites, const std::vector<double>& density, const std::vector<std::uint8_t>& infected) {
    if (n_sites < 1 || n_sites > kMaxSites) throw std::invalid_argument("oracle supports 1 to 4 sites");
    if (static_cast<int>(density.size()) != n_sites || static_cast<int>(infected.size()) != n_sites)
        throw std::invalid_argument("per-site vectors have wrong length");
    Distribution d(1u << (2 * n_sites), 0.0);
    for (StateIndex bg = 0; bg < (1u << n_sites); ++bg) {
        double w = 1.0;
        std::vector<std::uint8_t> bits(n_sites);
        for (int i = 0; i < n_sites; ++i) {
            bits[i] = (bg >> i) & 1u;
            w *= bits[i] ? density[i] : 1.0 - density[i];
        }
        d[encode(bits, infected)] += w;
    }
    return d;
}

Distribution product_initial(int n_sites, double q, const std::vector<std::uint8_t>& infected) {
    return product_initial(n_sites, std::vector<double>(static_cast<std::size_t>(n_sites), q), infected);
}

Predicate any_infected(int n_sites) {
    return [n_sites](StateIndex s) {
        for (int i = 0; i < n_sites; ++i)
            if (infected_bit(s, i)) return true;
        return false;
    };
}

Predicate site_infected(int site) {
    return [site](StateIndex s) { return infected_bit(s, site); };
}

Predicate meets(int n_sites, const std::vector<std::uint8_t>& set) {
    return [n_sites, set](StateIndex s) {
        for (int i = 0; i < n_sites; ++i)
            if (set[i] && infected_bit(s, i)) return true;
        return false;
    };
}

void write_fixture_csv(std::ostream& out, const std::vector<FixtureRow>& rows) {
    out << "d,gamma,delta0,delta1,p,n_sites,t,predicate_id,probability\n";
    for (const auto& r : rows) {
        out << r.params.d << ',' << format_real(r.params.gamma) << ',' << format_real(r.params.delta0) << ','
            << format_real(r.params.delta1) << ',' << format_real(r.params.p) << ',' << r.n_sites << ','
            << format_real(r.t) << ',' << r.predicate_id << ',' << format_real(r.probability) << '\n';
    }
}

}  // namespace cpree::oracle
