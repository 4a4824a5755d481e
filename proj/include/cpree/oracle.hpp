#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cpree/lattice.hpp"

namespace cpree::oracle {

using StateIndex = std::uint32_t;

// State encoding: site i owns bits 2i (background) and 2i + 1 (infection).
inline bool background_bit(StateIndex s, int site) { return (s >> (2 * site)) & 1u; }
inline bool infected_bit(StateIndex s, int site) { return (s >> (2 * site + 1)) & 1u; }
StateIndex encode(const std::vector<std::uint8_t>& background, const std::vector<std::uint8_t>& infected);

inline constexpr int kMaxSites = 4;

// Exact generator of the joint chain on n sites of Z (d = 1), one row per
// state, off-diagonal entries stored sparsely.
class GeneratorMatrix {
public:
    struct Entry {
        StateIndex to;
        double rate;
    };

    GeneratorMatrix(const Params& params, int n_sites, Boundary boundary);

    int n_sites() const { return n_sites_; }
    std::size_t n_states() const { return rows_.size(); }
    const Params& params() const { return params_; }
    Boundary boundary() const { return boundary_; }
    const std::vector<Entry>& row(StateIndex s) const { return rows_[s]; }
    double diagonal(StateIndex s) const { return diagonal_[s]; }
    // Q(from, to); the diagonal when from == to.
    double rate(StateIndex from, StateIndex to) const;

private:
    Params params_;
    int n_sites_;
    Boundary boundary_;
    std::vector<std::vector<Entry>> rows_;
    std::vector<double> diagonal_;
};

GeneratorMatrix build_generator(const Params& params, int n_sites, Boundary boundary);

using Distribution = std::vector<double>;

inline constexpr double kDefaultTol = 1e-10;

// Law at time t by uniformization. The neglected Poisson tail mass is < tol.
Distribution transient_distribution(const GeneratorMatrix& gen, const Distribution& initial, double t,
                                    double tol = kDefaultTol);

using Predicate = std::function<bool(StateIndex)>;

double exact_event_prob(const GeneratorMatrix& gen, const Distribution& initial, double t, const Predicate& pred,
                        double tol = kDefaultTol);

// Initial law with independent Bernoulli(q_i) backgrounds and a fixed
// infected set.
Distribution product_initial(int n_sites, const std::vector<double>& background_density,
                             const std::vector<std::uint8_t>& infected);
Distribution product_initial(int n_sites, double q, const std::vector<std::uint8_t>& infected);

// Common predicates. Sites are 0-based indices, 0 being the leftmost.
Predicate any_infected(int n_sites);
Predicate site_infected(int site);
Predicate meets(int n_sites, const std::vector<std::uint8_t>& set);

// Fixture row: params, n_sites, t, predicate id, probability.
struct FixtureRow {
    Params params;
    int n_sites;
    double t;
    std::string predicate_id;
    double probability;
};

void write_fixture_csv(std::ostream& out, const std::vector<FixtureRow>& rows);

}  // namespace cpree::oracle
