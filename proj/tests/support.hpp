#pragma once
// Test-side references, written independently of the library: a dense CTMC
// solved by scaling-and-squaring Taylor exponentiation, and a literal path
// search over a log's events.

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

#include "cpree/event_log.hpp"

namespace ref {

using Matrix = std::vector<std::vector<double>>;

struct Site {
    int bg;
    int inf;
};

// Digit i of the base-4 index is 2 * infected + background of site i.
inline std::vector<Site> decode(std::uint32_t s, int n) {
    std::vector<Site> out(n);
    for (int i = 0; i < n; ++i) {
        const int digit = (s >> (2 * i)) & 3;
        out[i] = {digit & 1, digit >> 1};
    }
    return out;
}

inline std::uint32_t encode(const std::vector<Site>& c) {
    std::uint32_t s = 0;
    for (std::size_t i = 0; i < c.size(); ++i) s |= static_cast<std::uint32_t>(2 * c[i].inf + c[i].bg) << (2 * i);
    return s;
}

// Dense generator from the rate table, closed chain of n sites (or a ring).
inline Matrix generator(const cpree::Params& p, int n, bool ring) {
    const std::size_t N = std::size_t{1} << (2 * n);
    Matrix Q(N, std::vector<double>(N, 0.0));
    for (std::uint32_t s = 0; s < N; ++s) {
        const auto c = decode(s, n);
        for (int x = 0; x < n; ++x) {
            auto to = c;
            to[x].bg = 1 - c[x].bg;
            Q[s][encode(to)] += c[x].bg ? p.gamma * (1 - p.p) : p.gamma * p.p;
            to = c;
            to[x].inf = 1 - c[x].inf;
            if (c[x].inf) {
                Q[s][encode(to)] += c[x].bg ? p.delta1 : p.delta0;
            } else {
                double sick = 0;
                for (int y : {x - 1, x + 1}) {
                    int z = y;
                    if (ring) z = (y + n) % n;
                    if (z < 0 || z >= n || z == x) continue;
                    sick += c[z].inf;
                }
                Q[s][encode(to)] += sick;
            }
        }
        double out = 0;
        for (std::size_t j = 0; j < N; ++j)
            if (j != s) out += Q[s][j];
        Q[s][s] = -out;
    }
    return Q;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
    const std::size_t n = a.size();
    Matrix c(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a[i][k];
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) c[i][j] += aik * b[k][j];
        }
    return c;
}

// exp(Q t) by scaling and squaring with a degree-24 Taylor polynomial.
inline Matrix expm(const Matrix& Q, double t) {
    const std::size_t n = Q.size();
    double norm = 0;
    for (const auto& row : Q) {
        double s = 0;
        for (double v : row) s += std::abs(v);
        norm = std::max(norm, s);
    }
    int squarings = 0;
    while (norm * t / std::ldexp(1.0, squarings) > 0.5) ++squarings;
    const double h = t / std::ldexp(1.0, squarings);
    Matrix result(n, std::vector<double>(n, 0.0)), term(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) result[i][i] = term[i][i] = 1.0;
    Matrix A = Q;
    for (auto& row : A)
        for (double& v : row) v *= h;
    for (int k = 1; k <= 24; ++k) {
        term = multiply(term, A);
        for (auto& row : term)
            for (double& v : row) v /= k;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) result[i][j] += term[i][j];
    }
    for (int s = 0; s < squarings; ++s) result = multiply(result, result);
    return result;
}

inline std::vector<double> evolve(const std::vector<double>& mu, const Matrix& Q, double t) {
    const Matrix P = expm(Q, t);
    std::vector<double> out(mu.size(), 0.0);
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < mu.size(); ++j) out[j] += mu[i] * P[i][j];
    return out;
}

// Product background with per-site densities, fixed infection pattern.
inline std::vector<double> product_law(const std::vector<double>& q, const std::vector<int>& inf) {
    const int n = static_cast<int>(q.size());
    std::vector<double> mu(std::size_t{1} << (2 * n), 0.0);
    for (std::uint32_t bgs = 0; bgs < (1u << n); ++bgs) {
        std::vector<Site> c(n);
        double w = 1;
        for (int i = 0; i < n; ++i) {
            c[i] = {static_cast<int>((bgs >> i) & 1), inf[i]};
            w *= c[i].bg ? q[i] : 1 - q[i];
        }
        mu[encode(c)] += w;
    }
    return mu;
}

inline double prob(const std::vector<double>& mu, int n, const std::function<bool(const std::vector<Site>&)>& pred) {
    double s = 0;
    for (std::uint32_t i = 0; i < mu.size(); ++i)
        if (pred(decode(i, n))) s += mu[i];
    return s;
}

// Literal search for a beta0-active path from (x, s) to (y, t) on a closed
// box in d = 1 (sites indexed by the lattice). Recovery points at a site are
// Recovery1 events and RecoveryExtra events met while the background there,
// started from beta0 at time s, is 0.
class PathSearch {
public:
    PathSearch(const cpree::EventLog& log, const std::vector<std::uint8_t>& beta0, double s)
        : log_(log), s_(s) {
        const auto& lat = log.lattice();
        recover_.resize(lat.size());
        arrows_.resize(lat.size());
        for (std::uint32_t x = 0; x < lat.size(); ++x) {
            int bg = beta0[x];
            for (const auto& e : log.site_events(x)) {
                if (e.time <= s) continue;
                if (e.kind == cpree::EventKind::BgFlip) bg = e.mark < log.params().p ? 1 : 0;
                if (e.kind == cpree::EventKind::Recovery1 || (e.kind == cpree::EventKind::RecoveryExtra && bg == 0))
                    recover_[x].push_back(e.time);
                if (e.kind == cpree::EventKind::Arrow) {
                    const int to = lat.neighbor(x, e.direction);
                    if (to >= 0) arrows_[x].push_back({e.time, static_cast<std::uint32_t>(to)});
                }
            }
        }
    }

    bool exists(std::uint32_t x, std::uint32_t y, double t) const { return search(x, s_, y, t, 0); }

private:
    struct Arrow {
        double time;
        std::uint32_t to;
    };

    double next_recovery(std::uint32_t x, double after) const {
        for (double r : recover_[x])
            if (r > after) return r;
        return std::numeric_limits<double>::infinity();
    }

    bool search(std::uint32_t x, double from, std::uint32_t y, double t, int depth) const {
        if (depth > 64) return false;
        const double dies = next_recovery(x, from);
        if (x == y && dies > t) return true;
        for (const auto& a : arrows_[x]) {
            if (a.time <= from || a.time >= dies || a.time > t) continue;
            if (search(a.to, a.time, y, t, depth + 1)) return true;
        }
        return false;
    }

    const cpree::EventLog& log_;
    double s_;
    std::vector<std::vector<double>> recover_;
    std::vector<std::vector<Arrow>> arrows_;
};

// Exhaustive sum over open/closed patterns of the depth-D cone {(m, i): 1 <= m
// <= D, 0 <= i <= m}.
inline double op_enumerate(double p, int depth) {
    std::vector<std::pair<int, int>> sites;
    for (int m = 1; m <= depth; ++m)
        for (int i = 0; i <= m; ++i) sites.emplace_back(m, i);
    double total = 0;
    for (std::uint64_t mask = 0; mask < (1ull << sites.size()); ++mask) {
        double w = 1;
        std::vector<std::vector<int>> open(depth + 1);
        std::size_t k = 0;
        for (int m = 1; m <= depth; ++m) {
            open[m].assign(m + 1, 0);
            for (int i = 0; i <= m; ++i, ++k) {
                open[m][i] = mask >> k & 1;
                w *= open[m][i] ? p : 1 - p;
            }
        }
        std::vector<int> reached{1};
        for (int m = 1; m <= depth; ++m) {
            std::vector<int> next(m + 1, 0);
            for (int i = 0; i <= m; ++i) {
                const bool fed = (i < m && reached[i]) || (i > 0 && reached[i - 1]);
                next[i] = fed && open[m][i];
            }
            reached = next;
        }
        if (std::count(reached.begin(), reached.end(), 1) > 0) total += w;
    }
    return total;
}

// |x - ref| within k standard errors of a proportion estimated from n draws.
inline bool within(double x, double reference, std::uint64_t n, double k = 3.0) {
    const double se = std::sqrt(std::max(reference * (1 - reference), 1e-12) / static_cast<double>(n));
    return std::abs(x - reference) <= k * se;
}

}  // namespace ref
