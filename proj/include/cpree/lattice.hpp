#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace cpree {

inline constexpr int kMaxDim = 4;

// Lattice point in Z^d; coordinates past d are zero.
using Point = std::array<int, kMaxDim>;

// Model parameters. The infection rate per infected neighbour is fixed to 1.
struct Params {
    int d = 1;
    double gamma = 1.0;
    double delta0 = 1.0;
    double delta1 = 1.0;
    double p = 0.5;

    // Throws std::invalid_argument unless d >= 1, gamma, delta0, delta1 > 0,
    // delta1 <= delta0 and p in [0, 1].
    void validate() const;
    // Total per-site event rate of the graphical representation.
    double total_rate() const { return gamma + delta0 + 2.0 * d; }
};

enum class Boundary : std::uint8_t { Closed, Periodic };

struct Box {
    int half_width = 0;
    Boundary boundary = Boundary::Closed;
};

const char* to_string(Boundary b);

// Site indexing for the box [-L, L]^d. Directions are numbered 2j for +e_j and
// 2j + 1 for -e_j.
class Lattice {
public:
    Lattice(int dim, Box box);

    int dim() const { return dim_; }
    const Box& box() const { return box_; }
    int side() const { return side_; }
    std::size_t size() const { return size_; }
    int directions() const { return 2 * dim_; }

    bool contains(const Point& x) const;
    // Throws std::out_of_range for points outside the box.
    std::uint32_t index(const Point& x) const;
    Point point(std::uint32_t site) const;
    std::uint32_t origin() const { return index(Point{}); }

    // Target of the arrow leaving `site` in direction `dir`; -1 when a closed
    // box discards it.
    std::int32_t neighbor(std::uint32_t site, int dir) const {
        return neighbors_[static_cast<std::size_t>(site) * directions() + dir];
    }
    int sup_norm(std::uint32_t site) const { return sup_norm_[site]; }

    // Box-independent 64-bit code of a point (zig-zag coordinates, 16 bits
    // each), used to key per-site random streams.
    static std::uint64_t site_code(const Point& x);

private:
    int dim_;
    Box box_;
    int side_;
    std::size_t size_;
    std::vector<std::int32_t> neighbors_;
    std::vector<int> sup_norm_;
};

int sup_norm(const Point& x, int dim);
Point direction_vector(int dir);
std::string format_point(const Point& x, int dim);

}  // namespace cpree
