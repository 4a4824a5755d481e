#include "cpree/lattice.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace cpree {

void Params::validate() const {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("dimension d must lie in [1, 4]");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be positive");
    if (!(delta0 > 0.0) || !std::isfinite(delta0)) throw std::invalid_argument("delta0 must be positive");
    if (!(delta1 > 0.0) || !std::isfinite(delta1)) throw std::invalid_argument("delta1 must be positive");
    if (delta1 > delta0) throw std::invalid_argument("delta1 must not exceed delta0");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
}

const char* to_string(Boundary b) {
    return b == Boundary::Closed ? "closed" : "periodic";
}

Lattice::Lattice(int dim, Box box) : dim_(dim), box_(box), side_(2 * box.half_width + 1) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension must lie in [1, 4]");
    if (box.half_width < 0) throw std::invalid_argument("box half-width must be nonnegative");
    if (box.half_width > 16000) throw std::invalid_argument("box half-width too large");
    size_ = 1;
    for (int j = 0; j < dim; ++j) size_ *= static_cast<std::size_t>(side_);
    if (size_ > (std::size_t{1} << 31)) throw std::invalid_argument("box has too many sites");

    neighbors_.resize(size_ * directions());
    sup_norm_.resize(size_);
    for (std::uint32_t s = 0; s < size_; ++s) {
        const Point x = point(s);
        sup_norm_[s] = cpree::sup_norm(x, dim_);
        for (int dir = 0; dir < directions(); ++dir) {
            Point y = x;
            const int axis = dir / 2;
            y[axis] += (dir % 2 == 0) ? 1 : -1;
            std::int32_t target = -1;
            if (std::abs(y[axis]) <= box_.half_width) {
                target = static_cast<std::int32_t>(index(y));
            } else if (box_.boundary == Boundary::Periodic) {
                y[axis] = y[axis] > 0 ? -box_.half_width : box_.half_width;
                target = static_cast<std::int32_t>(index(y));
            }
            neighbors_[static_cast<std::size_t>(s) * directions() + dir] = target;
        }
    }
}

bool Lattice::contains(const Point& x) const {
    for (int j = 0; j < kMaxDim; ++j) {
        if (j < dim_) {
            if (std::abs(x[j]) > box_.half_width) return false;
        } else if (x[j] != 0) {
            return false;
        }
    }
    return true;
}

std::uint32_t Lattice::index(const Point& x) const {
    if (!contains(x)) throw std::out_of_range("site " + format_point(x, dim_) + " outside box");
    std::uint32_t idx = 0;
    for (int j = dim_ - 1; j >= 0; --j) {
        idx = idx * static_cast<std::uint32_t>(side_) + static_cast<std::uint32_t>(x[j] + box_.half_width);
    }
    return idx;
}

Point Lattice::point(std::uint32_t site) const {
    Point x{};
    for (int j = 0; j < dim_; ++j) {
        x[j] = static_cast<int>(site % static_cast<std::uint32_t>(side_)) - box_.half_width;
        site /= static_cast<std::uint32_t>(side_);
    }
    return x;
}

std::uint64_t Lattice::site_code(const Point& x) {
    std::uint64_t code = 0;
    for (int j = 0; j < kMaxDim; ++j) {
        const std::int64_t v = x[j];
        const std::uint64_t zz = static_cast<std::uint64_t>((v << 1) ^ (v >> 63)) & 0xFFFFu;
        code |= zz << (16 * j);
    }
    return code;
}

int sup_norm(const Point& x, int dim) {
    int m = 0;
    for (int j = 0; j < dim; ++j) m = std::max(m, std::abs(x[j]));
    return m;
}

Point direction_vector(int dir) {
    Point v{};
    v[dir / 2] = (dir % 2 == 0) ? 1 : -1;
    return v;
}

std::string format_point(const Point& x, int dim) {
    std::string s = "(";
    for (int j = 0; j < dim; ++j) {
        if (j) s += ",";
        s += std::to_string(x[j]);
    }
    return s + ")";
}

}  // namespace cpree
