#include "cpree/stats.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace cpree {

Estimate proportion_estimate(std::uint64_t successes, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("need at least one replicate");
    if (successes > n) throw std::invalid_argument("more successes than replicates");
    Estimate e;
    const double nn = static_cast<double>(n);
    const double ph = static_cast<double>(successes) / nn;
    const double z2 = kZ95 * kZ95;
    const double denom = 1.0 + z2 / nn;
    const double centre = (ph + z2 / (2.0 * nn)) / denom;
    const double spread = kZ95 * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
    e.value = ph;
    e.replicates = n;
    e.successes = successes;
    e.ci_low = std::max(0.0, std::min(ph, centre - spread));
    e.ci_high = std::min(1.0, std::max(ph, centre + spread));
    e.std_error = std::sqrt(ph * (1.0 - ph) / nn);
    return e;
}

Estimate difference_estimate(const Estimate& a, const Estimate& b) {
    Estimate e;
    e.value = a.value - b.value;
    e.replicates = std::min(a.replicates, b.replicates);
    e.std_error = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    e.ci_low = e.value - kZ95 * e.std_error;
    e.ci_high = e.value + kZ95 * e.std_error;
    return e;
}

Estimate mean_estimate(double sum, double sum_sq, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("need at least one replicate");
    Estimate e;
    const double nn = static_cast<double>(n);
    e.value = sum / nn;
    e.replicates = n;
    const double var = n > 1 ? std::max(0.0, (sum_sq - nn * e.value * e.value) / (nn - 1.0)) : 0.0;
    e.std_error = std::sqrt(var / nn);
    e.ci_low = e.value - kZ95 * e.std_error;
    e.ci_high = e.value + kZ95 * e.std_error;
    return e;
}

bool within_sigma(const Estimate& e, double reference, double k) {
    const double gap = std::abs(e.value - reference);
    if (e.std_error == 0.0) return gap == 0.0;
    return gap <= k * e.std_error;
}

Digest& Digest::add(std::string_view bytes) {
    for (unsigned char c : bytes) {
        h_ ^= c;
        h_ *= 0x100000001b3ull;
    }
    // Separator so that ("ab","c") and ("a","bc") differ.
    h_ ^= 0xff;
    h_ *= 0x100000001b3ull;
    return *this;
}

Digest& Digest::add(double x) { return add(std::string_view(format_real(x))); }

Digest& Digest::add(std::int64_t x) { return add(std::string_view(std::to_string(x))); }

std::string hex64(std::uint64_t x) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

std::string format_real(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace cpree
