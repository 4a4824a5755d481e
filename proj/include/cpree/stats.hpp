#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cpree {

// Monte Carlo estimate with its provenance.
struct Estimate {
    double value = 0.0;
    std::uint64_t replicates = 0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double std_error = 0.0;
    std::uint64_t successes = 0;  // proportions only
    std::uint64_t master_seed = 0;
    std::uint64_t config_digest = 0;

    double half_width() const { return 0.5 * (ci_high - ci_low); }
    friend bool operator==(const Estimate&, const Estimate&) = default;
};

inline constexpr double kZ95 = 1.959963984540054;

// Wilson 95% interval around successes / n.
Estimate proportion_estimate(std::uint64_t successes, std::uint64_t n);
// Difference of two independent proportions with a normal interval.
Estimate difference_estimate(const Estimate& a, const Estimate& b);
// Sample mean of real observations with a normal interval.
Estimate mean_estimate(double sum, double sum_sq, std::uint64_t n);

// |value - reference| within k standard errors (k = 3 by default). A zero
// standard error demands exact equality.
bool within_sigma(const Estimate& e, double reference, double k = 3.0);

// 64-bit FNV-1a.
class Digest {
public:
    Digest& add(std::string_view bytes);
    Digest& add(double x);
    Digest& add(std::int64_t x);
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ull;
};

std::string hex64(std::uint64_t x);
// 17 significant digits, enough to round-trip a double.
std::string format_real(double x);

}  // namespace cpree
