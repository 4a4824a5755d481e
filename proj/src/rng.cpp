#include "cpree/rng.hpp"

#include <cmath>

namespace cpree {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

Stream::Stream(std::uint64_t seed, std::uint32_t kind, std::uint64_t site_code)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{0u, kind, static_cast<std::uint32_t>(site_code),
               static_cast<std::uint32_t>(site_code >> 32)} {}

std::uint64_t Stream::next_u64() {
    if (buffered_ == 0) {
        const PhiloxCounter out = philox4x32(counter_, key_);
        ++counter_[0];
        buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
        buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
        buffered_ = 2;
    }
    return buffer_[2 - buffered_--];
}

double Stream::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Stream::next_exponential(double rate) {
    // 1 - u lies in (0, 1], so the log is finite.
    return -std::log1p(-next_uniform()) / rate;
}

std::uint64_t substream_seed(std::uint64_t master, std::uint32_t tag, std::uint64_t index) {
    const PhiloxKey key{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32)};
    const PhiloxCounter out = philox4x32(
        {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), tag, 0x5eedu}, key);
    return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

}  // namespace cpree
