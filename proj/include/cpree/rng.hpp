#pragma once

#include <array>
#include <cstdint>

namespace cpree {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A block is a
// pure function of (key, counter); streams below are just counter walks.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

// Identifies one independent substream: (seed, kind, site code). Draws are
// taken from consecutive counters, so the n-th draw never depends on how many
// draws a caller stops at.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint32_t kind, std::uint64_t site_code);

    std::uint64_t next_u64();
    // Uniform on [0, 1) with 53 random bits.
    double next_uniform();
    // Exponential with the given rate (rate > 0).
    double next_exponential(double rate);

private:
    PhiloxKey key_;
    PhiloxCounter counter_;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
};

// Derives an independent 64-bit seed for replicate `index` of family `tag`.
std::uint64_t substream_seed(std::uint64_t master, std::uint32_t tag, std::uint64_t index);

// Stream-kind tags shared by the modules.
namespace stream_kind {
inline constexpr std::uint32_t bg_flip = 0;
inline constexpr std::uint32_t recovery1 = 1;
inline constexpr std::uint32_t recovery_extra = 2;
inline constexpr std::uint32_t arrow_base = 3;  // + direction index
inline constexpr std::uint32_t initial_background = 64;
inline constexpr std::uint32_t percolation = 65;
}  // namespace stream_kind

}  // namespace cpree
