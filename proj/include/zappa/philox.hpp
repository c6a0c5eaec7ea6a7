#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace zappa {

/**
 * @brief Philox4x32-10 counter-based generator (Salmon et al., SC'11).
 *
 * A stream is identified by a 64-bit key and a 64-bit stream id; the remaining
 * 64 counter bits index blocks within it, so any (key, stream, position)
 * is reachable without generating its predecessors.
 */
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    static Block generate(Block counter, std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            counter = single_round(counter, key);
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return counter;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static Block single_round(const Block& c, const std::array<std::uint32_t, 2>& k) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

/// Sequential draws from one (seed, stream) substream.
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_lo_(static_cast<std::uint32_t>(stream)),
          stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

    std::uint64_t next_u64() {
        if (lane_ == 2) refill();
        const std::uint64_t r = (static_cast<std::uint64_t>(block_[2 * lane_]) << 32) | block_[2 * lane_ + 1];
        ++lane_;
        return r;
    }

    /// Uniform on (0, 1], 53 random bits.
    double uniform_open0() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1).
    double uniform_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    /// Exponential with the given mean, by inversion.
    double exponential(double mean) { return -mean * std::log(uniform_open0()); }

    std::uint64_t blocks_used() const noexcept { return position_; }

private:
    void refill() {
        block_ = Philox4x32::generate({static_cast<std::uint32_t>(position_), static_cast<std::uint32_t>(position_ >> 32),
                                       stream_lo_, stream_hi_},
                                      key_);
        ++position_;
        lane_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_lo_;
    std::uint32_t stream_hi_;
    std::uint64_t position_ = 0;
    Philox4x32::Block block_{};
    int lane_ = 2;
};

}  // namespace zappa
