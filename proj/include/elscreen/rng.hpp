#pragma once

// Counter-based pseudo-random generation (Philox 4x32, 10 rounds).
//
// Every draw stream is addressed by (seed, example, replication, stream):
// the 64-bit seed is the cipher key and the three ids sit in the counter
// block. Any stream can therefore be regenerated in isolation, which makes
// replications independent of each other and of evaluation order.

#include <array>
#include <cmath>
#include <cstdint>

namespace elscreen {

namespace detail {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         std::array<std::uint32_t, 2>& key) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
}

}  // namespace detail

// One 128-bit Philox block for the given counter and key.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                               std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) detail::philox_round(counter, key);
    return counter;
}

// Addresses one independent draw stream.
struct StreamId {
    std::uint32_t example = 0;
    std::uint32_t replication = 0;
    std::uint32_t stream = 0;
};

// Sequential reader over one Philox stream. Not thread-safe; create one per
// (stream, consumer). Instances are cheap: no heap, 48 bytes of state.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, StreamId id)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)},
          prefix_{id.example, id.replication, id.stream} {}

    std::uint32_t next_u32() {
        if (pos_ == 4) refill();
        return block_[pos_++];
    }

    // Uniform on [0, 1) with 53 random bits.
    double next_uniform() {
        const std::uint64_t hi = next_u32() >> 5;  // 27 bits
        const std::uint64_t lo = next_u32() >> 6;  // 26 bits
        return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; consumes uniforms in pairs and caches
    // the second variate, so draw order is fully deterministic.
    double next_gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_uniform();
        while (u1 <= 0.0) u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

  private:
    void refill() {
        block_ = philox4x32({prefix_[0], prefix_[1], prefix_[2], block_index_}, key_);
        ++block_index_;
        pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 3> prefix_;
    std::uint32_t block_index_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int pos_ = 4;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace elscreen
