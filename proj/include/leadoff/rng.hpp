#pragma once

// Counter-based random numbers (Philox4x32-10). Streams are indexed, not
// seeded sequentially, so simulations can hand every inning its own stream
// and produce identical draws regardless of thread count or replay order.

#include <array>
#include <cstdint>

namespace leadoff {

struct Philox4x32 {
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  std::array<std::uint32_t, 4> counter{0, 0, 0, 0};
  std::array<std::uint32_t, 2> key{0, 0};
  std::array<std::uint32_t, 4> block{};
  int cursor = 4;  // empty; first draw generates a block

  Philox4x32() = default;
  Philox4x32(std::uint64_t seed, std::uint64_t stream) {
    key = {static_cast<std::uint32_t>(seed),
           static_cast<std::uint32_t>(seed >> 32)};
    counter = {0, 0, static_cast<std::uint32_t>(stream),
               static_cast<std::uint32_t>(stream >> 32)};
  }

  static std::array<std::uint32_t, 4> bijection(std::array<std::uint32_t, 4> x,
                                                std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
      std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * x[0];
      std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * x[2];
      std::array<std::uint32_t, 4> y;
      y[0] = static_cast<std::uint32_t>(p1 >> 32) ^ x[1] ^ k[0];
      y[1] = static_cast<std::uint32_t>(p1);
      y[2] = static_cast<std::uint32_t>(p0 >> 32) ^ x[3] ^ k[1];
      y[3] = static_cast<std::uint32_t>(p0);
      x = y;
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    return x;
  }

  void advance_counter() {
    for (int i = 0; i < 4; ++i)
      if (++counter[i] != 0) break;
  }

  std::uint32_t next_u32() {
    if (cursor == 4) {
      block = bijection(counter, key);
      advance_counter();
      cursor = 0;
    }
    return block[cursor++];
  }

  std::uint64_t next_u64() {
    std::uint64_t lo = next_u32();
    std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform on [0, 1) with 53 significant bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Index into a discrete distribution given cumulative weights' source.
  template <typename Weights>
  int categorical(const Weights& w) {
    double u = uniform();
    double acc = 0;
    int last = -1;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] <= 0) continue;
      acc += w[i];
      last = static_cast<int>(i);
      if (u < acc) return last;
    }
    return last;  // guard against accumulated rounding at u ~ 1
  }
};

}  // namespace leadoff
