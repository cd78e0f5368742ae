#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace skewsim {

/// Deterministic random stream keyed by (seed, stream_id).
///
/// The generator is xoshiro256++ seeded through SplitMix64 from a mix of the two keys,
/// so the draw sequence is a pure function of the pair. Workers never share a stream;
/// they derive children with child(index).
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next(); }
  std::uint64_t next();

  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform();
  /// Standard normal (ziggurat).
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  /// One fair bit, drawn from a 64-bit buffer.
  bool bit();
  /// The next 64 fair bits; consistent with 64 successive calls to bit().
  std::uint64_t bits64();
  /// The next m fair bits (1 <= m <= 64) in the low bits; consistent with m calls to bit().
  std::uint64_t bits(int m);

  RngStream child(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> s_{};
  std::uint64_t bit_buffer_ = 0;
  int bits_left_ = 0;
};

}  // namespace skewsim
