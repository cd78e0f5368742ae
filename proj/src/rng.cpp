#include "skewsim/rng.hpp"

#include <bit>
#include <cmath>

#include <boost/random/normal_distribution.hpp>

#include "skewsim/parallel.hpp"

namespace skewsim {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (0x6a09e667f3bcc909ULL + (b << 6) + (b >> 2));
  s = splitmix64(s);
  s ^= b * 0xd1342543de82ef95ULL;
  return splitmix64(s);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
  std::uint64_t state = mix(seed, stream_id);
  for (auto& word : s_) word = splitmix64(state);
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t RngStream::next() {
  const std::uint64_t result = std::rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  // (k + 0.5) / 2^53 for k in [0, 2^53): never 0 or 1.
  return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  boost::random::normal_distribution<double> dist;
  return dist(*this);
}

bool RngStream::bit() {
  if (bits_left_ == 0) {
    bit_buffer_ = next();
    bits_left_ = 64;
  }
  const bool b = (bit_buffer_ & 1U) != 0;
  bit_buffer_ >>= 1;
  --bits_left_;
  return b;
}

std::uint64_t RngStream::bits64() {
  if (bits_left_ == 0) return next();
  const std::uint64_t fresh = next();
  const std::uint64_t out = bit_buffer_ | (fresh << bits_left_);
  bit_buffer_ = fresh >> (64 - bits_left_);
  return out;
}

std::uint64_t RngStream::bits(int m) {
  if (m == 64) return bits64();
  const std::uint64_t mask = (std::uint64_t{1} << m) - 1;
  if (bits_left_ >= m) {
    const std::uint64_t out = bit_buffer_ & mask;
    bit_buffer_ >>= m;
    bits_left_ -= m;
    return out;
  }
  const int need = m - bits_left_;
  const std::uint64_t fresh = next();
  const std::uint64_t out = (bit_buffer_ | (fresh << bits_left_)) & mask;
  bit_buffer_ = fresh >> need;
  bits_left_ = 64 - need;
  return out;
}

RngStream RngStream::child(std::uint64_t index) const {
  return RngStream(seed_, mix(stream_id_ + 0x2545f4914f6cdd1dULL, index));
}

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 16) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

MeanEstimate mean_estimate(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n == 0) return {0.0, 0.0, 0};
  const double mean = pairwise_sum(xs) / static_cast<double>(n);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (xs[i] - mean) * (xs[i] - mean);
  const double var = n > 1 ? pairwise_sum(sq) / static_cast<double>(n - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

}  // namespace skewsim
