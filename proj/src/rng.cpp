#include "lbr/rng.hpp"

#include <cmath>

#include <boost/random/normal_distribution.hpp>

namespace lbr {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(const StreamKey& key) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t word : {key.seed, static_cast<std::uint64_t>(key.domain), key.a, key.b, key.c, key.d}) {
    h ^= word;
    h = splitmix64(h);
  }
  for (auto& w : s_) w = splitmix64(h);
}

RngStream::result_type RngStream::operator()() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::exponential() { return -std::log(uniform()); }

double RngStream::normal() {
  // Stateless ziggurat: the draw depends only on the stream position.
  boost::random::normal_distribution<double> standard;
  return standard(*this);
}

std::uint64_t RngStream::below(std::uint64_t n) {
  // Lemire's nearly-divisionless method with rejection for exact uniformity.
  unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = -n % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>((*this)()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace lbr
