#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace lbr {

/// Top-level tag separating independent families of substreams.
enum class StreamDomain : std::uint64_t {
  points = 1,
  particle = 2,
  pilot = 3,
  exceedance = 4,
  permutation = 5,
  auxiliary = 6,
  reference = 7,
};

/// Identifies one substream: a master seed, a domain, and up to four
/// integer coordinates (e.g. sample family, replicate, copy, particle).
struct StreamKey {
  std::uint64_t seed = 0;
  StreamDomain domain = StreamDomain::auxiliary;
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::uint64_t c = 0;
  std::uint64_t d = 0;
};

/// Keyed random stream. The state is derived from the full key with a
/// SplitMix64 hash chain and then advanced with xoshiro256**, so a stream's
/// output depends only on its key, never on which thread draws it or when.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(const StreamKey& key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Unit exponential by inversion.
  double exponential();
  /// Standard normal (Boost.Random ziggurat).
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace lbr
