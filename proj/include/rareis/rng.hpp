#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace rareis {

/// Philox4x32-10 block function (Salmon et al., SC'11). Pure function of
/// (counter, key); used as the core of every random stream in the library.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Counter-based random stream. The key is the experiment seed and the
/// stream id occupies the upper half of the counter, so streams with
/// different ids never overlap and each one can be rebuilt from
/// (seed, id) alone, independent of which worker consumes it.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Raw 64 random bits.
  result_type operator()();

  /// Uniform on (0, 1]; never returns 0 so it is safe under log().
  double uniform();

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int block_pos_ = 2;  // next 64-bit word of block_; 2 means exhausted
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

RngStream make_rng_stream(std::uint64_t seed, std::uint64_t index);

}  // namespace rareis
