#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace mfabc {

/// Labels the role a random stream plays so that streams drawn for different
/// purposes at the same (iteration, particle) never coincide.
enum class StreamTag : std::uint64_t {
  kInit = 1,
  kMove = 2,
  kResample = 3,
  kHfSim = 4,
  kLfSim = 5,
  kObserved = 6,
  kChain = 7,
  kAssess = 8,
  kDiagnostic = 9,
};

/// Mixes a 64-bit word; the SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic random stream identified by a (seed, stream_id) pair.
///
/// Streams are xoshiro256++ generators whose state is expanded from the pair
/// with SplitMix64, so the same pair always replays the same sequence and
/// distinct pairs give decorrelated sequences. Work items (a particle in an
/// iteration) each own a stream, which makes results independent of how the
/// items are scheduled across threads.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  /// Stream for a (tag, iteration, index) work item under a base seed.
  static RngStream for_item(std::uint64_t seed, StreamTag tag, std::uint64_t iteration,
                            std::uint64_t index);

  /// Derives an independent child stream without advancing this one.
  [[nodiscard]] RngStream child(StreamTag tag, std::uint64_t index) const;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double normal(double mean, double sd);

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_{};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace mfabc
