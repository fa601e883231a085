#include "mfabc/rng.hpp"

namespace mfabc {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

constexpr std::uint64_t combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
  std::uint64_t s = combine(seed, stream_id);
  for (auto& word : state_) {
    s += 0x9e3779b97f4a7c15ULL;
    word = mix64(s);
  }
  // xoshiro must not start from the all-zero state
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
    state_[0] = 1;
  }
}

RngStream RngStream::for_item(std::uint64_t seed, StreamTag tag, std::uint64_t iteration,
                              std::uint64_t index) {
  const auto id = combine(combine(static_cast<std::uint64_t>(tag), iteration), index);
  return {seed, id};
}

RngStream RngStream::child(StreamTag tag, std::uint64_t index) const {
  return {seed_, combine(combine(stream_id_, static_cast<std::uint64_t>(tag)), index)};
}

RngStream::result_type RngStream::operator()() noexcept {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform() noexcept {
  // 53 random bits shifted by half an ulp keeps the draw away from 0 and 1
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal(double mean, double sd) {
  return mean + sd * normal_(*this);
}

}  // namespace mfabc
