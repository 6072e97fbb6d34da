#include "sgdlab/core/rng.hpp"


namespace sgdlab {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t stream_index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(stream_index + 0x632be59bd9b4e019ULL));
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : RngStream(Key{}, master_seed, stream_index, stream_key(master_seed, stream_index)) {}

RngStream::RngStream(Key, std::uint64_t master_seed, std::uint64_t stream_index, std::uint64_t key)
    : master_seed_(master_seed), stream_index_(stream_index), key_(key) {
  seed_from(key);
}

void Xoshiro256pp::seed(std::uint64_t key) {
  // splitmix64 outputs never make the state all zero in practice; guard anyway.
  std::uint64_t x = key;
  for (auto& w : s_) w = x = splitmix64(x);
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

void RngStream::seed_from(std::uint64_t key) {
  engine_.seed(key);
  normal_.reset();
}

void RngStream::fill_normal(std::span<double> out) {
  for (double& x : out) x = normal_(engine_);
}

double RngStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

RngStream RngStream::substream(std::uint64_t index) const {
  std::uint64_t child = splitmix64(key_ ^ splitmix64(~index));
  return RngStream(Key{}, master_seed_, stream_index_, child);
}

RngStream make_rng(std::uint64_t master_seed, std::uint64_t stream_index) {
  return RngStream(master_seed, stream_index);
}

}  // namespace sgdlab
