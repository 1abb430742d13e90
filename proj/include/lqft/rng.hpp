#pragma once

#include <cstdint>
#include <random>

namespace lqft {

// Reproducible random stream keyed by (seed, stream_id). Independent replicas
// use distinct stream ids.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  double normal() { return normal_(engine_); }
  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  void fill_normal(double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = normal_(engine_);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Stream ids for the separate random ingredients of one replica.
enum class StreamPurpose : std::uint64_t { bulk = 0, boundary = 1, volume = 2, resample = 3, maps = 4, misc = 7 };

inline std::uint64_t stream_id(std::uint64_t replica, StreamPurpose purpose) {
  return replica * 8 + static_cast<std::uint64_t>(purpose);
}

}  // namespace lqft
