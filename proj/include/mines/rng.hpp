#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include <Eigen/Core>

namespace mines {

/// Seeded Gaussian source for one run or replicate.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Its seed is SplitMix64(seed) mixed with SplitMix64(stream_id), so
/// different replicate indices give unrelated streams. Normals come from the
/// Box–Muller transform applied to 53-bit uniforms in (0, 1]; the second value
/// of each pair is kept for the next call. std::normal_distribution is not used
/// because its algorithm is implementation-defined.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id), engine_(mix(seed, stream_id)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t normals_drawn() const { return drawn_; }

  /// Uniform on (0, 1].
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal() {
    ++drawn_;
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
  std::uint64_t drawn_ = 0;
};

inline Eigen::VectorXd standard_normal_vector(RngStream& rng, Eigen::Index d) {
  Eigen::VectorXd out(d);
  for (Eigen::Index i = 0; i < d; ++i) out(i) = rng.normal();
  return out;
}

}  // namespace mines
