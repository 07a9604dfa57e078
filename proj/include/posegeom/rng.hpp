#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace posegeom {

// Stream ids used to derive independent sub-generators from one scene seed.
// Scenes are always consumed from their serialized form, so these only need
// to be stable within this implementation.
namespace rng_stream {
inline constexpr std::uint64_t kObject = 1;
inline constexpr std::uint64_t kPose = 2;
inline constexpr std::uint64_t kCamera = 3;
inline constexpr std::uint64_t kNoise = 4;
inline constexpr std::uint64_t kOutlier = 5;
inline constexpr std::uint64_t kSampler = 6;
}  // namespace rng_stream

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Deterministic, portable random source. The engine is std::mt19937_64,
// whose output sequence is pinned by the standard; the distribution
// transforms below are implemented here because std:: distributions are
// not sequence-stable across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x9E3779B97F4A7C15ULL + 1))) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive bounds.
  int uniform_int(int lo, int hi) {
    const int span = hi - lo + 1;
    int v = lo + static_cast<int>(uniform() * span);
    return v > hi ? hi : v;
  }

  // Standard normal via the polar method (pair cached).
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    cached_ = v * m;
    has_cached_ = true;
    return u * m;
  }

  Eigen::Vector3d normal3() {
    Eigen::Vector3d out;
    out << normal(), normal(), normal();
    return out;
  }

  // Uniform on S^3 (4 normals, normalized), canonical sign (w >= 0).
  Eigen::Vector4d unit_quaternion_wxyz() {
    Eigen::Vector4d q;
    do {
      q << normal(), normal(), normal(), normal();
    } while (q.norm() < 1e-12);
    q.normalize();
    if (q(0) < 0.0) q = -q;
    return q;
  }

  // Uniform in the ball of given radius.
  Eigen::Vector3d uniform_in_ball(double radius) {
    Eigen::Vector3d dir;
    do {
      dir = normal3();
    } while (dir.norm() < 1e-12);
    dir.normalize();
    return dir * (radius * std::cbrt(uniform()));
  }

 private:
  std::mt19937_64 engine_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace posegeom
