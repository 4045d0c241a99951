// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdint>
#include <random>

namespace nefqvf {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates nearby seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Independent stream `stream` of a master seed. Used for replicate- and
// chain-level fan-out so results do not depend on scheduling.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(master + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream = 0) {
  return Rng(stream_seed(master, stream));
}

// Uniform on (0, 1]; never returns 0 so log() is safe.
inline double uniform_pos(Rng& rng) {
  return 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// log of a Gamma(shape, scale 1) draw; stable for small shapes where the
// draw itself would underflow (shape epsilon puts mass below DBL_MIN).
inline double log_gamma_draw(double shape, Rng& rng) {
  double boost_log = 0.0;
  if (shape < 1.0) {
    boost_log = std::log(uniform_pos(rng)) / shape;
    shape += 1.0;
  }
  std::gamma_distribution<double> g(shape, 1.0);
  return std::log(g(rng)) + boost_log;
}

}  // namespace nefqvf
