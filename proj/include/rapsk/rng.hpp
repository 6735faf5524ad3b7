#pragma once

#include <cmath>
#include <cstdint>

namespace rapsk {

// splitmix64 finalizer (Steele/Lea/Flood).  Also used standalone to derive
// decorrelated child seeds from (master, point, batch) coordinates.
inline uint64_t mix64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

// Small deterministic PRNG: splitmix64 counter core, Box-Muller normals.
// One instance per (sweep point, batch) so results never depend on how
// batches are distributed over workers.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in (0, 1]; safe as a log() argument
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // standard normal, Box-Muller with cached spare
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double t = 6.283185307179586476925287 * uniform();
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Child stream for batch `batch` of sweep point `point`.  Pure function of
// its arguments: a sweep re-run with more workers replays identical noise.
inline RandomStream derive_stream(uint64_t master, uint64_t point,
                                  uint64_t batch) {
  uint64_t h = mix64(master ^ 0x8BADF00DDEADBEEFULL);
  h = mix64(h ^ (point * 0x9E3779B97F4A7C15ULL));
  h = mix64(h ^ (batch * 0xD1B54A32D192ED03ULL));
  return RandomStream(h);
}

}  // namespace rapsk
