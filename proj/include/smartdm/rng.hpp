#ifndef SMARTDM_RNG_HPP
#define SMARTDM_RNG_HPP

#include <cmath>
#include <cstdint>

namespace smartdm {

// Counter-based keyed random stream. Each (seed, stream, substream) triple
// yields an independent deterministic sequence, so parallel consumers get
// identical draws regardless of execution order. The mixer is splitmix64.
class KeyedRng {
 public:
  explicit KeyedRng(std::uint64_t seed, std::uint64_t stream = 0,
                    std::uint64_t substream = 0) {
    state_ = mix(mix(mix(seed + 0x9e3779b97f4a7c15ULL) ^ stream) ^ substream);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform on (0, 1]; never returns 0 so it is log-safe.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_uniform();
  }

  // Standard normal via Box-Muller; pairs are cached.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace smartdm

#endif
