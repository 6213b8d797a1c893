#ifndef RTM_RNG_H_
#define RTM_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace rtm {

// Seedable generator with a platform-stable output sequence. The engine is
// std::mt19937_64, whose sequence is fixed by the standard; doubles are built
// from the top 53 bits, so no implementation-defined distribution is involved.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1).
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on [lo, hi); returns lo when lo == hi.
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Uniform integer in [0, n).
  int UniformInt(int n) {
    return static_cast<int>(Uniform() * static_cast<double>(n));
  }

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer.
uint64_t MixSeed(uint64_t x);

// Derives an independent stream seed from a base seed and a stream index.
uint64_t DeriveSeed(uint64_t base, uint64_t stream);

// Same, with a textual tag folded in (FNV-1a) so streams can be named.
uint64_t DeriveSeed(uint64_t base, std::string_view tag, uint64_t stream = 0);

}  // namespace rtm

#endif  // RTM_RNG_H_
