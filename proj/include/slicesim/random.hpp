#ifndef SLICESIM_RANDOM_HPP_
#define SLICESIM_RANDOM_HPP_

#include <cstdint>
#include <random>

namespace slicesim {

using Rng = std::mt19937_64;

enum class Stream : std::uint32_t {
  kMobility = 1,
  kFading = 2,
  kShadowing = 3,
  kAgentNoise = 4,
  kAgentInit = 5,
  kReplay = 6,
  kAgents = 7,
  kTraining = 8,
  kEvaluation = 9,
};

/// Deterministic seed for one named consumer of a base seed. Streams are
/// independent of each other, so turning one consumer off never shifts the
/// sequence another consumer sees.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(base),
                    static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

inline Rng make_rng(std::uint64_t base, Stream stream, std::uint64_t index = 0) {
  return Rng(derive_seed(base, static_cast<std::uint64_t>(stream), index));
}

/// Scenario-side streams. Agent streams live with the agents.
struct ScenarioRngs {
  Rng mobility;
  Rng fading;
  Rng shadowing;

  explicit ScenarioRngs(std::uint64_t seed)
      : mobility(make_rng(seed, Stream::kMobility)),
        fading(make_rng(seed, Stream::kFading)),
        shadowing(make_rng(seed, Stream::kShadowing)) {}

  bool operator==(const ScenarioRngs&) const = default;
};

}  // namespace slicesim

#endif  // SLICESIM_RANDOM_HPP_
