// Mixture sampling and the single-update Dirichlet posterior over modes.
// Randomness comes from an explicit counter-based splitmix64 stream so every
// result is reproducible bit-for-bit from a seed; integer sample counts are
// kept exact and divided once, which also makes the posterior invariant
// under mode relabeling.
#pragma once

#include <cstdint>

#include "spc.hpp"

namespace modesel {

// Counter-based splitmix64. next() reproduces the reference splitmix64
// sequence for the given seed; substream(i) derives an independent child
// stream. All integer arithmetic, so sequences are identical across
// platforms (gaussian() additionally goes through libm and is only
// guaranteed stable for a given build).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = seed_ + 0x9E3779B97F4A7C15ULL * (++counter_);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return double(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller, two uniforms per draw (no caching, so
  // the stream position never depends on call history).
  double gaussian() {
    double u1 = uniform01();
    const double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Independent child stream; children with distinct indices and streams
  // with distinct seeds do not collide in practice (finalizer-mixed seed).
  RandomStream substream(std::uint64_t index) const {
    std::uint64_t z = seed_ + 0xBF58476D1CE4E5B9ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return RandomStream(z ^ (z >> 31));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

struct PosteriorState {
  std::vector<double> alphas;  // each >= 1
  std::vector<double> probs;   // alphas normalized
};

// Draw k offsets from the mixture: satellite uniform (weight 1/S), then
// uniform over that satellite's merged interval union.
inline std::vector<double> sample_mixture(const MixtureModel& model, std::size_t k,
                                          RandomStream& rng) {
  if (k == 0) throw std::invalid_argument("sample_mixture: k must be >= 1");
  if (model.miuds.empty())
    throw std::invalid_argument("sample_mixture: empty mixture");
  std::vector<double> out;
  out.reserve(k);
  const std::size_t S = model.miuds.size();
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t s =
        std::min(S - 1, std::size_t(rng.uniform01() * double(S)));
    const Miud& m = model.miuds[s];
    double t = rng.uniform01() * m.total_length();
    double b = m.intervals.back().second;
    for (const auto& [lo, hi] : m.intervals) {
      const double len = hi - lo;
      if (t <= len) {
        b = lo + t;
        break;
      }
      t -= len;
    }
    out.push_back(b);
  }
  return out;
}

// One-shot Dirichlet update: alpha_m = 1 + (sample hits over all
// satellites' unmerged mode-m intervals) / S. Counts stay integral until
// one final division, so an independent counting oracle can match the
// result exactly, and the normalizer M + total/S is summation-order-free.
inline PosteriorState update_posterior(const std::vector<double>& samples,
                                       const std::vector<RangeOffsetInterval>& intervals,
                                       std::size_t S, std::size_t M) {
  if (samples.empty())
    throw std::invalid_argument("update_posterior: no samples");
  if (S == 0 || M == 0)
    throw std::invalid_argument("update_posterior: S and M must be >= 1");
  if (intervals.size() != S * M)
    throw std::invalid_argument("update_posterior: need one interval per (s, m)");

  std::vector<std::int64_t> counts(M, 0);
  for (const auto& iv : intervals) {
    if (iv.mode_id < 0 || std::size_t(iv.mode_id) >= M)
      throw std::invalid_argument("update_posterior: interval mode_id out of range");
    std::int64_t c = 0;
    for (const double b : samples)
      if (b >= iv.lo && b <= iv.hi) ++c;  // endpoint-inclusive
    counts[std::size_t(iv.mode_id)] += c;
  }

  std::int64_t total = 0;
  for (const auto c : counts) total += c;

  PosteriorState st;
  st.alphas.resize(M);
  st.probs.resize(M);
  const double denom = double(M) + double(total) / double(S);
  for (std::size_t m = 0; m < M; ++m) {
    st.alphas[m] = 1.0 + double(counts[m]) / double(S);
    st.probs[m] = st.alphas[m] / denom;
  }
  return st;
}

}  // namespace modesel
