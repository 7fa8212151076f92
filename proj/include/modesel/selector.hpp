// Mode selection. The baseline method builds one mixture from the raw
// pseudoranges and takes the posterior argmax. The enhanced method builds M
// corrected mixtures (one per assumed mode), collects the M posteriors into
// a consistency matrix, and resolves it case by case: a row is
// self-consistent when it assigns its own mode the highest probability.
#pragma once

#include "inference.hpp"
#include "multipath.hpp"

namespace modesel {

enum class Method { BaselineSpc, EnhancedSpc };
enum class CaseType { Baseline, Case1, Case2, Case3 };

inline const char* to_string(Method m) {
  return m == Method::BaselineSpc ? "spc" : "enhanced_spc";
}

inline const char* to_string(CaseType c) {
  switch (c) {
    case CaseType::Case1: return "1";
    case CaseType::Case2: return "2";
    case CaseType::Case3: return "3";
    default: return "baseline";
  }
}

struct SelectionResult {
  Method method = Method::BaselineSpc;
  int chosen_mode_id = 0;
  CaseType case_type = CaseType::Baseline;
  std::vector<double> row_probs;  // posterior row backing the choice
};

// probs[i][m]: posterior probability of mode m under the model that assumed
// mode i. Rows sum to 1 and every entry is positive.
struct ConsistencyMatrix {
  std::vector<std::vector<double>> probs;

  std::size_t size() const { return probs.size(); }
};

namespace detail {

// Argmax with ties broken toward the lowest index.
inline std::size_t argmax_lowest(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

inline PosteriorState sampled_posterior(const SpcModel& model, std::size_t n_modes,
                                        std::size_t k, RandomStream& rng) {
  const auto samples = sample_mixture(model.mixture, k, rng);
  return update_posterior(samples, model.intervals, model.mixture.size(), n_modes);
}

inline void validate_matrix(const ConsistencyMatrix& matrix) {
  const std::size_t m = matrix.size();
  if (m == 0) throw std::invalid_argument("selector: empty matrix");
  for (const auto& row : matrix.probs) {
    if (row.size() != m)
      throw std::invalid_argument("selector: matrix must be square");
    double sum = 0.0;
    for (const double p : row) {
      if (!(p > 0.0))
        throw std::invalid_argument("selector: entries must be positive");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("selector: rows must sum to 1");
  }
}

}  // namespace detail

inline SelectionResult select_baseline(const Epoch& epoch, const ModeSet& modes,
                                       const Vec2& anchor, std::size_t k,
                                       RandomStream rng) {
  const SpcModel model = build_spc_model(epoch.observations(), modes, anchor);
  const auto post = detail::sampled_posterior(model, modes.modes.size(), k, rng);
  const std::size_t chosen = detail::argmax_lowest(post.probs);
  return SelectionResult{Method::BaselineSpc, int(chosen), CaseType::Baseline,
                         post.probs};
}

// Row i: correct the pseudoranges assuming mode i, rebuild the mixture, and
// draw a fresh posterior. Each row uses its own substream of `epoch_stream`
// so rows are independent of each other and of the baseline draw.
inline ConsistencyMatrix consistency_matrix(const Scene& scene, const Epoch& epoch,
                                            const ModeSet& modes, std::size_t k,
                                            const RandomStream& epoch_stream) {
  const std::size_t m = modes.modes.size();
  ConsistencyMatrix cm;
  cm.probs.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const EnhancedModel em = build_enhanced_model(scene, modes, epoch, modes.modes[i]);
    RandomStream row_rng = epoch_stream.substream(2 + i);
    cm.probs[i] = detail::sampled_posterior(em.spc, m, k, row_rng).probs;
  }
  return cm;
}

inline SelectionResult select_enhanced(const ConsistencyMatrix& matrix) {
  detail::validate_matrix(matrix);
  const std::size_t m = matrix.size();

  std::vector<std::size_t> consistent;
  for (std::size_t i = 0; i < m; ++i)
    if (detail::argmax_lowest(matrix.probs[i]) == i) consistent.push_back(i);

  std::size_t chosen = 0;
  CaseType ct;
  if (consistent.size() == 1) {
    ct = CaseType::Case1;
    chosen = detail::argmax_lowest(matrix.probs[consistent.front()]);
  } else if (consistent.size() >= 2) {
    // Several self-consistent rows: the largest diagonal entry among them.
    ct = CaseType::Case2;
    chosen = consistent.front();
    for (const std::size_t i : consistent)
      if (matrix.probs[i][i] > matrix.probs[chosen][chosen]) chosen = i;
  } else {
    // No self-consistent row: fall back to the largest diagonal entry.
    ct = CaseType::Case3;
    for (std::size_t i = 1; i < m; ++i)
      if (matrix.probs[i][i] > matrix.probs[chosen][chosen]) chosen = i;
  }
  return SelectionResult{Method::EnhancedSpc, int(chosen), ct, matrix.probs[chosen]};
}

}  // namespace modesel
