#pragma once

// Unsupervised source-to-target word alignment: IBM Model 1 trained with EM,
// optionally reweighted by a fixed diagonal prior
//   p(j | k) ∝ exp(-tension * |j/|S| - k/|T||)
// in the style of fast_align (the tension is not re-estimated).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "docsplit/corpus.hpp"

namespace docsplit {

/// Probability assigned to (source, target) combinations never observed
/// together in training.
inline constexpr double kOovFloor = 1e-12;

struct AlignerConfig {
  int iterations = 5;
  bool use_diagonal_prior = false;
  double diagonal_tension = 4.0;
  bool include_null = true;
  // Model 1 EM is deterministic; kept so stochastic variants share a config.
  std::uint64_t seed = 0;
  // Worker threads for the E-step and Viterbi pass. Results do not depend on it.
  unsigned threads = 1;

  /// Throws InvalidArgument when iterations < 1 or the tension is negative.
  void validate() const;
};

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};

/// Lexical translation probabilities t(target | source). Row 0 is the NULL
/// source word when the model includes it.
class TranslationTable {
 public:
  using TypeId = std::uint32_t;
  static constexpr TypeId kNull = 0;

  /// t(target | source), kOovFloor if the combination is unknown.
  double prob(std::string_view source, std::string_view target) const;
  /// t(target | NULL), kOovFloor if unknown or the model has no NULL word.
  double null_prob(std::string_view target) const;

  bool has_null() const noexcept { return has_null_; }
  bool knows_source(std::string_view token) const { return source_id(token).has_value(); }
  bool knows_target(std::string_view token) const { return target_id(token).has_value(); }

  std::optional<TypeId> source_id(std::string_view token) const;
  std::optional<TypeId> target_id(std::string_view token) const;

  /// Id-based access; `source` may be kNull.
  double prob(TypeId source, TypeId target) const;

  /// Number of source rows including the NULL row.
  std::size_t source_rows() const noexcept { return offsets_.size() - 1; }
  /// Sum of the row's probabilities (1 for every non-empty row).
  double row_sum(TypeId source) const;
  /// Number of target types with an entry in the row.
  std::size_t row_size(TypeId source) const { return offsets_[source + 1] - offsets_[source]; }

  /// Corpus log-likelihood under the initial parameters and after every
  /// M-step: iterations + 1 entries.
  const std::vector<double>& log_likelihood() const noexcept { return log_likelihood_; }

 private:
  friend class AlignerTrainer;

  std::optional<std::size_t> slot(TypeId source, TypeId target) const;

  bool has_null_ = true;
  using Vocabulary = std::unordered_map<std::string, TypeId, StringHash, std::equal_to<>>;

  Vocabulary source_vocab_;
  Vocabulary target_vocab_;
  // CSR over source rows: targets_[offsets_[s] .. offsets_[s+1]) sorted.
  std::vector<std::size_t> offsets_{0};
  std::vector<TypeId> targets_;
  std::vector<double> probs_;
  std::vector<double> log_likelihood_;
};

/// EM training. Initialisation is uniform over the target types that
/// co-occur with each source type. Throws InvalidArgument on an empty corpus
/// or an invalid config.
TranslationTable train(const Corpus& corpus, const AlignerConfig& config);

/// Best source position for every target position. Links to NULL are
/// omitted, ties go to the smallest source index (NULL first), and target
/// types unknown to the table stay unaligned when NULL is enabled.
Alignment viterbi_align(const SentencePair& pair, const TranslationTable& table, const AlignerConfig& config);

/// train + viterbi_align over every pair.
Corpus align_corpus(Corpus corpus, const AlignerConfig& config);

}  // namespace docsplit
