#pragma once

// Contrastive pronoun evaluation, McNemar significance, context-shuffle
// ablation and corpus BLEU. Model scores and translations come from external
// systems; nothing here runs a model.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace docsplit {

struct ContrastiveExample {
  std::string id;
  std::string src_sentence;
  std::vector<std::string> src_context;
  std::vector<std::string> tgt_context;
  std::vector<std::string> candidates;  // [0] is the correct translation
  std::size_t ante_distance = 0;
  std::string pronoun_class;

  /// Throws DataError unless there are >= 2 candidates and the context
  /// lists have equal length.
  void validate() const;

  friend bool operator==(const ContrastiveExample&, const ContrastiveExample&) = default;
};

struct ScoreRecord {
  std::string example_id;
  std::vector<double> candidate_scores;  // higher is better
};

struct AccuracyCell {
  std::size_t correct = 0;
  std::size_t n = 0;
  double accuracy() const noexcept { return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n); }

  friend bool operator==(const AccuracyCell&, const AccuracyCell&) = default;
};

/// Antecedent-distance buckets: "0", "1", "2", "3", ">3".
std::string distance_bucket(std::size_t ante_distance);
/// The five bucket labels in table order.
const std::vector<std::string>& distance_buckets();

struct EvalReport {
  double overall_accuracy = 0.0;
  std::size_t n_total = 0;
  std::size_t n_correct = 0;
  std::map<std::string, AccuracyCell> per_distance;  // only populated buckets
  std::map<std::string, AccuracyCell> per_class;
  std::vector<bool> outcomes;  // per example, in test-set order
  std::string score_convention;
};

// ---------------------------------------------------------------------------
// I/O

/// JSON-lines, field names as in ContrastiveExample.
std::vector<ContrastiveExample> read_contrastive_jsonl(std::istream& in, const std::string& name = "<testset>");
void write_contrastive_jsonl(std::span<const ContrastiveExample> examples, std::ostream& out);

/// JSON-lines {"id": ..., "scores": [...]}, or TSV "id<TAB>s1 s2 ...". The
/// format is detected per line.
std::vector<ScoreRecord> read_scores(std::istream& in, const std::string& name = "<scores>");

void write_report_json(const EvalReport& report, std::ostream& out);
/// Aligned columns: Total then one column per distance bucket.
void write_report_table(const EvalReport& report, std::ostream& out, const std::string& system = "system");

/// One 0/1 per line.
std::vector<bool> read_outcomes(std::istream& in, const std::string& name = "<outcomes>");
void write_outcomes(const std::vector<bool>& outcomes, std::ostream& out);

// ---------------------------------------------------------------------------
// Operations

/// An example is correct iff the first candidate scores strictly higher than
/// every other one. Throws DataError on missing, duplicate or unknown score
/// records, count mismatches and non-finite scores.
EvalReport contrastive_accuracy(std::span<const ContrastiveExample> examples, std::span<const ScoreRecord> scores);

struct McNemarResult {
  std::size_t b = 0;  // A correct, B wrong
  std::size_t c = 0;  // A wrong, B correct
  double p_value = 1.0;
  bool exact = true;
};

/// Largest discordant total b + c tested with the exact binomial.
inline constexpr std::size_t kMcNemarExactLimit = 100;

/// Exact two-sided binomial p for b + c <= kMcNemarExactLimit, otherwise the
/// continuity-corrected chi-squared statistic with one degree of freedom.
McNemarResult mcnemar_test(const std::vector<bool>& outcomes_a, const std::vector<bool>& outcomes_b);
McNemarResult mcnemar_from_counts(std::size_t b, std::size_t c);

/// Uniform integer in [0, bound) by rejection sampling on mt19937_64, so the
/// sequence is the same with every standard library.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

/// Random cyclic permutation of 0..n-1 (Sattolo): perm[i] != i for all i.
/// Throws InvalidArgument when n < 2.
std::vector<std::size_t> seeded_derangement(std::size_t n, std::uint64_t seed);

/// Gives example i the context block (source and target together) of example
/// perm[i]; all other fields stay.
std::vector<ContrastiveExample> shuffle_context(std::span<const ContrastiveExample> examples, std::uint64_t seed);

/// BLEU-4 over pre-tokenized sentences, no smoothing, in [0, 100].
struct BleuStats {
  double score = 0.0;
  double brevity_penalty = 0.0;
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;
  std::vector<std::size_t> matches;  // per order 1..4
  std::vector<std::size_t> totals;
  std::vector<double> precisions;
};

BleuStats corpus_bleu_stats(const std::vector<std::vector<std::string>>& hypotheses,
                            const std::vector<std::vector<std::string>>& references);

enum class BleuTokenizer { None, Mteval13a };

/// Whitespace tokenisation, preceded by the mteval-v13a rules when asked.
std::vector<std::string> bleu_tokenize(const std::string& line, BleuTokenizer tokenizer);

/// Corpus BLEU on raw lines. Throws DataError on a length mismatch or an
/// empty corpus.
double corpus_bleu(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
                   BleuTokenizer tokenizer = BleuTokenizer::None);

/// "BLEU = 12.34, ..." summary line.
std::string format_bleu(const BleuStats& stats);

}  // namespace docsplit
