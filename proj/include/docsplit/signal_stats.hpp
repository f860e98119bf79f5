#pragma once

// Contextual-signal statistics from linguistic annotations: how far
// coreferent mentions sit from their nearest antecedent (in sentences or
// segments), and how often splitting cuts a dependency of the root.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "docsplit/corpus.hpp"

namespace docsplit {

// ---------------------------------------------------------------------------
// Annotations

struct DependencyArc {
  std::size_t child = 0;  // 1-based token index
  std::size_t head = 0;   // 0 = root
  std::string relation;

  friend bool operator==(const DependencyArc&, const DependencyArc&) = default;
};

/// One arc per token, ordered by child index. An empty tree means "no
/// parse available".
struct DependencyTree {
  std::vector<DependencyArc> arcs;

  std::size_t size() const noexcept { return arcs.size(); }
  bool empty() const noexcept { return arcs.empty(); }
  /// Index of the token attached to 0. Requires a validated tree.
  std::size_t root() const;
  /// Throws DataError unless children are 1..n in order, heads are in range,
  /// exactly one token is the root and there are no cycles.
  void validate() const;
};

struct Mention {
  std::size_t sentence = 0;  // 1-based unit index within the document
  std::size_t start = 0;     // 1-based, inclusive
  std::size_t end = 0;       // 1-based, inclusive
  bool is_pronoun = false;
  bool truncated = false;    // set by remapping when the span crossed a split

  friend bool operator==(const Mention&, const Mention&) = default;
};

struct CorefChain {
  std::string document;
  std::vector<Mention> mentions;

  friend bool operator==(const CorefChain&, const CorefChain&) = default;
};

/// Sentences of one document as read from CoNLL-U.
struct AnnotatedDocument {
  std::string id;
  std::vector<DependencyTree> trees;
  std::vector<std::vector<std::string>> forms;
  std::vector<std::vector<bool>> pronoun;  // UPOS == PRON

  std::vector<std::size_t> sentence_lengths() const;
};

/// Reads CoNLL-U. Documents start at "# newdoc" comments; without any, the
/// whole file is one document (use partition_documents to apply a
/// boundary spec). Multiword-token and empty-node lines are skipped.
std::vector<AnnotatedDocument> read_conllu(std::istream& in, const std::string& name = "<conllu>");

/// Regroups the sentences of `docs` into documents of the given sizes.
std::vector<AnnotatedDocument> partition_documents(std::vector<AnnotatedDocument> docs,
                                                   std::span<const std::size_t> sizes);

/// JSON-lines, one chain per line:
///   {"doc": id, "mentions": [{"sent": s, "start": a, "end": b, "pronoun": p}]}
/// with 1-based inclusive positions. Numeric ids are read as their decimal text.
std::vector<CorefChain> read_coref_jsonl(std::istream& in, const std::string& name = "<coref>");

// ---------------------------------------------------------------------------
// Antecedent distances

/// Token counts of the units (sentences or segments) of one document.
struct UnitDocument {
  std::string id;
  std::vector<std::size_t> unit_lengths;
};

struct DistanceHistogram {
  std::size_t d_max = 0;
  std::vector<std::size_t> counts_all;      // index d, 0..d_max
  std::vector<std::size_t> counts_pronoun;  // index d, 0..d_max
  std::size_t dropped_all = 0;              // d > d_max
  std::size_t dropped_pronoun = 0;
  double mean_unit_length = 0.0;
  std::vector<double> normalized_all;       // counts / ((d + 1) * mean_unit_length)
  std::vector<double> normalized_pronoun;
};

/// For every mention after the first in each chain, d = unit index minus the
/// unit index of the nearest preceding mention. Throws DataError on unknown
/// documents, out-of-range positions, unordered mentions or chains with fewer
/// than two mentions.
DistanceHistogram antecedent_histogram(std::span<const UnitDocument> documents, std::span<const CorefChain> chains,
                                       std::size_t d_max);

/// Appendix-style table: distance, tokens attended ((d+1) * mean length),
/// all-mention count, pronoun count.
void write_histogram_tsv(const DistanceHistogram& histogram, std::ostream& out, const std::string& label);

// ---------------------------------------------------------------------------
// Remapping annotations to segment coordinates

struct UnitPosition {
  std::size_t unit = 0;   // 1-based
  std::size_t token = 0;  // 1-based

  friend bool operator==(const UnitPosition&, const UnitPosition&) = default;
};

/// Maps (sentence, token) of one document to (unit, token) after splitting.
class PositionMap {
 public:
  /// split_points[i] is m_S for sentence i+1, or nullopt if it was not split.
  PositionMap(std::vector<std::size_t> sentence_lengths, std::vector<std::optional<std::size_t>> split_points);

  UnitPosition to_unit(std::size_t sentence, std::size_t token) const;
  std::pair<std::size_t, std::size_t> to_sentence(std::size_t unit, std::size_t token) const;

  std::size_t sentence_count() const noexcept { return lengths_.size(); }
  std::size_t unit_count() const noexcept { return unit_lengths_.size(); }
  const std::vector<std::size_t>& unit_lengths() const noexcept { return unit_lengths_; }
  std::optional<std::size_t> split_point(std::size_t sentence) const { return splits_.at(sentence - 1); }

 private:
  std::vector<std::size_t> lengths_;
  std::vector<std::optional<std::size_t>> splits_;
  std::vector<std::size_t> first_unit_;  // per sentence, 1-based
  std::vector<std::size_t> unit_lengths_;
  std::vector<std::size_t> unit_sentence_;  // per unit, 1-based sentence
};

struct RemappedAnnotations {
  PositionMap map;
  std::vector<CorefChain> chains;  // mentions in unit coordinates
  std::size_t truncated_mentions = 0;
  /// For every tree, the unit position of each token.
  std::vector<std::vector<UnitPosition>> tree_positions;
};

/// Re-expresses one document's chains and trees in segment coordinates.
/// Mentions crossing a split are cut to the part holding their first token
/// and flagged. Throws DataError on inconsistent split records.
RemappedAnnotations remap_annotations(std::span<const std::size_t> sentence_lengths,
                                      std::span<const std::optional<std::size_t>> split_points,
                                      std::span<const CorefChain> chains, std::span<const DependencyTree> trees);

// ---------------------------------------------------------------------------
// Broken root dependencies

/// Named relation-label sets. "any" is implicit: every label outside
/// `punctuation`.
struct RelationGroups {
  std::vector<std::pair<std::string, std::set<std::string>>> groups;
  std::set<std::string> punctuation;

  /// Universal Dependencies defaults: subj_obj, complement, modifier.
  static RelationGroups universal_dependencies();
};

struct GroupStat {
  std::string group;
  std::size_t sentences = 0;  // sentences with at least one broken root dependency in the group
  std::size_t total = 0;      // all sentences considered
  double percentage = 0.0;

  friend bool operator==(const GroupStat&, const GroupStat&) = default;
};

/// One tree and one optional split point per sentence. A root dependency is
/// broken when the root and its dependent land in different segments.
/// Labels are compared on their base (text before ':'). Returns one entry per
/// group followed by "any". Throws DataError when a split sentence has no
/// tree or a tree length disagrees with `sentence_lengths`.
std::vector<GroupStat> broken_dependency_stats(std::span<const std::size_t> sentence_lengths,
                                               std::span<const DependencyTree> trees,
                                               std::span<const std::optional<std::size_t>> split_points,
                                               const RelationGroups& groups);

void write_dependency_tsv(const std::vector<GroupStat>& stats, std::ostream& out);

}  // namespace docsplit
