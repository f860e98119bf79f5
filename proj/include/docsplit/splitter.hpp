#pragma once

// Splitting sentence pairs into two consecutive segments.
//
// A split point (m_S, m_T) puts source tokens 1..m_S and target tokens
// 1..m_T in the first segment and the remainder in the second. Both segments
// are non-empty on both sides.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "docsplit/corpus.hpp"

namespace docsplit {

enum class SplitMethod { Middle, Aligned };

struct SplitConfig {
  std::size_t min_length = 7;  // l_min, in source tokens
  SplitMethod method = SplitMethod::Middle;
  std::size_t max_search_radius = 5;
  bool zero_resource = false;
  bool keep_original = false;

  /// Throws InvalidArgument when min_length < 2.
  void validate() const;
};

struct SplitPoint {
  std::size_t source = 0;  // m_S
  std::size_t target = 0;  // m_T
  bool used_fallback = false;

  friend bool operator==(const SplitPoint&, const SplitPoint&) = default;
};

struct SegmentedPair {
  SentencePair first;
  SentencePair second;
  SplitPoint point;
};

/// Audit entry for one split pair. original_index is the 1-based position of
/// the pair in the input corpus.
struct SplitRecord {
  std::size_t original_index = 0;
  SplitPoint point;

  friend bool operator==(const SplitRecord&, const SplitRecord&) = default;
};

/// m_S = floor(|S|/2), m_T = floor(|T|/2). Throws InvalidArgument when a side
/// has fewer than two tokens.
SplitPoint middle_split(const SentencePair& pair);

/// True iff no link crosses the split: every (j, k) has j <= m_S and k <= m_T,
/// or j > m_S and k > m_T.
bool keeps_links_together(const Alignment& alignment, std::size_t m_source, std::size_t m_target);

/// Smallest m_T that keeps every link with j <= m_S in the first target
/// segment, i.e. max{k : (j, k) in A, j <= m_S}; 0 when no such link exists.
std::size_t target_split_for(const Alignment& alignment, std::size_t m_source);

/// Searches m_S = mid, mid+1, mid-1, ..., mid±radius for a split that keeps
/// all links together, deriving m_T from target_split_for. Candidates with no
/// link in the first source segment, or whose m_T leaves an empty target
/// segment, are rejected. Falls back to middle_split when nothing qualifies.
/// Requires an alignment; throws InvalidArgument otherwise.
SplitPoint aligned_split(const SentencePair& pair, std::size_t max_search_radius);

/// Cuts the pair at `point`. Links inside a segment are carried over,
/// re-based to the segment; links crossing the split are dropped.
SegmentedPair apply_split(const SentencePair& pair, const SplitPoint& point);

/// Where to split `pair` under `config`, or nullopt when it is shorter than
/// min_length.
std::optional<SplitPoint> choose_split(const SentencePair& pair, const SplitConfig& config);

/// Document-at-a-time splitting; the streaming core of split_corpus.
class DocumentSplitter {
 public:
  explicit DocumentSplitter(SplitConfig config);

  /// Splits one document. Returns one document, or one per input pair in
  /// zero-resource mode. Appends a record for every split pair.
  std::vector<Document> split(const Document& document, std::vector<SplitRecord>* records = nullptr);

  /// Pairs consumed so far.
  std::size_t pairs_seen() const noexcept { return seen_; }

 private:
  SplitConfig config_;
  std::size_t seen_ = 0;
};

struct SplitResult {
  Corpus corpus;
  std::vector<SplitRecord> records;
};

/// Applies the split to every pair with at least min_length source tokens.
/// Document boundaries are kept unless zero_resource is set. keep_original
/// appends the unsplit documents (ids suffixed ".orig") after the split ones.
SplitResult split_corpus(const Corpus& corpus, const SplitConfig& config);

/// Audit TSV: header line, then index, m_S, m_T, fallback (0/1) per split pair.
void write_audit_header(std::ostream& out);
void write_audit(const std::vector<SplitRecord>& records, std::ostream& out, bool header = true);
std::vector<SplitRecord> read_audit(std::istream& in, const std::string& name = "<audit>");

}  // namespace docsplit
