#pragma once

// Tokenized parallel corpora with document structure.
//
// Token indices are 1-based everywhere in memory. File formats keep their
// native conventions: Pharaoh alignment files are 0-based.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace docsplit {

struct Sentence {
  std::vector<std::string> tokens;

  std::size_t size() const noexcept { return tokens.size(); }

  /// Splits a line on single spaces. Throws DataError on an empty line, an
  /// empty token (doubled/leading/trailing space) or a token holding
  /// whitespace.
  static Sentence parse(std::string_view line);

  std::string str() const;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

/// One alignment link; `source` indexes the source sentence and `target` the
/// target sentence, both 1-based.
struct Link {
  std::uint32_t source = 0;
  std::uint32_t target = 0;

  friend auto operator<=>(const Link&, const Link&) = default;
};

/// Sorted, duplicate-free set of links.
using Alignment = std::vector<Link>;

/// Sorts and removes duplicates in place.
void normalize(Alignment& alignment);

struct SentencePair {
  Sentence source;
  Sentence target;
  std::optional<Alignment> alignment;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

struct Document {
  std::string id;
  std::vector<SentencePair> pairs;

  friend bool operator==(const Document&, const Document&) = default;
};

struct Corpus {
  std::vector<Document> documents;

  std::size_t pair_count() const noexcept;

  /// All pairs in corpus order, ignoring document boundaries.
  std::vector<SentencePair> flatten() const;

  /// Number of pairs per document, in order.
  std::vector<std::size_t> document_sizes() const;

  /// Throws DataError if a document is empty or ids repeat.
  void validate() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Default id of the n-th document (1-based): its ordinal as text.
std::string default_document_id(std::size_t ordinal);

// ---------------------------------------------------------------------------
// Pharaoh alignments

/// Parses one line of "j-k" pairs (0-based) into 1-based links. Empty line
/// yields an empty alignment. Duplicates are dropped.
Alignment parse_pharaoh(std::string_view line, std::size_t source_length, std::size_t target_length);

/// Formats 1-based links back as 0-based "j-k" pairs.
std::string format_pharaoh(const Alignment& alignment);

// ---------------------------------------------------------------------------
// Boundary-spec sidecar: one positive integer per line, the size of each
// consecutive document.

std::vector<std::size_t> read_boundary_spec(std::istream& in, const std::string& name = "<boundaries>");
void write_boundary_spec(std::span<const std::size_t> sizes, std::ostream& out);

/// Partition of n_pairs into runs of doc_len, the last one possibly shorter.
std::vector<std::size_t> synthesize_boundary_spec(std::size_t n_pairs, std::size_t doc_len);

// ---------------------------------------------------------------------------
// Streaming access

/// File names used in error messages.
struct InputNames {
  std::string source = "<source>";
  std::string target = "<target>";
  std::string boundaries = "<boundaries>";
  std::string alignments = "<alignments>";
};

/// Reads a parallel corpus one document at a time. With no document sizes the
/// whole input is a single document.
class ParallelReader {
 public:
  using Names = InputNames;

  ParallelReader(std::istream& source, std::istream& target, std::vector<std::size_t> document_sizes = {},
                 std::istream* alignments = nullptr, Names names = {});

  /// Next document, or nullopt at end of input. Throws DataError on
  /// mismatched line counts, empty lines or boundary overrun.
  std::optional<Document> next();

  /// Pairs read so far.
  std::size_t pairs_read() const noexcept { return line_; }

 private:
  std::optional<SentencePair> read_pair();

  std::istream& source_;
  std::istream& target_;
  std::istream* alignments_;
  std::vector<std::size_t> sizes_;
  Names names_;
  std::size_t next_doc_ = 0;
  std::size_t line_ = 0;
  bool done_ = false;
  std::string src_line_, tgt_line_, aln_line_;
};

/// Writes documents to the parallel-text and boundary-spec formats.
class ParallelWriter {
 public:
  ParallelWriter(std::ostream& source, std::ostream& target, std::ostream* boundaries = nullptr);

  void write(const Document& document);

 private:
  std::ostream& source_;
  std::ostream& target_;
  std::ostream* boundaries_;
};

// ---------------------------------------------------------------------------
// Whole-corpus operations

Corpus read_parallel(std::istream& source, std::istream& target, const std::vector<std::size_t>* document_sizes = nullptr,
                     const ParallelReader::Names& names = {});

Corpus load_parallel(const std::filesystem::path& source, const std::filesystem::path& target,
                     const std::optional<std::filesystem::path>& boundaries = std::nullopt);

void write_parallel(const Corpus& corpus, std::ostream& source, std::ostream& target, std::ostream* boundaries = nullptr);

/// Re-partitions the flattened pair stream into documents of doc_len pairs.
/// Throws InvalidArgument if doc_len is 0.
Corpus synthesize_boundaries(const Corpus& corpus, std::size_t doc_len);

/// Populates every pair's alignment from a Pharaoh file in corpus order.
void attach_alignments(Corpus& corpus, std::istream& in, const std::string& name = "<alignments>");
Corpus attach_alignments(Corpus corpus, const std::filesystem::path& path);

/// One Pharaoh line per pair; pairs without alignment produce empty lines.
void write_pharaoh(const Corpus& corpus, std::ostream& out);

/// Opens a file for reading, throwing DataError if it cannot be opened.
std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace docsplit
