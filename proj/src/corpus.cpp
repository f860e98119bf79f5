#include "docsplit/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "docsplit/error.hpp"

namespace docsplit {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Parses a non-negative decimal integer occupying the whole view.
std::optional<std::size_t> parse_index(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  return true;
}

}  // namespace

Sentence Sentence::parse(std::string_view line) {
  if (line.empty()) throw DataError("empty line");
  Sentence sentence;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(' ', start);
    const std::string_view token = line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    if (token.empty()) throw DataError("empty token (leading, trailing or repeated space)");
    if (std::any_of(token.begin(), token.end(), is_space)) throw DataError("token contains whitespace");
    sentence.tokens.emplace_back(token);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return sentence;
}

std::string Sentence::str() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

void normalize(Alignment& alignment) {
  std::sort(alignment.begin(), alignment.end());
  alignment.erase(std::unique(alignment.begin(), alignment.end()), alignment.end());
}

std::size_t Corpus::pair_count() const noexcept {
  std::size_t n = 0;
  for (const auto& doc : documents) n += doc.pairs.size();
  return n;
}

std::vector<SentencePair> Corpus::flatten() const {
  std::vector<SentencePair> out;
  out.reserve(pair_count());
  for (const auto& doc : documents) out.insert(out.end(), doc.pairs.begin(), doc.pairs.end());
  return out;
}

std::vector<std::size_t> Corpus::document_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(documents.size());
  for (const auto& doc : documents) sizes.push_back(doc.pairs.size());
  return sizes;
}

void Corpus::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& doc : documents) {
    if (doc.pairs.empty()) throw DataError("document '" + doc.id + "' is empty");
    if (!seen.insert(doc.id).second) throw DataError("duplicate document id '" + doc.id + "'");
  }
}

std::string default_document_id(std::size_t ordinal) { return std::to_string(ordinal); }

Alignment parse_pharaoh(std::string_view line, std::size_t source_length, std::size_t target_length) {
  Alignment links;
  std::size_t pos = 0;
  while (pos < line.size()) {
    if (line[pos] == ' ') {
      ++pos;
      continue;
    }
    std::size_t end = line.find(' ', pos);
    if (end == std::string_view::npos) end = line.size();
    const std::string_view item = line.substr(pos, end - pos);
    pos = end;

    const std::size_t dash = item.find('-');
    if (dash == std::string_view::npos) throw DataError("malformed alignment token '" + std::string(item) + "'");
    const auto j = parse_index(item.substr(0, dash));
    const auto k = parse_index(item.substr(dash + 1));
    if (!j || !k) throw DataError("malformed alignment token '" + std::string(item) + "'");
    if (*j >= source_length || *k >= target_length) {
      throw DataError("alignment index out of range '" + std::string(item) + "' for lengths " +
                      std::to_string(source_length) + "/" + std::to_string(target_length));
    }
    links.push_back(Link{static_cast<std::uint32_t>(*j + 1), static_cast<std::uint32_t>(*k + 1)});
  }
  normalize(links);
  return links;
}

std::string format_pharaoh(const Alignment& alignment) {
  std::string out;
  for (const auto& link : alignment) {
    if (!out.empty()) out += ' ';
    out += std::to_string(link.source - 1);
    out += '-';
    out += std::to_string(link.target - 1);
  }
  return out;
}

std::vector<std::size_t> read_boundary_spec(std::istream& in, const std::string& name) {
  std::vector<std::size_t> sizes;
  std::string line;
  std::size_t lineno = 0;
  while (read_line(in, line)) {
    ++lineno;
    const auto value = parse_index(line);
    if (!value) throw DataError("malformed boundary spec entry '" + line + "'", name, lineno);
    if (*value == 0) throw DataError("boundary spec entry must be positive", name, lineno);
    sizes.push_back(*value);
  }
  return sizes;
}

void write_boundary_spec(std::span<const std::size_t> sizes, std::ostream& out) {
  for (std::size_t n : sizes) out << n << '\n';
}

std::vector<std::size_t> synthesize_boundary_spec(std::size_t n_pairs, std::size_t doc_len) {
  if (doc_len == 0) throw InvalidArgument("doc_len must be at least 1");
  std::vector<std::size_t> sizes(n_pairs / doc_len, doc_len);
  if (n_pairs % doc_len != 0) sizes.push_back(n_pairs % doc_len);
  return sizes;
}

// ---------------------------------------------------------------------------

ParallelReader::ParallelReader(std::istream& source, std::istream& target, std::vector<std::size_t> document_sizes,
                               std::istream* alignments, Names names)
    : source_(source), target_(target), alignments_(alignments), sizes_(std::move(document_sizes)), names_(std::move(names)) {}

std::optional<SentencePair> ParallelReader::read_pair() {
  const bool has_src = read_line(source_, src_line_);
  const bool has_tgt = read_line(target_, tgt_line_);
  if (!has_src && !has_tgt) {
    if (alignments_ != nullptr && read_line(*alignments_, aln_line_)) {
      throw DataError("line-count mismatch: alignment file has more lines than the corpus", names_.alignments, line_ + 1);
    }
    return std::nullopt;
  }
  ++line_;
  if (has_src != has_tgt) {
    throw DataError("line-count mismatch: " + (has_src ? names_.target : names_.source) + " ended early",
                    has_src ? names_.target : names_.source, line_);
  }

  SentencePair pair;
  try {
    pair.source = Sentence::parse(src_line_);
  } catch (const DataError& e) {
    throw e.at(names_.source, line_);
  }
  try {
    pair.target = Sentence::parse(tgt_line_);
  } catch (const DataError& e) {
    throw e.at(names_.target, line_);
  }
  if (alignments_ != nullptr) {
    if (!read_line(*alignments_, aln_line_)) {
      throw DataError("line-count mismatch: alignment file ended early", names_.alignments, line_);
    }
    try {
      pair.alignment = parse_pharaoh(aln_line_, pair.source.size(), pair.target.size());
    } catch (const DataError& e) {
      throw e.at(names_.alignments, line_);
    }
  }
  return pair;
}

std::optional<Document> ParallelReader::next() {
  if (done_) return std::nullopt;

  Document doc;
  doc.id = default_document_id(next_doc_ + 1);
  if (sizes_.empty()) {
    while (auto pair = read_pair()) doc.pairs.push_back(std::move(*pair));
    done_ = true;
    if (doc.pairs.empty()) return std::nullopt;
    ++next_doc_;
    return doc;
  }

  if (next_doc_ == sizes_.size()) {
    done_ = true;
    if (read_pair()) {
      throw DataError("boundary spec covers " + std::to_string(line_ - 1) + " pairs but the corpus is longer",
                      names_.boundaries);
    }
    return std::nullopt;
  }

  const std::size_t want = sizes_[next_doc_];
  doc.pairs.reserve(want);
  for (std::size_t i = 0; i < want; ++i) {
    auto pair = read_pair();
    if (!pair) {
      throw DataError("boundary index out of range: document " + std::to_string(next_doc_ + 1) + " needs " +
                          std::to_string(want) + " pairs but the corpus ends at " + std::to_string(line_),
                      names_.boundaries, next_doc_ + 1);
    }
    doc.pairs.push_back(std::move(*pair));
  }
  ++next_doc_;
  return doc;
}

ParallelWriter::ParallelWriter(std::ostream& source, std::ostream& target, std::ostream* boundaries)
    : source_(source), target_(target), boundaries_(boundaries) {}

void ParallelWriter::write(const Document& document) {
  for (const auto& pair : document.pairs) {
    source_ << pair.source.str() << '\n';
    target_ << pair.target.str() << '\n';
  }
  if (boundaries_ != nullptr) *boundaries_ << document.pairs.size() << '\n';
}

// ---------------------------------------------------------------------------

Corpus read_parallel(std::istream& source, std::istream& target, const std::vector<std::size_t>* document_sizes,
                     const ParallelReader::Names& names) {
  ParallelReader reader(source, target, document_sizes ? *document_sizes : std::vector<std::size_t>{}, nullptr, names);
  Corpus corpus;
  while (auto doc = reader.next()) corpus.documents.push_back(std::move(*doc));
  return corpus;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for reading", path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing", path.string());
  return out;
}

Corpus load_parallel(const std::filesystem::path& source, const std::filesystem::path& target,
                     const std::optional<std::filesystem::path>& boundaries) {
  ParallelReader::Names names;
  names.source = source.string();
  names.target = target.string();
  std::vector<std::size_t> sizes;
  if (boundaries) {
    names.boundaries = boundaries->string();
    auto in = open_input(*boundaries);
    sizes = read_boundary_spec(in, names.boundaries);
    if (sizes.empty()) throw DataError("boundary spec is empty", names.boundaries);
  }
  auto src = open_input(source);
  auto tgt = open_input(target);
  return read_parallel(src, tgt, boundaries ? &sizes : nullptr, names);
}

void write_parallel(const Corpus& corpus, std::ostream& source, std::ostream& target, std::ostream* boundaries) {
  ParallelWriter writer(source, target, boundaries);
  for (const auto& doc : corpus.documents) writer.write(doc);
}

Corpus synthesize_boundaries(const Corpus& corpus, std::size_t doc_len) {
  const auto sizes = synthesize_boundary_spec(corpus.pair_count(), doc_len);
  Corpus out;
  out.documents.reserve(sizes.size());
  auto it = sizes.begin();
  for (const auto& doc : corpus.documents) {
    for (const auto& pair : doc.pairs) {
      if (out.documents.empty() || out.documents.back().pairs.size() == *it) {
        if (!out.documents.empty()) ++it;
        out.documents.push_back(Document{default_document_id(out.documents.size() + 1), {}});
        out.documents.back().pairs.reserve(*it);
      }
      out.documents.back().pairs.push_back(pair);
    }
  }
  return out;
}

void attach_alignments(Corpus& corpus, std::istream& in, const std::string& name) {
  std::string line;
  std::size_t lineno = 0;
  for (auto& doc : corpus.documents) {
    for (auto& pair : doc.pairs) {
      ++lineno;
      if (!read_line(in, line)) {
        throw DataError("line-count mismatch: alignment file has fewer lines than the corpus", name, lineno);
      }
      try {
        pair.alignment = parse_pharaoh(line, pair.source.size(), pair.target.size());
      } catch (const DataError& e) {
        throw e.at(name, lineno);
      }
    }
  }
  if (read_line(in, line)) {
    throw DataError("line-count mismatch: alignment file has more lines than the corpus", name, lineno + 1);
  }
}

Corpus attach_alignments(Corpus corpus, const std::filesystem::path& path) {
  auto in = open_input(path);
  attach_alignments(corpus, in, path.string());
  return corpus;
}

void write_pharaoh(const Corpus& corpus, std::ostream& out) {
  for (const auto& doc : corpus.documents) {
    for (const auto& pair : doc.pairs) {
      if (pair.alignment) out << format_pharaoh(*pair.alignment);
      out << '\n';
    }
  }
}

}  // namespace docsplit
