#include "docsplit/splitter.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <string>

#include "docsplit/error.hpp"

namespace docsplit {

void SplitConfig::validate() const {
  if (min_length < 2) throw InvalidArgument("l_min must be at least 2");
}

namespace {

void require_splittable(const SentencePair& pair) {
  if (pair.source.size() < 2 || pair.target.size() < 2) {
    throw InvalidArgument("cannot split a pair with a side shorter than 2 tokens (" + std::to_string(pair.source.size()) +
                          "/" + std::to_string(pair.target.size()) + ")");
  }
}

Sentence slice(const Sentence& sentence, std::size_t begin, std::size_t end) {
  Sentence out;
  out.tokens.assign(sentence.tokens.begin() + static_cast<std::ptrdiff_t>(begin),
                    sentence.tokens.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

}  // namespace

SplitPoint middle_split(const SentencePair& pair) {
  require_splittable(pair);
  return SplitPoint{pair.source.size() / 2, pair.target.size() / 2, false};
}

bool keeps_links_together(const Alignment& alignment, std::size_t m_source, std::size_t m_target) {
  return std::all_of(alignment.begin(), alignment.end(), [&](const Link& l) {
    return (l.source <= m_source) == (l.target <= m_target);
  });
}

std::size_t target_split_for(const Alignment& alignment, std::size_t m_source) {
  std::size_t m_target = 0;
  for (const auto& l : alignment) {
    if (l.source <= m_source) m_target = std::max<std::size_t>(m_target, l.target);
  }
  return m_target;
}

SplitPoint aligned_split(const SentencePair& pair, std::size_t max_search_radius) {
  require_splittable(pair);
  if (!pair.alignment) throw InvalidArgument("aligned split needs word alignments");
  const Alignment& links = *pair.alignment;
  const std::size_t src_len = pair.source.size();
  const std::size_t tgt_len = pair.target.size();
  const std::size_t mid = src_len / 2;

  auto try_candidate = [&](std::size_t m_source) -> std::optional<SplitPoint> {
    if (m_source < 1 || m_source >= src_len) return std::nullopt;
    const std::size_t m_target = target_split_for(links, m_source);
    if (m_target < 1 || m_target >= tgt_len) return std::nullopt;
    if (!keeps_links_together(links, m_source, m_target)) return std::nullopt;
    return SplitPoint{m_source, m_target, false};
  };

  if (auto hit = try_candidate(mid)) return *hit;
  for (std::size_t delta = 1; delta <= max_search_radius; ++delta) {
    if (mid + delta >= src_len && delta > mid) break;
    if (auto hit = try_candidate(mid + delta)) return *hit;
    if (delta <= mid) {
      if (auto hit = try_candidate(mid - delta)) return *hit;
    }
  }
  SplitPoint fallback = middle_split(pair);
  fallback.used_fallback = true;
  return fallback;
}

SegmentedPair apply_split(const SentencePair& pair, const SplitPoint& point) {
  const std::size_t ms = point.source;
  const std::size_t mt = point.target;
  if (ms < 1 || ms >= pair.source.size() || mt < 1 || mt >= pair.target.size()) {
    throw InvalidArgument("split point leaves an empty segment");
  }
  SegmentedPair out;
  out.point = point;
  out.first.source = slice(pair.source, 0, ms);
  out.second.source = slice(pair.source, ms, pair.source.size());
  out.first.target = slice(pair.target, 0, mt);
  out.second.target = slice(pair.target, mt, pair.target.size());
  if (pair.alignment) {
    Alignment first, second;
    for (const auto& l : *pair.alignment) {
      if (l.source <= ms && l.target <= mt) {
        first.push_back(l);
      } else if (l.source > ms && l.target > mt) {
        second.push_back(Link{static_cast<std::uint32_t>(l.source - ms), static_cast<std::uint32_t>(l.target - mt)});
      }
    }
    out.first.alignment = std::move(first);
    out.second.alignment = std::move(second);
  }
  return out;
}

std::optional<SplitPoint> choose_split(const SentencePair& pair, const SplitConfig& config) {
  if (pair.source.size() < config.min_length) return std::nullopt;
  if (config.method == SplitMethod::Aligned) {
    if (!pair.alignment) throw DataError("aligned split requires alignments for every pair of length >= l_min");
    return aligned_split(pair, config.max_search_radius);
  }
  return middle_split(pair);
}

DocumentSplitter::DocumentSplitter(SplitConfig config) : config_(config) { config_.validate(); }

std::vector<Document> DocumentSplitter::split(const Document& document, std::vector<SplitRecord>* records) {
  std::vector<Document> out;
  if (!config_.zero_resource) {
    out.push_back(Document{document.id, {}});
    out.back().pairs.reserve(document.pairs.size() * 2);
  }
  std::size_t ordinal = 0;
  for (const auto& pair : document.pairs) {
    ++seen_;
    ++ordinal;
    std::optional<SplitPoint> point;
    try {
      point = choose_split(pair, config_);
    } catch (const Error& e) {
      throw DataError(std::string(e.what()) + " (pair " + std::to_string(seen_) + ")");
    }
    if (config_.zero_resource) out.push_back(Document{document.id + "." + std::to_string(ordinal), {}});
    auto& target = out.back().pairs;
    if (!point) {
      target.push_back(pair);
      continue;
    }
    SegmentedPair seg = apply_split(pair, *point);
    target.push_back(std::move(seg.first));
    target.push_back(std::move(seg.second));
    if (records != nullptr) records->push_back(SplitRecord{seen_, *point});
  }
  return out;
}

SplitResult split_corpus(const Corpus& corpus, const SplitConfig& config) {
  SplitResult result;
  DocumentSplitter splitter(config);
  for (const auto& doc : corpus.documents) {
    for (auto& piece : splitter.split(doc, &result.records)) result.corpus.documents.push_back(std::move(piece));
  }
  if (config.keep_original) {
    for (const auto& doc : corpus.documents) result.corpus.documents.push_back(Document{doc.id + ".orig", doc.pairs});
  }
  return result;
}

void write_audit_header(std::ostream& out) { out << "index\tm_src\tm_tgt\tfallback\n"; }

void write_audit(const std::vector<SplitRecord>& records, std::ostream& out, bool header) {
  if (header) write_audit_header(out);
  for (const auto& r : records) {
    out << r.original_index << '\t' << r.point.source << '\t' << r.point.target << '\t'
        << (r.point.used_fallback ? 1 : 0) << '\n';
  }
}

std::vector<SplitRecord> read_audit(std::istream& in, const std::string& name) {
  std::vector<SplitRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("index\t", 0) == 0) continue;
    std::size_t fields[4];
    std::size_t pos = 0;
    for (int f = 0; f < 4; ++f) {
      const std::size_t end = f < 3 ? line.find('\t', pos) : line.size();
      if (end == std::string::npos) throw DataError("expected 4 tab-separated fields", name, lineno);
      const char* first = line.data() + pos;
      const char* last = line.data() + end;
      auto [ptr, ec] = std::from_chars(first, last, fields[f]);
      if (ec != std::errc{} || ptr != last) throw DataError("malformed audit field", name, lineno);
      pos = end + 1;
    }
    if (fields[3] > 1) throw DataError("fallback flag must be 0 or 1", name, lineno);
    if (!records.empty() && fields[0] <= records.back().original_index) {
      throw DataError("audit indices must be increasing", name, lineno);
    }
    records.push_back(SplitRecord{fields[0], SplitPoint{fields[1], fields[2], fields[3] == 1}});
  }
  return records;
}

}  // namespace docsplit
