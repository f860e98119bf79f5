#include "docsplit/signal_stats.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "docsplit/error.hpp"

namespace docsplit {
namespace {

std::optional<std::size_t> parse_size(std::string_view text) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t end = line.find('\t', pos);
    out.push_back(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return out;
}

std::string base_label(const std::string& relation) { return relation.substr(0, relation.find(':')); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t position_field(const nlohmann::json& mention, const char* key) {
  const auto& v = mention.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw DataError(std::string("mention field '") + key + "' must be a positive integer");
  }
  return v.get<std::size_t>();
}

}  // namespace

// ---------------------------------------------------------------------------
// DependencyTree

std::size_t DependencyTree::root() const {
  for (const auto& arc : arcs) {
    if (arc.head == 0) return arc.child;
  }
  throw DataError("dependency tree has no root");
}

void DependencyTree::validate() const {
  const std::size_t n = arcs.size();
  std::size_t roots = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (arcs[i].child != i + 1) throw DataError("dependency tree tokens must be numbered 1..n in order");
    if (arcs[i].head > n) throw DataError("head index " + std::to_string(arcs[i].head) + " out of range");
    if (arcs[i].head == arcs[i].child) throw DataError("token " + std::to_string(arcs[i].child) + " heads itself");
    if (arcs[i].head == 0) ++roots;
  }
  if (n > 0 && roots != 1) throw DataError("dependency tree must have exactly one root, found " + std::to_string(roots));
  // Every walk towards the root must terminate within n steps.
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t node = i + 1;
    std::size_t steps = 0;
    while (node != 0) {
      node = arcs[node - 1].head;
      if (++steps > n) throw DataError("dependency tree contains a cycle");
    }
  }
}

std::vector<std::size_t> AnnotatedDocument::sentence_lengths() const {
  std::vector<std::size_t> out;
  out.reserve(trees.size());
  for (const auto& t : trees) out.push_back(t.size());
  return out;
}

// ---------------------------------------------------------------------------
// Readers

std::vector<AnnotatedDocument> read_conllu(std::istream& in, const std::string& name) {
  std::vector<AnnotatedDocument> docs;
  DependencyTree tree;
  std::vector<std::string> forms;
  std::vector<bool> pronoun;
  std::size_t sentence_start = 0;

  auto current_doc = [&]() -> AnnotatedDocument& {
    if (docs.empty()) docs.push_back(AnnotatedDocument{default_document_id(1), {}, {}, {}});
    return docs.back();
  };
  auto flush = [&] {
    if (tree.arcs.empty()) return;
    try {
      tree.validate();
    } catch (const DataError& e) {
      throw e.at(name, sentence_start);
    }
    auto& doc = current_doc();
    doc.trees.push_back(std::move(tree));
    doc.forms.push_back(std::move(forms));
    doc.pronoun.push_back(std::move(pronoun));
    tree = {};
    forms.clear();
    pronoun.clear();
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      const std::string body = trim(std::string_view(line).substr(1));
      if (body.rfind("newdoc", 0) == 0) {
        flush();
        std::string id;
        const auto eq = body.find('=');
        if (eq != std::string::npos && trim(std::string_view(body).substr(6, eq - 6)) == "id") {
          id = trim(std::string_view(body).substr(eq + 1));
        }
        if (id.empty()) id = default_document_id(docs.size() + 1);
        docs.push_back(AnnotatedDocument{id, {}, {}, {}});
      }
      continue;
    }
    const auto cols = split_tabs(line);
    if (cols.size() != 10) throw DataError("expected 10 tab-separated columns", name, lineno);
    if (cols[0].find_first_of("-.") != std::string_view::npos) continue;
    const auto id = parse_size(cols[0]);
    const auto head = parse_size(cols[6]);
    if (!id || !head) throw DataError("malformed ID or HEAD column", name, lineno);
    if (tree.arcs.empty()) sentence_start = lineno;
    tree.arcs.push_back(DependencyArc{*id, *head, std::string(cols[7])});
    forms.emplace_back(cols[1]);
    pronoun.push_back(cols[3] == "PRON");
  }
  flush();
  return docs;
}

std::vector<AnnotatedDocument> partition_documents(std::vector<AnnotatedDocument> docs,
                                                   std::span<const std::size_t> sizes) {
  // Same boundaries as the parse already has: keep its document ids.
  if (std::ranges::equal(docs, sizes, {}, [](const AnnotatedDocument& d) { return d.trees.size(); })) return docs;
  AnnotatedDocument all;
  for (auto& d : docs) {
    std::move(d.trees.begin(), d.trees.end(), std::back_inserter(all.trees));
    std::move(d.forms.begin(), d.forms.end(), std::back_inserter(all.forms));
    std::move(d.pronoun.begin(), d.pronoun.end(), std::back_inserter(all.pronoun));
  }
  std::size_t total = 0;
  for (auto n : sizes) total += n;
  if (total != all.trees.size()) {
    throw DataError("boundary spec covers " + std::to_string(total) + " sentences but the annotation has " +
                    std::to_string(all.trees.size()));
  }
  std::vector<AnnotatedDocument> out;
  std::size_t pos = 0;
  for (std::size_t d = 0; d < sizes.size(); ++d) {
    AnnotatedDocument doc;
    doc.id = default_document_id(d + 1);
    for (std::size_t i = 0; i < sizes[d]; ++i, ++pos) {
      doc.trees.push_back(std::move(all.trees[pos]));
      doc.forms.push_back(std::move(all.forms[pos]));
      doc.pronoun.push_back(all.pronoun[pos]);
    }
    out.push_back(std::move(doc));
  }
  return out;
}

std::vector<CorefChain> read_coref_jsonl(std::istream& in, const std::string& name) {
  std::vector<CorefChain> chains;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      CorefChain chain;
      const auto& doc = j.at("doc");
      chain.document = doc.is_string() ? doc.get<std::string>() : doc.dump();
      for (const auto& m : j.at("mentions")) {
        Mention mention;
        mention.sentence = position_field(m, "sent");
        mention.start = position_field(m, "start");
        mention.end = position_field(m, "end");
        mention.is_pronoun = m.value("pronoun", false);
        chain.mentions.push_back(mention);
      }
      chains.push_back(std::move(chain));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("invalid coreference record: ") + e.what(), name, lineno);
    } catch (const DataError& e) {
      throw e.at(name, lineno);
    }
  }
  return chains;
}

// ---------------------------------------------------------------------------
// Histogram

DistanceHistogram antecedent_histogram(std::span<const UnitDocument> documents, std::span<const CorefChain> chains,
                                       std::size_t d_max) {
  std::unordered_map<std::string, const UnitDocument*> by_id;
  std::size_t tokens = 0;
  std::size_t units = 0;
  for (const auto& doc : documents) {
    if (!by_id.emplace(doc.id, &doc).second) throw DataError("duplicate document id '" + doc.id + "'");
    units += doc.unit_lengths.size();
    for (auto n : doc.unit_lengths) tokens += n;
  }

  DistanceHistogram h;
  h.d_max = d_max;
  h.counts_all.assign(d_max + 1, 0);
  h.counts_pronoun.assign(d_max + 1, 0);
  h.mean_unit_length = units == 0 ? 0.0 : static_cast<double>(tokens) / static_cast<double>(units);

  for (const auto& chain : chains) {
    const auto it = by_id.find(chain.document);
    if (it == by_id.end()) throw DataError("chain refers to unknown document '" + chain.document + "'");
    const auto& lengths = it->second->unit_lengths;
    if (chain.mentions.size() < 2) throw DataError("coreference chain needs at least two mentions");
    for (std::size_t i = 0; i < chain.mentions.size(); ++i) {
      const auto& m = chain.mentions[i];
      if (m.sentence < 1 || m.sentence > lengths.size() || m.start < 1 || m.start > m.end ||
          m.end > lengths[m.sentence - 1]) {
        throw DataError("mention position out of range in document '" + chain.document + "'");
      }
      if (i == 0) continue;
      const auto& prev = chain.mentions[i - 1];
      if (std::pair(m.sentence, m.start) < std::pair(prev.sentence, prev.start)) {
        throw DataError("mentions must be ordered by document position in document '" + chain.document + "'");
      }
      const std::size_t d = m.sentence - prev.sentence;
      if (d <= d_max) {
        ++h.counts_all[d];
        if (m.is_pronoun) ++h.counts_pronoun[d];
      } else {
        ++h.dropped_all;
        if (m.is_pronoun) ++h.dropped_pronoun;
      }
    }
  }

  h.normalized_all.resize(d_max + 1, 0.0);
  h.normalized_pronoun.resize(d_max + 1, 0.0);
  if (h.mean_unit_length > 0.0) {
    for (std::size_t d = 0; d <= d_max; ++d) {
      const double attended = static_cast<double>(d + 1) * h.mean_unit_length;
      h.normalized_all[d] = static_cast<double>(h.counts_all[d]) / attended;
      h.normalized_pronoun[d] = static_cast<double>(h.counts_pronoun[d]) / attended;
    }
  }
  return h;
}

void write_histogram_tsv(const DistanceHistogram& h, std::ostream& out, const std::string& label) {
  out << "data\tdistance\ttokens\tall\tpronouns\tnormalized_all\tnormalized_pronouns\n";
  const auto flags = out.flags();
  for (std::size_t d = 0; d <= h.d_max; ++d) {
    out << label << '\t' << d << '\t' << std::fixed << std::setprecision(2)
        << static_cast<double>(d + 1) * h.mean_unit_length << '\t' << h.counts_all[d] << '\t' << h.counts_pronoun[d]
        << '\t' << std::setprecision(6) << h.normalized_all[d] << '\t' << h.normalized_pronoun[d] << '\n';
  }
  out << label << "\t>" << h.d_max << "\t-\t" << h.dropped_all << '\t' << h.dropped_pronoun << "\t-\t-\n";
  out.flags(flags);
}

// ---------------------------------------------------------------------------
// Remapping

PositionMap::PositionMap(std::vector<std::size_t> sentence_lengths, std::vector<std::optional<std::size_t>> split_points)
    : lengths_(std::move(sentence_lengths)), splits_(std::move(split_points)) {
  if (lengths_.size() != splits_.size()) {
    throw DataError("split records cover " + std::to_string(splits_.size()) + " sentences, document has " +
                    std::to_string(lengths_.size()));
  }
  first_unit_.reserve(lengths_.size());
  for (std::size_t i = 0; i < lengths_.size(); ++i) {
    first_unit_.push_back(unit_lengths_.size() + 1);
    const auto& m = splits_[i];
    if (m) {
      if (*m < 1 || *m >= lengths_[i]) {
        throw DataError("inconsistent split record: m_S=" + std::to_string(*m) + " for sentence " +
                        std::to_string(i + 1) + " of length " + std::to_string(lengths_[i]));
      }
      unit_lengths_.push_back(*m);
      unit_sentence_.push_back(i + 1);
      unit_lengths_.push_back(lengths_[i] - *m);
      unit_sentence_.push_back(i + 1);
    } else {
      unit_lengths_.push_back(lengths_[i]);
      unit_sentence_.push_back(i + 1);
    }
  }
}

UnitPosition PositionMap::to_unit(std::size_t sentence, std::size_t token) const {
  if (sentence < 1 || sentence > lengths_.size() || token < 1 || token > lengths_[sentence - 1]) {
    throw DataError("position (" + std::to_string(sentence) + ", " + std::to_string(token) + ") out of range");
  }
  const auto& m = splits_[sentence - 1];
  const std::size_t unit = first_unit_[sentence - 1];
  if (m && token > *m) return UnitPosition{unit + 1, token - *m};
  return UnitPosition{unit, token};
}

std::pair<std::size_t, std::size_t> PositionMap::to_sentence(std::size_t unit, std::size_t token) const {
  if (unit < 1 || unit > unit_lengths_.size() || token < 1 || token > unit_lengths_[unit - 1]) {
    throw DataError("unit position (" + std::to_string(unit) + ", " + std::to_string(token) + ") out of range");
  }
  const std::size_t sentence = unit_sentence_[unit - 1];
  const std::size_t offset = unit == first_unit_[sentence - 1] ? 0 : *splits_[sentence - 1];
  return {sentence, token + offset};
}

RemappedAnnotations remap_annotations(std::span<const std::size_t> sentence_lengths,
                                      std::span<const std::optional<std::size_t>> split_points,
                                      std::span<const CorefChain> chains, std::span<const DependencyTree> trees) {
  RemappedAnnotations out{
      PositionMap({sentence_lengths.begin(), sentence_lengths.end()}, {split_points.begin(), split_points.end()}),
      {},
      0,
      {}};
  const PositionMap& map = out.map;

  out.chains.reserve(chains.size());
  for (const auto& chain : chains) {
    CorefChain mapped{chain.document, {}};
    mapped.mentions.reserve(chain.mentions.size());
    for (const auto& m : chain.mentions) {
      if (m.start > m.end) throw DataError("mention span start after end");
      const UnitPosition first = map.to_unit(m.sentence, m.start);
      const UnitPosition last = map.to_unit(m.sentence, m.end);
      Mention r = m;
      r.sentence = first.unit;
      r.start = first.token;
      if (last.unit == first.unit) {
        r.end = last.token;
      } else {
        r.end = map.unit_lengths()[first.unit - 1];
        r.truncated = true;
        ++out.truncated_mentions;
      }
      mapped.mentions.push_back(r);
    }
    out.chains.push_back(std::move(mapped));
  }

  if (!trees.empty() && trees.size() != sentence_lengths.size()) {
    throw DataError("expected one dependency tree per sentence");
  }
  out.tree_positions.reserve(trees.size());
  for (std::size_t i = 0; i < trees.size(); ++i) {
    std::vector<UnitPosition> positions;
    if (!trees[i].empty()) {
      if (trees[i].size() != sentence_lengths[i]) {
        throw DataError("tree for sentence " + std::to_string(i + 1) + " has " + std::to_string(trees[i].size()) +
                        " tokens, sentence has " + std::to_string(sentence_lengths[i]));
      }
      positions.reserve(trees[i].size());
      for (const auto& arc : trees[i].arcs) positions.push_back(map.to_unit(i + 1, arc.child));
    }
    out.tree_positions.push_back(std::move(positions));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Broken dependencies

RelationGroups RelationGroups::universal_dependencies() {
  RelationGroups g;
  g.groups = {
      {"subj_obj", {"nsubj", "csubj", "obj", "iobj"}},
      {"complement", {"ccomp", "xcomp", "obl"}},
      {"modifier", {"advmod", "amod", "nmod", "nummod", "acl", "advcl"}},
  };
  g.punctuation = {"punct"};
  return g;
}

std::vector<GroupStat> broken_dependency_stats(std::span<const std::size_t> sentence_lengths,
                                               std::span<const DependencyTree> trees,
                                               std::span<const std::optional<std::size_t>> split_points,
                                               const RelationGroups& groups) {
  if (trees.size() != sentence_lengths.size() || split_points.size() != sentence_lengths.size()) {
    throw DataError("expected one tree and one split record per sentence");
  }
  std::vector<GroupStat> stats;
  for (const auto& [name, labels] : groups.groups) stats.push_back(GroupStat{name, 0, sentence_lengths.size(), 0.0});
  stats.push_back(GroupStat{"any", 0, sentence_lengths.size(), 0.0});
  const std::size_t any = stats.size() - 1;

  std::vector<bool> hit(stats.size());
  for (std::size_t i = 0; i < sentence_lengths.size(); ++i) {
    const auto& tree = trees[i];
    const auto& split = split_points[i];
    if (!split) continue;
    if (tree.empty()) throw DataError("missing dependency tree for split sentence " + std::to_string(i + 1));
    if (tree.size() != sentence_lengths[i]) {
      throw DataError("tree for sentence " + std::to_string(i + 1) + " has " + std::to_string(tree.size()) +
                      " tokens, sentence has " + std::to_string(sentence_lengths[i]));
    }
    tree.validate();
    const std::size_t m = *split;
    const std::size_t root = tree.root();
    std::fill(hit.begin(), hit.end(), false);
    for (const auto& arc : tree.arcs) {
      if (arc.head != root) continue;
      if ((arc.child <= m) == (root <= m)) continue;
      const std::string label = base_label(arc.relation);
      for (std::size_t g = 0; g < groups.groups.size(); ++g) {
        if (groups.groups[g].second.contains(label)) hit[g] = true;
      }
      if (!groups.punctuation.contains(label)) hit[any] = true;
    }
    for (std::size_t g = 0; g < stats.size(); ++g) {
      if (hit[g]) ++stats[g].sentences;
    }
  }
  for (auto& s : stats) {
    s.percentage = s.total == 0 ? 0.0 : 100.0 * static_cast<double>(s.sentences) / static_cast<double>(s.total);
  }
  return stats;
}

void write_dependency_tsv(const std::vector<GroupStat>& stats, std::ostream& out) {
  const auto flags = out.flags();
  out << "group\tsentences\ttotal\tpercent\n";
  for (const auto& s : stats) {
    out << s.group << '\t' << s.sentences << '\t' << s.total << '\t' << std::fixed << std::setprecision(2)
        << s.percentage << '\n';
  }
  out.flags(flags);
}

}  // namespace docsplit
