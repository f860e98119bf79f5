#include "docsplit/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "docsplit/error.hpp"

namespace docsplit {
namespace {

using nlohmann::json;

std::string id_text(const json& value) { return value.is_string() ? value.get<std::string>() : value.dump(); }

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction);
  return buf;
}

}  // namespace

void ContrastiveExample::validate() const {
  if (candidates.size() < 2) throw DataError("example '" + id + "' needs at least two candidates");
  if (src_context.size() != tgt_context.size()) {
    throw DataError("example '" + id + "' has source and target contexts of different lengths");
  }
}

std::string distance_bucket(std::size_t ante_distance) {
  return ante_distance > 3 ? std::string(">3") : std::to_string(ante_distance);
}

const std::vector<std::string>& distance_buckets() {
  static const std::vector<std::string> buckets{"0", "1", "2", "3", ">3"};
  return buckets;
}

// ---------------------------------------------------------------------------
// I/O

std::vector<ContrastiveExample> read_contrastive_jsonl(std::istream& in, const std::string& name) {
  std::vector<ContrastiveExample> examples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    try {
      const json j = json::parse(line);
      ContrastiveExample ex;
      ex.id = id_text(j.at("id"));
      ex.src_sentence = j.at("src_sentence").get<std::string>();
      ex.src_context = j.value("src_context", std::vector<std::string>{});
      ex.tgt_context = j.value("tgt_context", std::vector<std::string>{});
      ex.candidates = j.at("candidates").get<std::vector<std::string>>();
      const auto d = j.at("ante_distance").get<long long>();
      if (d < 0) throw DataError("ante_distance must be non-negative");
      ex.ante_distance = static_cast<std::size_t>(d);
      ex.pronoun_class = j.value("pronoun_class", std::string{});
      ex.validate();
      examples.push_back(std::move(ex));
    } catch (const json::exception& e) {
      throw DataError(std::string("invalid contrastive example: ") + e.what(), name, lineno);
    } catch (const DataError& e) {
      throw e.at(name, lineno);
    }
  }
  return examples;
}

void write_contrastive_jsonl(std::span<const ContrastiveExample> examples, std::ostream& out) {
  for (const auto& ex : examples) {
    json j;
    j["id"] = ex.id;
    j["src_sentence"] = ex.src_sentence;
    j["src_context"] = ex.src_context;
    j["tgt_context"] = ex.tgt_context;
    j["candidates"] = ex.candidates;
    j["ante_distance"] = ex.ante_distance;
    j["pronoun_class"] = ex.pronoun_class;
    out << j.dump() << '\n';
  }
}

std::vector<ScoreRecord> read_scores(std::istream& in, const std::string& name) {
  std::vector<ScoreRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    ScoreRecord rec;
    const auto first = line.find_first_not_of(" \t");
    if (line[first] == '{') {
      try {
        const json j = json::parse(line);
        rec.example_id = id_text(j.at("id"));
        for (const auto& s : j.at("scores")) {
          rec.candidate_scores.push_back(s.is_null() ? std::numeric_limits<double>::quiet_NaN() : s.get<double>());
        }
      } catch (const json::exception& e) {
        throw DataError(std::string("invalid score record: ") + e.what(), name, lineno);
      }
    } else {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw DataError("expected 'id<TAB>scores'", name, lineno);
      rec.example_id = line.substr(0, tab);
      std::istringstream fields(line.substr(tab + 1));
      std::string field;
      while (fields >> field) {
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
        if (ec != std::errc{} || ptr != field.data() + field.size()) {
          throw DataError("malformed score '" + field + "'", name, lineno);
        }
        rec.candidate_scores.push_back(value);
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void write_report_json(const EvalReport& report, std::ostream& out) {
  json j;
  j["overall_accuracy"] = report.overall_accuracy;
  j["n_total"] = report.n_total;
  j["n_correct"] = report.n_correct;
  json per_distance = json::object();
  for (const auto& [bucket, cell] : report.per_distance) {
    per_distance[bucket] = {{"accuracy", cell.accuracy()}, {"n", cell.n}, {"correct", cell.correct}};
  }
  j["per_distance"] = per_distance;
  json per_class = json::object();
  for (const auto& [cls, cell] : report.per_class) {
    per_class[cls] = {{"accuracy", cell.accuracy()}, {"n", cell.n}, {"correct", cell.correct}};
  }
  j["per_class"] = per_class;
  j["metadata"] = {{"score_convention", report.score_convention}, {"tie_rule", "ties count as incorrect"}};
  out << j.dump(2) << '\n';
}

void write_report_table(const EvalReport& report, std::ostream& out, const std::string& system) {
  std::vector<std::string> header{"", "Total"};
  std::vector<std::string> row{system, percent(report.overall_accuracy)};
  std::vector<std::string> counts{"n", std::to_string(report.n_total)};
  for (const auto& bucket : distance_buckets()) {
    header.push_back("d=" + bucket);
    if (bucket == ">3") header.back() = "d>3";
    const auto it = report.per_distance.find(bucket);
    row.push_back(it == report.per_distance.end() ? "-" : percent(it->second.accuracy()));
    counts.push_back(it == report.per_distance.end() ? "0" : std::to_string(it->second.n));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto* r : {&header, &row, &counts}) {
    for (std::size_t i = 0; i < r->size(); ++i) width[i] = std::max(width[i], (*r)[i].size());
  }
  for (const auto* r : {&header, &row, &counts}) {
    for (std::size_t i = 0; i < r->size(); ++i) {
      if (i == 0) {
        out << std::left << std::setw(static_cast<int>(width[i])) << (*r)[i];
      } else {
        out << "  " << std::right << std::setw(static_cast<int>(width[i])) << (*r)[i];
      }
    }
    out << '\n';
  }
  out << std::left;
}

std::vector<bool> read_outcomes(std::istream& in, const std::string& name) {
  std::vector<bool> outcomes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "1") {
      outcomes.push_back(true);
    } else if (line == "0") {
      outcomes.push_back(false);
    } else {
      throw DataError("expected 0 or 1", name, lineno);
    }
  }
  return outcomes;
}

void write_outcomes(const std::vector<bool>& outcomes, std::ostream& out) {
  for (bool o : outcomes) out << (o ? '1' : '0') << '\n';
}

// ---------------------------------------------------------------------------
// Contrastive accuracy

EvalReport contrastive_accuracy(std::span<const ContrastiveExample> examples, std::span<const ScoreRecord> scores) {
  std::unordered_map<std::string, const ScoreRecord*> by_id;
  for (const auto& rec : scores) {
    if (!by_id.emplace(rec.example_id, &rec).second) {
      throw DataError("duplicate score record for example '" + rec.example_id + "'");
    }
  }
  std::unordered_map<std::string, bool> seen_examples;
  for (const auto& ex : examples) {
    if (!seen_examples.emplace(ex.id, true).second) throw DataError("duplicate example id '" + ex.id + "'");
  }
  for (const auto& rec : scores) {
    if (!seen_examples.contains(rec.example_id)) {
      throw DataError("score record for unknown example '" + rec.example_id + "'");
    }
  }

  EvalReport report;
  report.outcomes.reserve(examples.size());
  for (const auto& ex : examples) {
    ex.validate();
    const auto it = by_id.find(ex.id);
    if (it == by_id.end()) throw DataError("missing score record for example '" + ex.id + "'");
    const auto& s = it->second->candidate_scores;
    if (s.size() != ex.candidates.size()) {
      throw DataError("example '" + ex.id + "' has " + std::to_string(ex.candidates.size()) + " candidates but " +
                      std::to_string(s.size()) + " scores");
    }
    if (!std::all_of(s.begin(), s.end(), [](double v) { return std::isfinite(v); })) {
      throw DataError("example '" + ex.id + "' has a non-finite score");
    }
    const bool correct = std::all_of(s.begin() + 1, s.end(), [&](double v) { return s[0] > v; });

    report.outcomes.push_back(correct);
    ++report.n_total;
    auto& bucket = report.per_distance[distance_bucket(ex.ante_distance)];
    auto& cls = report.per_class[ex.pronoun_class];
    ++bucket.n;
    ++cls.n;
    if (correct) {
      ++report.n_correct;
      ++bucket.correct;
      ++cls.correct;
    }
  }
  report.overall_accuracy =
      report.n_total == 0 ? 0.0 : static_cast<double>(report.n_correct) / static_cast<double>(report.n_total);
  return report;
}

// ---------------------------------------------------------------------------
// McNemar

McNemarResult mcnemar_from_counts(std::size_t b, std::size_t c) {
  McNemarResult r{b, c, 1.0, true};
  const std::size_t n = b + c;
  if (n == 0) return r;
  if (n <= kMcNemarExactLimit) {
    // Two-sided exact binomial at rate 1/2: twice the smaller tail.
    const std::size_t k = std::min(b, c);
    double pmf = std::ldexp(1.0, -static_cast<int>(n));
    double tail = 0.0;
    for (std::size_t i = 0; i <= k; ++i) {
      tail += pmf;
      pmf = pmf * static_cast<double>(n - i) / static_cast<double>(i + 1);
    }
    r.p_value = std::min(1.0, 2.0 * tail);
    return r;
  }
  r.exact = false;
  const double diff = std::abs(static_cast<double>(b) - static_cast<double>(c)) - 1.0;
  const double statistic = diff * diff / static_cast<double>(n);
  // Survival function of chi-squared with 1 dof.
  r.p_value = std::erfc(std::sqrt(statistic / 2.0));
  return r;
}

McNemarResult mcnemar_test(const std::vector<bool>& outcomes_a, const std::vector<bool>& outcomes_b) {
  if (outcomes_a.size() != outcomes_b.size()) {
    throw DataError("outcome lists differ in length (" + std::to_string(outcomes_a.size()) + " vs " +
                    std::to_string(outcomes_b.size()) + ")");
  }
  std::size_t b = 0;
  std::size_t c = 0;
  for (std::size_t i = 0; i < outcomes_a.size(); ++i) {
    if (outcomes_a[i] && !outcomes_b[i]) ++b;
    if (!outcomes_a[i] && outcomes_b[i]) ++c;
  }
  return mcnemar_from_counts(b, c);
}

// ---------------------------------------------------------------------------
// Context shuffle

std::uint64_t SeededRng::below(std::uint64_t bound) {
  if (bound == 0) throw InvalidArgument("empty range");
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

std::vector<std::size_t> seeded_derangement(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("a derangement needs at least two elements");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  SeededRng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

std::vector<ContrastiveExample> shuffle_context(std::span<const ContrastiveExample> examples, std::uint64_t seed) {
  if (examples.size() < 2) throw DataError("context shuffling needs at least two examples");
  const auto perm = seeded_derangement(examples.size(), seed);
  std::vector<ContrastiveExample> out(examples.begin(), examples.end());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    out[i].src_context = examples[perm[i]].src_context;
    out[i].tgt_context = examples[perm[i]].tgt_context;
  }
  return out;
}

// ---------------------------------------------------------------------------
// BLEU

BleuStats corpus_bleu_stats(const std::vector<std::vector<std::string>>& hypotheses,
                            const std::vector<std::vector<std::string>>& references) {
  constexpr std::size_t kMaxOrder = 4;
  if (hypotheses.size() != references.size()) {
    throw DataError("hypothesis and reference counts differ (" + std::to_string(hypotheses.size()) + " vs " +
                    std::to_string(references.size()) + ")");
  }
  if (hypotheses.empty()) throw DataError("cannot score an empty corpus");

  BleuStats st;
  st.matches.assign(kMaxOrder, 0);
  st.totals.assign(kMaxOrder, 0);
  std::map<std::vector<std::string>, std::size_t> ref_counts;
  std::map<std::vector<std::string>, std::size_t> hyp_counts;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto& hyp = hypotheses[s];
    const auto& ref = references[s];
    st.hypothesis_length += hyp.size();
    st.reference_length += ref.size();
    for (std::size_t order = 1; order <= kMaxOrder; ++order) {
      ref_counts.clear();
      hyp_counts.clear();
      for (std::size_t i = 0; i + order <= ref.size(); ++i) ++ref_counts[{ref.begin() + i, ref.begin() + i + order}];
      for (std::size_t i = 0; i + order <= hyp.size(); ++i) ++hyp_counts[{hyp.begin() + i, hyp.begin() + i + order}];
      for (const auto& [gram, count] : hyp_counts) {
        const auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) st.matches[order - 1] += std::min(count, it->second);
        st.totals[order - 1] += count;
      }
    }
  }

  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t o = 0; o < kMaxOrder; ++o) {
    const double p = st.totals[o] == 0 ? 0.0 : static_cast<double>(st.matches[o]) / static_cast<double>(st.totals[o]);
    st.precisions.push_back(p);
    if (p == 0.0) {
      zero = true;
    } else {
      log_sum += std::log(p);
    }
  }
  const double h = static_cast<double>(st.hypothesis_length);
  const double r = static_cast<double>(st.reference_length);
  st.brevity_penalty = h == 0.0 ? 0.0 : (h < r ? std::exp(1.0 - r / h) : 1.0);
  st.score = zero ? 0.0 : 100.0 * st.brevity_penalty * std::exp(log_sum / static_cast<double>(kMaxOrder));
  return st;
}

std::vector<std::string> bleu_tokenize(const std::string& line, BleuTokenizer tokenizer) {
  std::string text = line;
  if (tokenizer == BleuTokenizer::Mteval13a) {
    auto replace_all = [](std::string& s, std::string_view from, std::string_view to) {
      for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
        s.replace(pos, from.size(), to);
      }
    };
    replace_all(text, "<skipped>", "");
    replace_all(text, "-\n", "");
    replace_all(text, "\n", " ");
    if (text.find('&') != std::string::npos) {
      replace_all(text, "&quot;", "\"");
      replace_all(text, "&amp;", "&");
      replace_all(text, "&lt;", "<");
      replace_all(text, "&gt;", ">");
    }
    auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
    auto is_symbol = [](char c) {
      const auto u = static_cast<unsigned char>(c);
      return (u >= 0x7B && u <= 0x7E) || (u >= 0x5B && u <= 0x60) || (u >= 0x20 && u <= 0x26) ||
             (u >= 0x28 && u <= 0x2B) || (u >= 0x3A && u <= 0x40) || u == 0x2F;
    };

    std::string a = " ";
    for (char c : text) {
      if (is_symbol(c)) {
        a += ' ';
        a += c;
        a += ' ';
      } else {
        a += c;
      }
    }
    a += ' ';
    // ([^0-9])([.,]) -> "\1 \2 "
    std::string b;
    for (std::size_t i = 0; i < a.size();) {
      if (i + 1 < a.size() && !is_digit(a[i]) && (a[i + 1] == '.' || a[i + 1] == ',')) {
        b += a[i];
        b += ' ';
        b += a[i + 1];
        b += ' ';
        i += 2;
      } else {
        b += a[i++];
      }
    }
    // ([.,])([^0-9]) -> " \1 \2"
    std::string c;
    for (std::size_t i = 0; i < b.size();) {
      if (i + 1 < b.size() && (b[i] == '.' || b[i] == ',') && !is_digit(b[i + 1])) {
        c += ' ';
        c += b[i];
        c += ' ';
        c += b[i + 1];
        i += 2;
      } else {
        c += b[i++];
      }
    }
    // ([0-9])(-) -> "\1 \2 "
    text.clear();
    for (std::size_t i = 0; i < c.size();) {
      if (i + 1 < c.size() && is_digit(c[i]) && c[i + 1] == '-') {
        text += c[i];
        text += " - ";
        i += 2;
      } else {
        text += c[i++];
      }
    }
  }
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

double corpus_bleu(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
                   BleuTokenizer tokenizer) {
  std::vector<std::vector<std::string>> hyp, ref;
  hyp.reserve(hypotheses.size());
  ref.reserve(references.size());
  for (const auto& h : hypotheses) hyp.push_back(bleu_tokenize(h, tokenizer));
  for (const auto& r : references) ref.push_back(bleu_tokenize(r, tokenizer));
  return corpus_bleu_stats(hyp, ref).score;
}

std::string format_bleu(const BleuStats& st) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "BLEU = %.2f, %.1f/%.1f/%.1f/%.1f (BP=%.3f, ratio=%.3f, hyp_len=%zu, ref_len=%zu)",
                st.score, 100.0 * st.precisions[0], 100.0 * st.precisions[1], 100.0 * st.precisions[2],
                100.0 * st.precisions[3], st.brevity_penalty,
                st.reference_length == 0 ? 0.0
                                         : static_cast<double>(st.hypothesis_length) /
                                               static_cast<double>(st.reference_length),
                st.hypothesis_length, st.reference_length);
  return buf;
}

}  // namespace docsplit
