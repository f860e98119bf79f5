#include "docsplit/aligner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "docsplit/error.hpp"
#include "parallel.hpp"

namespace docsplit {

void AlignerConfig::validate() const {
  if (iterations < 1) throw InvalidArgument("aligner iterations must be at least 1");
  if (!(diagonal_tension >= 0.0) || !std::isfinite(diagonal_tension)) {
    throw InvalidArgument("diagonal tension must be a finite non-negative number");
  }
}

namespace {

// Prior over source positions 0..src_len (0 = NULL) for target position k.
void fill_prior(std::size_t src_len, std::size_t k, std::size_t tgt_len, const AlignerConfig& config,
                std::vector<double>& prior) {
  prior.assign(src_len + 1, 0.0);
  const double null_mass = config.include_null ? 1.0 / static_cast<double>(src_len + 1) : 0.0;
  prior[0] = null_mass;
  if (!config.use_diagonal_prior) {
    const double each = config.include_null ? null_mass : 1.0 / static_cast<double>(src_len);
    std::fill(prior.begin() + 1, prior.end(), each);
    return;
  }
  const double tk = static_cast<double>(k) / static_cast<double>(tgt_len);
  double z = 0.0;
  for (std::size_t j = 1; j <= src_len; ++j) {
    const double sj = static_cast<double>(j) / static_cast<double>(src_len);
    prior[j] = std::exp(-config.diagonal_tension * std::abs(sj - tk));
    z += prior[j];
  }
  const double scale = (1.0 - null_mass) / z;
  for (std::size_t j = 1; j <= src_len; ++j) prior[j] *= scale;
}

template <typename Map>
std::optional<TranslationTable::TypeId> find_id(const Map& vocab, std::string_view token) {
  const auto it = vocab.find(token);
  if (it == vocab.end()) return std::nullopt;
  return it->second;
}

}  // namespace

std::optional<TranslationTable::TypeId> TranslationTable::source_id(std::string_view token) const {
  return find_id(source_vocab_, token);
}

std::optional<TranslationTable::TypeId> TranslationTable::target_id(std::string_view token) const {
  return find_id(target_vocab_, token);
}

std::optional<std::size_t> TranslationTable::slot(TypeId source, TypeId target) const {
  if (source + 1 >= offsets_.size()) return std::nullopt;
  const auto begin = targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[source]);
  const auto end = targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[source + 1]);
  const auto it = std::lower_bound(begin, end, target);
  if (it == end || *it != target) return std::nullopt;
  return static_cast<std::size_t>(it - targets_.begin());
}

double TranslationTable::prob(TypeId source, TypeId target) const {
  const auto s = slot(source, target);
  return s ? probs_[*s] : kOovFloor;
}

double TranslationTable::prob(std::string_view source, std::string_view target) const {
  const auto s = source_id(source);
  const auto t = target_id(target);
  if (!s || !t) return kOovFloor;
  return prob(*s, *t);
}

double TranslationTable::null_prob(std::string_view target) const {
  const auto t = target_id(target);
  if (!has_null_ || !t) return kOovFloor;
  return prob(kNull, *t);
}

double TranslationTable::row_sum(TypeId source) const {
  double sum = 0.0;
  for (std::size_t i = offsets_[source]; i < offsets_[source + 1]; ++i) sum += probs_[i];
  return sum;
}

// Holds the encoded corpus and the per-link parameter slots for EM.
class AlignerTrainer {
 public:
  AlignerTrainer(const Corpus& corpus, const AlignerConfig& config) : config_(config) {
    table_.has_null_ = config.include_null;
    encode(corpus);
    build_table();
    build_slots();
  }

  TranslationTable run() {
    std::vector<double> posteriors(slots_.size());
    std::vector<double> counts(table_.probs_.size());
    std::vector<double> pair_ll(sentences_.size());
    for (int it = 0; it <= config_.iterations; ++it) {
      expectation(posteriors, pair_ll);
      // Sequential reductions in corpus order keep results independent of
      // the thread count.
      table_.log_likelihood_.push_back(std::accumulate(pair_ll.begin(), pair_ll.end(), 0.0));
      if (it == config_.iterations) break;
      std::fill(counts.begin(), counts.end(), 0.0);
      for (std::size_t i = 0; i < slots_.size(); ++i) counts[slots_[i]] += posteriors[i];
      maximization(counts);
    }
    return std::move(table_);
  }

 private:
  struct Encoded {
    std::vector<TranslationTable::TypeId> source;
    std::vector<TranslationTable::TypeId> target;
    std::size_t slot_offset = 0;
  };

  void encode(const Corpus& corpus) {
    auto intern = [](TranslationTable::Vocabulary& vocab, const std::string& token,
                     TranslationTable::TypeId first) {
      const auto next = static_cast<TranslationTable::TypeId>(vocab.size() + first);
      return vocab.try_emplace(token, next).first->second;
    };
    for (const auto& doc : corpus.documents) {
      for (const auto& pair : doc.pairs) {
        Encoded enc;
        enc.source.reserve(pair.source.size());
        enc.target.reserve(pair.target.size());
        // Source ids start at 1; 0 is the NULL word.
        for (const auto& tok : pair.source.tokens) enc.source.push_back(intern(table_.source_vocab_, tok, 1));
        for (const auto& tok : pair.target.tokens) enc.target.push_back(intern(table_.target_vocab_, tok, 0));
        sentences_.push_back(std::move(enc));
      }
    }
  }

  void build_table() {
    std::vector<std::uint64_t> cooc;
    for (const auto& s : sentences_) {
      for (auto t : s.target) {
        if (config_.include_null) cooc.push_back(std::uint64_t{t});
        for (auto w : s.source) cooc.push_back((std::uint64_t{w} << 32) | t);
      }
    }
    std::sort(cooc.begin(), cooc.end());
    cooc.erase(std::unique(cooc.begin(), cooc.end()), cooc.end());

    const std::size_t rows = table_.source_vocab_.size() + 1;
    table_.offsets_.assign(rows + 1, 0);
    table_.targets_.reserve(cooc.size());
    for (auto key : cooc) {
      ++table_.offsets_[(key >> 32) + 1];
      table_.targets_.push_back(static_cast<TranslationTable::TypeId>(key & 0xffffffffu));
    }
    std::partial_sum(table_.offsets_.begin(), table_.offsets_.end(), table_.offsets_.begin());
    table_.probs_.resize(table_.targets_.size());
    for (std::size_t s = 0; s < rows; ++s) {
      const std::size_t n = table_.offsets_[s + 1] - table_.offsets_[s];
      for (std::size_t i = table_.offsets_[s]; i < table_.offsets_[s + 1]; ++i) {
        table_.probs_[i] = 1.0 / static_cast<double>(n);
      }
    }
  }

  // slots_ lists, for every sentence, target-major then source position
  // 0..|S|, the table index of t(target_k | source_j).
  void build_slots() {
    std::size_t total = 0;
    for (auto& s : sentences_) {
      s.slot_offset = total;
      total += s.target.size() * (s.source.size() + 1);
    }
    slots_.resize(total);
    detail::parallel_for(sentences_.size(), config_.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const auto& s = sentences_[i];
        std::size_t pos = s.slot_offset;
        for (auto t : s.target) {
          const auto null_slot = table_.slot(TranslationTable::kNull, t);
          slots_[pos++] = null_slot.value_or(0);
          for (auto w : s.source) slots_[pos++] = *table_.slot(w, t);
        }
      }
    });
  }

  void expectation(std::vector<double>& posteriors, std::vector<double>& pair_ll) const {
    detail::parallel_for(sentences_.size(), config_.threads, [&](std::size_t begin, std::size_t end) {
      std::vector<double> prior;
      for (std::size_t i = begin; i < end; ++i) {
        const auto& s = sentences_[i];
        const std::size_t width = s.source.size() + 1;
        double ll = 0.0;
        for (std::size_t k = 0; k < s.target.size(); ++k) {
          fill_prior(s.source.size(), k + 1, s.target.size(), config_, prior);
          const std::size_t base = s.slot_offset + k * width;
          double denom = 0.0;
          for (std::size_t j = 0; j < width; ++j) {
            const double q = prior[j] > 0.0 ? prior[j] * table_.probs_[slots_[base + j]] : 0.0;
            posteriors[base + j] = q;
            denom += q;
          }
          ll += std::log(denom);
          for (std::size_t j = 0; j < width; ++j) posteriors[base + j] /= denom;
        }
        pair_ll[i] = ll;
      }
    });
  }

  void maximization(const std::vector<double>& counts) {
    const std::size_t rows = table_.offsets_.size() - 1;
    for (std::size_t s = 0; s < rows; ++s) {
      double total = 0.0;
      for (std::size_t i = table_.offsets_[s]; i < table_.offsets_[s + 1]; ++i) total += counts[i];
      if (total <= 0.0) continue;
      for (std::size_t i = table_.offsets_[s]; i < table_.offsets_[s + 1]; ++i) table_.probs_[i] = counts[i] / total;
    }
  }

  const AlignerConfig& config_;
  TranslationTable table_;
  std::vector<Encoded> sentences_;
  std::vector<std::size_t> slots_;
};

TranslationTable train(const Corpus& corpus, const AlignerConfig& config) {
  config.validate();
  if (corpus.pair_count() == 0) throw InvalidArgument("cannot train an aligner on an empty corpus");
  return AlignerTrainer(corpus, config).run();
}

Alignment viterbi_align(const SentencePair& pair, const TranslationTable& table, const AlignerConfig& config) {
  const std::size_t src_len = pair.source.size();
  const std::size_t tgt_len = pair.target.size();
  std::vector<std::optional<TranslationTable::TypeId>> src_ids(src_len);
  for (std::size_t j = 0; j < src_len; ++j) src_ids[j] = table.source_id(pair.source.tokens[j]);

  Alignment links;
  std::vector<double> prior;
  for (std::size_t k = 1; k <= tgt_len; ++k) {
    const auto t = table.target_id(pair.target.tokens[k - 1]);
    if (!t && config.include_null) continue;

    fill_prior(src_len, k, tgt_len, config, prior);
    std::size_t best = 0;
    double best_score = -1.0;
    if (config.include_null) {
      best_score = prior[0] * (t ? table.prob(TranslationTable::kNull, *t) : kOovFloor);
    }
    for (std::size_t j = 1; j <= src_len; ++j) {
      const auto& s = src_ids[j - 1];
      const double p = (s && t) ? table.prob(*s, *t) : kOovFloor;
      const double score = prior[j] * p;
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    if (best != 0) links.push_back(Link{static_cast<std::uint32_t>(best), static_cast<std::uint32_t>(k)});
  }
  normalize(links);
  return links;
}

Corpus align_corpus(Corpus corpus, const AlignerConfig& config) {
  const TranslationTable table = train(corpus, config);
  std::vector<SentencePair*> pairs;
  for (auto& doc : corpus.documents) {
    for (auto& pair : doc.pairs) pairs.push_back(&pair);
  }
  detail::parallel_for(pairs.size(), config.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) pairs[i]->alignment = viterbi_align(*pairs[i], table, config);
  });
  return corpus;
}

}  // namespace docsplit
