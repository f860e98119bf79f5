#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "docsplit/error.hpp"
#include "docsplit/signal_stats.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace docsplit {
namespace {

const std::string kData = DOCSPLIT_TEST_DATA;

Mention at(std::size_t sentence, std::size_t start, std::size_t end, bool pronoun = false) {
  return Mention{sentence, start, end, pronoun, false};
}

DependencyTree tree_of(std::vector<std::pair<std::size_t, std::string>> heads) {
  DependencyTree t;
  for (std::size_t i = 0; i < heads.size(); ++i) t.arcs.push_back(DependencyArc{i + 1, heads[i].first, heads[i].second});
  return t;
}

TEST(DependencyTree, Validation) {
  EXPECT_NO_THROW(tree_of({{2, "nsubj"}, {0, "root"}}).validate());
  EXPECT_EQ(tree_of({{2, "nsubj"}, {0, "root"}}).root(), 2u);
  EXPECT_THROW(tree_of({{0, "root"}, {0, "root"}}).validate(), DataError);
  EXPECT_THROW(tree_of({{2, "a"}, {1, "b"}}).validate(), DataError);
  EXPECT_THROW(tree_of({{0, "root"}, {2, "b"}}).validate(), DataError);
  EXPECT_THROW(tree_of({{0, "root"}, {3, "b"}}).validate(), DataError);
  EXPECT_THROW(tree_of({{0, "root"}, {3, "b"}, {2, "c"}}).validate(), DataError);
  DependencyTree misnumbered{{{2, 0, "root"}}};
  EXPECT_THROW(misnumbered.validate(), DataError);
}

TEST(ReadConllu, Fixture) {
  std::ifstream in(kData + "/fixture20.conllu");
  const auto docs = read_conllu(in);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].id, "ted-a");
  EXPECT_EQ(docs[1].id, "ted-b");
  ASSERT_EQ(docs[0].trees.size(), 10u);
  EXPECT_EQ(docs[0].sentence_lengths()[0], 12u);
  EXPECT_EQ(docs[0].forms[0][1], "grandmother");
  EXPECT_TRUE(docs[0].pronoun[0][0]);
  EXPECT_FALSE(docs[0].pronoun[0][1]);
  EXPECT_EQ(docs[0].trees[0].root(), 3u);
  EXPECT_EQ(docs[0].trees[0].arcs[0].relation, "nmod:poss");
}

TEST(ReadConllu, SkipsMultiwordAndEmptyNodes) {
  std::istringstream in(
      "# text = He's here\n"
      "1-2\tHe's\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\tHe\the\tPRON\t_\t_\t3\tnsubj\t_\t_\n"
      "2\t's\tbe\tAUX\t_\t_\t3\tcop\t_\t_\n"
      "2.1\tx\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "3\there\there\tADV\t_\t_\t0\troot\t_\t_\n\n"
      "1\tYes\tyes\tINTJ\t_\t_\t0\troot\t_\t_\n");
  const auto docs = read_conllu(in);
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0].id, "1");
  EXPECT_EQ(docs[0].sentence_lengths(), (std::vector<std::size_t>{3, 1}));
}

TEST(ReadConllu, Errors) {
  std::istringstream columns("1\tHe\the\tPRON\t_\t_\t0\n");
  EXPECT_THROW(read_conllu(columns), DataError);
  std::istringstream head("1\tHe\the\tPRON\t_\t_\tx\troot\t_\t_\n");
  EXPECT_THROW(read_conllu(head), DataError);
  std::istringstream roots("1\ta\t_\tX\t_\t_\t0\troot\t_\t_\n2\tb\t_\tX\t_\t_\t0\troot\t_\t_\n");
  try {
    read_conllu(roots, "t.conllu");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.file(), "t.conllu");
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(PartitionDocuments, RegroupsSentences) {
  std::ifstream in(kData + "/fixture20.conllu");
  const std::vector<std::size_t> sizes{5, 15};
  const auto docs = partition_documents(read_conllu(in), sizes);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].trees.size(), 5u);
  EXPECT_EQ(docs[1].id, "2");
  EXPECT_EQ(docs[1].forms[5][0], "Last");
  const std::vector<std::size_t> wrong{5, 5};
  std::ifstream again(kData + "/fixture20.conllu");
  EXPECT_THROW(partition_documents(read_conllu(again), wrong), DataError);
}

TEST(PartitionDocuments, MatchingBoundariesKeepIds) {
  std::ifstream in(kData + "/fixture20.conllu");
  const std::vector<std::size_t> sizes{10, 10};
  const auto docs = partition_documents(read_conllu(in), sizes);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].id, "ted-a");
  EXPECT_EQ(docs[1].id, "ted-b");
}

TEST(ReadCoref, FixtureAndNumericIds) {
  std::ifstream in(kData + "/fixture20.coref.jsonl");
  const auto chains = read_coref_jsonl(in);
  ASSERT_EQ(chains.size(), 11u);
  EXPECT_EQ(chains[0].document, "ted-a");
  EXPECT_EQ(chains[0].mentions[1], at(2, 1, 1, true));

  std::istringstream numeric(R"({"doc": 3, "mentions": [{"sent": 1, "start": 1, "end": 1}]})");
  const auto n = read_coref_jsonl(numeric);
  EXPECT_EQ(n[0].document, "3");
  EXPECT_FALSE(n[0].mentions[0].is_pronoun);
}

TEST(ReadCoref, Errors) {
  std::istringstream bad("\n{\"doc\": \"a\", \"mentions\": [{\"sent\": 1}]}\n");
  try {
    read_coref_jsonl(bad, "c.jsonl");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream junk("{not json\n");
  EXPECT_THROW(read_coref_jsonl(junk), DataError);
  std::istringstream negative(R"({"doc": "a", "mentions": [{"sent": -1, "start": 1, "end": 1}]})");
  EXPECT_THROW(read_coref_jsonl(negative), DataError);
}

std::vector<UnitDocument> one_doc(std::size_t sentences, std::size_t length = 10) {
  return {UnitDocument{"d", std::vector<std::size_t>(sentences, length)}};
}

TEST(Histogram, SameSentenceIsDistanceZero) {
  const std::vector<CorefChain> chains{{"d", {at(1, 1, 1), at(1, 4, 5, true)}}};
  const auto h = antecedent_histogram(one_doc(3), chains, 3);
  EXPECT_EQ(h.counts_all, (std::vector<std::size_t>{1, 0, 0, 0}));
  EXPECT_EQ(h.counts_pronoun, (std::vector<std::size_t>{1, 0, 0, 0}));
}

TEST(Histogram, IndexSubtraction) {
  const std::vector<CorefChain> chains{{"d", {at(2, 1, 1), at(5, 1, 1)}}};
  const auto h = antecedent_histogram(one_doc(6), chains, 3);
  EXPECT_EQ(h.counts_all, (std::vector<std::size_t>{0, 0, 0, 1}));
  EXPECT_EQ(h.dropped_all, 0u);
}

TEST(Histogram, NearestPrecedingMention) {
  const std::vector<CorefChain> chains{{"d", {at(1, 1, 1), at(2, 1, 1), at(4, 1, 1)}}};
  const auto h = antecedent_histogram(one_doc(4), chains, 3);
  EXPECT_EQ(h.counts_all, (std::vector<std::size_t>{0, 1, 1, 0}));
}

TEST(Histogram, DropsBeyondDmaxAndNormalizes) {
  const std::vector<CorefChain> chains{{"d", {at(1, 1, 1), at(6, 1, 1, true), at(6, 2, 2, true)}}};
  const auto h = antecedent_histogram(one_doc(6, 8), chains, 2);
  EXPECT_EQ(h.dropped_all, 1u);
  EXPECT_EQ(h.dropped_pronoun, 1u);
  EXPECT_EQ(h.counts_all[0], 1u);
  EXPECT_DOUBLE_EQ(h.mean_unit_length, 8.0);
  EXPECT_DOUBLE_EQ(h.normalized_all[0], 1.0 / 8.0);
  EXPECT_DOUBLE_EQ(h.normalized_pronoun[0], 1.0 / 8.0);
  EXPECT_DOUBLE_EQ(h.normalized_all[1], 0.0);
}

TEST(Histogram, Errors) {
  const auto docs = one_doc(3, 4);
  auto check = [&](std::vector<CorefChain> chains) { EXPECT_THROW(antecedent_histogram(docs, chains, 3), DataError); };
  check({{"nope", {at(1, 1, 1), at(2, 1, 1)}}});
  check({{"d", {at(1, 1, 1)}}});
  check({{"d", {at(1, 1, 1), at(4, 1, 1)}}});
  check({{"d", {at(1, 1, 1), at(2, 1, 5)}}});
  check({{"d", {at(1, 3, 2), at(2, 1, 1)}}});
  check({{"d", {at(2, 1, 1), at(1, 1, 1)}}});
  std::vector<UnitDocument> dup{docs[0], docs[0]};
  EXPECT_THROW(antecedent_histogram(dup, std::vector<CorefChain>{}, 3), DataError);
}

struct RandomDocs {
  std::vector<UnitDocument> docs;
  std::vector<CorefChain> chains;
};

RandomDocs random_docs(std::mt19937_64& rng) {
  RandomDocs r;
  for (std::size_t d = 0, nd = 1 + rng() % 3; d < nd; ++d) {
    UnitDocument doc{"doc" + std::to_string(d), {}};
    for (std::size_t s = 0, ns = 1 + rng() % 12; s < ns; ++s) doc.unit_lengths.push_back(1 + rng() % 20);
    for (std::size_t c = 0, nc = rng() % 5; c < nc; ++c) {
      std::vector<std::pair<std::size_t, std::size_t>> positions;
      for (std::size_t m = 0, nm = 2 + rng() % 6; m < nm; ++m) {
        const std::size_t s = 1 + rng() % doc.unit_lengths.size();
        positions.emplace_back(s, 1 + rng() % doc.unit_lengths[s - 1]);
      }
      std::sort(positions.begin(), positions.end());
      CorefChain chain{doc.id, {}};
      for (auto [s, t] : positions) {
        const std::size_t end = t + rng() % (doc.unit_lengths[s - 1] - t + 1);
        chain.mentions.push_back(at(s, t, end, rng() % 2 == 0));
      }
      r.chains.push_back(std::move(chain));
    }
    r.docs.push_back(std::move(doc));
  }
  return r;
}

TEST(Histogram, MatchesPairwiseOracle) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 500; ++trial) {
    const auto r = random_docs(rng);
    const std::size_t d_max = rng() % 6;
    const auto h = antecedent_histogram(r.docs, r.chains, d_max);
    const auto ref = oracle::pairwise_nearest(r.docs, r.chains);
    std::size_t counted = h.dropped_all;
    for (std::size_t d = 0; d <= d_max; ++d) {
      const auto all = ref.all.count(d) ? ref.all.at(d) : 0;
      const auto pron = ref.pronoun.count(d) ? ref.pronoun.at(d) : 0;
      ASSERT_EQ(h.counts_all[d], all);
      ASSERT_EQ(h.counts_pronoun[d], pron);
      ASSERT_LE(h.counts_pronoun[d], h.counts_all[d]);
      ASSERT_NEAR(h.normalized_all[d], static_cast<double>(all) / ((d + 1) * ref.mean_unit_length), 1e-9);
      counted += h.counts_all[d];
    }
    ASSERT_EQ(counted, ref.mentions_after_first);
    ASSERT_DOUBLE_EQ(h.mean_unit_length, ref.mean_unit_length);
  }
}

TEST(HistogramTsv, Layout) {
  const std::vector<CorefChain> chains{{"d", {at(1, 1, 1), at(1, 2, 2, true), at(4, 1, 1)}}};
  const auto h = antecedent_histogram(one_doc(4, 10), chains, 1);
  std::ostringstream out;
  write_histogram_tsv(h, out, "original");
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "data\tdistance\ttokens\tall\tpronouns\tnormalized_all\tnormalized_pronouns");
  EXPECT_NE(text.find("original\t0\t10.00\t1\t1\t"), std::string::npos);
  EXPECT_NE(text.find("original\t1\t20.00\t0\t0\t"), std::string::npos);
  EXPECT_NE(text.find("original\t>1\t"), std::string::npos);
}

TEST(PositionMap, Examples) {
  const PositionMap map({10}, {5});
  EXPECT_EQ(map.to_unit(1, 3), (UnitPosition{1, 3}));
  EXPECT_EQ(map.to_unit(1, 7), (UnitPosition{2, 2}));
  EXPECT_EQ(map.unit_lengths(), (std::vector<std::size_t>{5, 5}));
  EXPECT_EQ(map.to_sentence(2, 2), (std::pair<std::size_t, std::size_t>{1, 7}));
  EXPECT_THROW(map.to_unit(1, 11), DataError);
  EXPECT_THROW(map.to_sentence(3, 1), DataError);
}

TEST(PositionMap, InconsistentSplits) {
  EXPECT_THROW(PositionMap({4}, {4}), DataError);
  EXPECT_THROW(PositionMap({4}, {0}), DataError);
  EXPECT_THROW(PositionMap({4, 5}, {2}), DataError);
}

TEST(PositionMap, EnumerationOracleAndInverse) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::size_t> lengths;
    std::vector<std::optional<std::size_t>> splits;
    for (std::size_t s = 0, n = 1 + rng() % 6; s < n; ++s) {
      lengths.push_back(1 + rng() % 9);
      if (lengths.back() >= 2 && rng() % 3 != 0) {
        splits.emplace_back(1 + rng() % (lengths.back() - 1));
      } else {
        splits.emplace_back();
      }
    }
    const PositionMap map(lengths, splits);
    const auto ref = oracle::enumerate_positions(lengths, splits);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& [key, pos] : ref) {
      const auto got = map.to_unit(key.first, key.second);
      ASSERT_EQ(got, pos);
      ASSERT_TRUE(seen.emplace(got.unit, got.token).second);
      ASSERT_EQ(map.to_sentence(got.unit, got.token), key);
    }
    ASSERT_EQ(std::accumulate(map.unit_lengths().begin(), map.unit_lengths().end(), std::size_t{0}),
              std::accumulate(lengths.begin(), lengths.end(), std::size_t{0}));
  }
}

TEST(RemapAnnotations, TruncatesCrossingMention) {
  const std::vector<std::size_t> lengths{10};
  const std::vector<std::optional<std::size_t>> splits{5};
  const std::vector<CorefChain> chains{{"d", {at(1, 5, 6), at(1, 8, 9, true)}}};
  const auto r = remap_annotations(lengths, splits, chains, {});
  EXPECT_EQ(r.truncated_mentions, 1u);
  EXPECT_EQ(r.chains[0].mentions[0], (Mention{1, 5, 5, false, true}));
  EXPECT_EQ(r.chains[0].mentions[1], (Mention{2, 3, 4, true, false}));
}

TEST(RemapAnnotations, AllSpansAgainstEnumeration) {
  for (std::size_t len = 2; len <= 7; ++len) {
    for (std::size_t m = 1; m < len; ++m) {
      const std::vector<std::size_t> lengths{3, len};
      const std::vector<std::optional<std::size_t>> splits{std::nullopt, m};
      const auto ref = oracle::enumerate_positions(lengths, splits);
      for (std::size_t a = 1; a <= len; ++a) {
        for (std::size_t b = a; b <= len; ++b) {
          const std::vector<CorefChain> chains{{"d", {at(2, a, b)}}};
          const auto r = remap_annotations(lengths, splits, chains, {});
          const Mention got = r.chains[0].mentions[0];
          const UnitPosition first = ref.at({2, a});
          const UnitPosition last = ref.at({2, b});
          const bool crosses = first.unit != last.unit;
          ASSERT_EQ(got.sentence, first.unit);
          ASSERT_EQ(got.start, first.token);
          ASSERT_EQ(got.end, crosses ? m : last.token);
          ASSERT_EQ(got.truncated, crosses);
          ASSERT_EQ(r.truncated_mentions, crosses ? 1u : 0u);
        }
      }
    }
  }
}

TEST(RemapAnnotations, TreePositions) {
  const std::vector<std::size_t> lengths{4, 2};
  const std::vector<std::optional<std::size_t>> splits{2, std::nullopt};
  const std::vector<DependencyTree> trees{tree_of({{2, "a"}, {0, "root"}, {2, "b"}, {3, "c"}}), {}};
  const auto r = remap_annotations(lengths, splits, {}, trees);
  ASSERT_EQ(r.tree_positions.size(), 2u);
  EXPECT_EQ(r.tree_positions[0],
            (std::vector<UnitPosition>{{1, 1}, {1, 2}, {2, 1}, {2, 2}}));
  EXPECT_TRUE(r.tree_positions[1].empty());
  const std::vector<DependencyTree> short_tree{tree_of({{0, "root"}}), {}};
  EXPECT_THROW(remap_annotations(lengths, splits, {}, short_tree), DataError);
}

TEST(BrokenDependencies, Examples) {
  RelationGroups groups;
  groups.groups = {{"subj_obj", {"nsubj", "obj"}}};
  groups.punctuation = {"punct"};
  // root at 2, subject at 8, split after 5
  std::vector<std::pair<std::size_t, std::string>> heads(10, {2, "dep"});
  heads[1] = {0, "root"};
  heads[7] = {2, "nsubj"};
  for (std::size_t i = 2; i < 7; ++i) heads[i] = {2, "advmod"};
  heads[8] = {8, "det"};
  heads[9] = {8, "punct"};
  const std::vector<DependencyTree> trees{tree_of(heads)};
  const std::vector<std::size_t> lengths{10};
  const std::vector<std::optional<std::size_t>> split{5};
  auto stats = broken_dependency_stats(lengths, trees, split, groups);
  ASSERT_EQ(stats.size(), 2u);
  EXPECT_EQ(stats[0], (GroupStat{"subj_obj", 1, 1, 100.0}));
  EXPECT_EQ(stats[1].group, "any");
  EXPECT_EQ(stats[1].sentences, 1u);

  const std::vector<std::optional<std::size_t>> late{9};
  stats = broken_dependency_stats(lengths, trees, late, groups);
  EXPECT_EQ(stats[0].sentences, 0u);
  EXPECT_EQ(stats[1].sentences, 0u);
}

TEST(BrokenDependencies, SubtypesAndPunctuation) {
  const auto groups = RelationGroups::universal_dependencies();
  const std::vector<DependencyTree> trees{tree_of({{0, "root"}, {1, "punct"}}),
                                          tree_of({{0, "root"}, {1, "nsubj:pass"}})};
  const std::vector<std::size_t> lengths{2, 2};
  const std::vector<std::optional<std::size_t>> splits{1, 1};
  const auto stats = broken_dependency_stats(lengths, trees, splits, groups);
  ASSERT_EQ(stats.size(), 4u);
  EXPECT_EQ(stats[0].group, "subj_obj");
  EXPECT_EQ(stats[0].sentences, 1u);
  EXPECT_EQ(stats[3].group, "any");
  EXPECT_EQ(stats[3].sentences, 1u);
  EXPECT_DOUBLE_EQ(stats[3].percentage, 50.0);
}

TEST(BrokenDependencies, Errors) {
  const auto groups = RelationGroups::universal_dependencies();
  const std::vector<std::size_t> lengths{2};
  const std::vector<DependencyTree> missing{DependencyTree{}};
  const std::vector<std::optional<std::size_t>> split{1};
  EXPECT_THROW(broken_dependency_stats(lengths, missing, split, groups), DataError);
  const std::vector<std::optional<std::size_t>> unsplit{std::nullopt};
  EXPECT_NO_THROW(broken_dependency_stats(lengths, missing, unsplit, groups));
  const std::vector<DependencyTree> wrong{tree_of({{0, "root"}, {1, "a"}, {1, "b"}})};
  EXPECT_THROW(broken_dependency_stats(lengths, wrong, split, groups), DataError);
}

DependencyTree random_tree(std::mt19937_64& rng, std::size_t n) {
  static const std::vector<std::string> labels{"nsubj", "obj:lvc", "iobj", "ccomp", "obl:tmod", "xcomp", "advmod",
                                               "amod",  "nmod",    "acl",  "punct", "conj",     "det",   "cc"};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 1);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::pair<std::size_t, std::string>> heads(n);
  heads[order[0] - 1] = {0, "root"};
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t parent = rng() % 2 ? order[0] : order[rng() % i];
    heads[order[i] - 1] = {parent, labels[rng() % labels.size()]};
  }
  return tree_of(heads);
}

TEST(BrokenDependencies, MatchesRecountOracle) {
  std::mt19937_64 rng(12);
  const auto groups = RelationGroups::universal_dependencies();
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::size_t> lengths;
    std::vector<DependencyTree> trees;
    std::vector<std::optional<std::size_t>> splits;
    for (std::size_t s = 0, n = 1 + rng() % 10; s < n; ++s) {
      const std::size_t len = 1 + rng() % 15;
      lengths.push_back(len);
      trees.push_back(random_tree(rng, len));
      if (len >= 2 && rng() % 4 != 0) {
        splits.emplace_back(1 + rng() % (len - 1));
      } else {
        splits.emplace_back();
      }
    }
    const auto stats = broken_dependency_stats(lengths, trees, splits, groups);
    const auto ref = oracle::broken_counts(trees, splits, groups);
    ASSERT_EQ(stats.size(), ref.size());
    for (const auto& s : stats) {
      ASSERT_EQ(s.sentences, ref.at(s.group)) << s.group;
      ASSERT_EQ(s.total, lengths.size());
      ASSERT_LE(s.percentage, stats.back().percentage);
    }
  }
}

TEST(DependencyTsv, Layout) {
  std::ostringstream out;
  write_dependency_tsv({GroupStat{"subj_obj", 1, 3, 100.0 / 3.0}, GroupStat{"any", 2, 3, 200.0 / 3.0}}, out);
  EXPECT_EQ(out.str(), "group\tsentences\ttotal\tpercent\nsubj_obj\t1\t3\t33.33\nany\t2\t3\t66.67\n");
}

}  // namespace
}  // namespace docsplit
