#include "docsplit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "docsplit/aligner.hpp"
#include "docsplit/corpus.hpp"
#include "docsplit/error.hpp"
#include "docsplit/eval.hpp"
#include "docsplit/signal_stats.hpp"
#include "docsplit/splitter.hpp"
#include "docsplit/version.hpp"

namespace docsplit::cli {
namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  int verbosity = 0;
};

struct AlignerFlags {
  int iterations = 5;
  bool diagonal = false;
  double tension = 4.0;
  bool no_null = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--iterations", iterations, "EM iterations")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_flag("--diagonal", diagonal, "Use the diagonal positional prior");
    cmd->add_option("--tension", tension, "Diagonal prior tension")->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd->add_flag("--no-null", no_null, "Disable the NULL source word");
  }

  AlignerConfig config(const GlobalOptions& global) const {
    AlignerConfig c;
    c.iterations = iterations;
    c.use_diagonal_prior = diagonal;
    c.diagonal_tension = tension;
    c.include_null = !no_null;
    c.seed = global.seed;
    c.threads = global.threads;
    return c;
  }
};

std::vector<std::size_t> load_sizes(const std::string& path) {
  auto in = open_input(path);
  auto sizes = read_boundary_spec(in, path);
  if (sizes.empty()) throw DataError("boundary spec is empty", path);
  return sizes;
}

std::vector<std::string> read_lines(const std::string& path) {
  auto in = open_input(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// ---------------------------------------------------------------------------

struct SplitCommand {
  std::string src, tgt, docs, align, out_prefix, audit, method = "middle";
  std::size_t lmin = 7;
  std::size_t radius = 5;
  bool zero_resource = false;
  bool keep_original = false;
  AlignerFlags aligner;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("split", "Split sentence pairs into two segments");
    cmd->add_option("--src", src, "Tokenized source file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--tgt", tgt, "Tokenized target file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--docs", docs, "Boundary spec (pairs per document)")->check(CLI::ExistingFile);
    cmd->add_option("--method", method, "middle or aligned")
        ->check(CLI::IsMember({"middle", "aligned"}))
        ->capture_default_str();
    cmd->add_option("--lmin", lmin, "Minimum source length to split")->check(CLI::Range(2, 1 << 30))->capture_default_str();
    cmd->add_option("--radius", radius, "Aligned-split search radius")->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd->add_option("--align", align, "Pharaoh alignments; trained on the corpus when omitted")->check(CLI::ExistingFile);
    cmd->add_flag("--zero-resource", zero_resource, "Every input pair becomes its own document");
    cmd->add_flag("--keep-original", keep_original, "Append the unsplit corpus after the split one");
    cmd->add_option("--out-prefix", out_prefix, "Writes PREFIX.src, PREFIX.tgt, PREFIX.docs")->required();
    cmd->add_option("--audit", audit, "Audit TSV path (default PREFIX.audit.tsv)");
    aligner.add_to(cmd);
  }

  SplitConfig config() const {
    SplitConfig c;
    c.min_length = lmin;
    c.method = method == "aligned" ? SplitMethod::Aligned : SplitMethod::Middle;
    c.max_search_radius = radius;
    c.zero_resource = zero_resource;
    c.keep_original = keep_original;
    return c;
  }

  int run(const GlobalOptions& global, std::ostream& log) const {
    const SplitConfig cfg = config();
    const std::vector<std::size_t> sizes = docs.empty() ? std::vector<std::size_t>{} : load_sizes(docs);
    ParallelReader::Names names{src, tgt, docs, align};

    auto out_src = open_output(out_prefix + ".src");
    auto out_tgt = open_output(out_prefix + ".tgt");
    auto out_docs = open_output(out_prefix + ".docs");
    auto out_audit = open_output(audit.empty() ? out_prefix + ".audit.tsv" : audit);
    ParallelWriter writer(out_src, out_tgt, &out_docs);
    write_audit_header(out_audit);

    std::size_t split_pairs = 0;
    std::size_t fallbacks = 0;
    auto emit_records = [&](std::vector<SplitRecord>& records) {
      write_audit(records, out_audit, false);
      split_pairs += records.size();
      for (const auto& r : records) fallbacks += r.point.used_fallback ? 1 : 0;
      records.clear();
    };

    std::vector<SplitRecord> records;
    if (cfg.method == SplitMethod::Aligned && align.empty()) {
      Corpus corpus = load_parallel(src, tgt, docs.empty() ? std::nullopt : std::optional<std::filesystem::path>(docs));
      corpus = align_corpus(std::move(corpus), aligner.config(global));
      SplitConfig inner = cfg;
      inner.keep_original = false;
      auto result = split_corpus(corpus, inner);
      for (const auto& doc : result.corpus.documents) writer.write(doc);
      emit_records(result.records);
    } else {
      auto in_src = open_input(src);
      auto in_tgt = open_input(tgt);
      std::optional<std::ifstream> in_align;
      if (!align.empty()) in_align.emplace(open_input(align));
      ParallelReader reader(in_src, in_tgt, sizes, in_align ? &*in_align : nullptr, names);
      DocumentSplitter splitter(cfg);
      while (auto doc = reader.next()) {
        for (const auto& piece : splitter.split(*doc, &records)) writer.write(piece);
        emit_records(records);
      }
    }

    if (cfg.keep_original) {
      auto in_src = open_input(src);
      auto in_tgt = open_input(tgt);
      ParallelReader reader(in_src, in_tgt, sizes, nullptr, names);
      while (auto doc = reader.next()) writer.write(*doc);
    }
    if (global.verbosity > 0) {
      log << "split " << split_pairs << " pairs (" << fallbacks << " aligned-split fallbacks)\n";
    }
    return kExitOk;
  }
};

struct AlignCommand {
  std::string src, tgt, out, ll;
  AlignerFlags aligner;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("align", "Train IBM Model 1 and write Viterbi alignments");
    cmd->add_option("--src", src, "Tokenized source file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--tgt", tgt, "Tokenized target file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "Pharaoh output file")->required();
    cmd->add_option("--log-likelihood", ll, "Write the per-iteration log-likelihood here");
    aligner.add_to(cmd);
  }

  int run(const GlobalOptions& global, std::ostream& log) const {
    const AlignerConfig cfg = aligner.config(global);
    Corpus corpus = load_parallel(src, tgt);
    const TranslationTable table = train(corpus, cfg);
    auto out_file = open_output(out);
    for (const auto& doc : corpus.documents) {
      for (const auto& pair : doc.pairs) out_file << format_pharaoh(viterbi_align(pair, table, cfg)) << '\n';
    }
    if (!ll.empty()) {
      auto ll_file = open_output(ll);
      ll_file.precision(17);
      for (std::size_t i = 0; i < table.log_likelihood().size(); ++i) {
        ll_file << i << '\t' << table.log_likelihood()[i] << '\n';
      }
    }
    if (global.verbosity > 0) log << "log-likelihood after training: " << table.log_likelihood().back() << '\n';
    return kExitOk;
  }
};

struct SynthDocsCommand {
  std::string src, tgt, out;
  std::size_t doc_len = 0;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("synth-docs", "Write a boundary spec with artificial documents of fixed length");
    cmd->add_option("--src", src, "Tokenized source file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--tgt", tgt, "Tokenized target file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--doc-len", doc_len, "Pairs per document")->required()->check(CLI::PositiveNumber);
    cmd->add_option("--out", out, "Boundary spec output")->required();
  }

  int run(const GlobalOptions&, std::ostream&) const {
    const Corpus corpus = synthesize_boundaries(load_parallel(src, tgt), doc_len);
    auto out_file = open_output(out);
    const auto sizes = corpus.document_sizes();
    write_boundary_spec(sizes, out_file);
    return kExitOk;
  }
};

struct StatsCommand {
  std::string conllu, coref, docs, audit, groups, out_prefix;
  std::size_t lmin = 7;
  std::size_t dmax = 3;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("stats", "Antecedent-distance and broken-dependency statistics");
    cmd->add_option("--conllu", conllu, "Source-side CoNLL-U parse")->required()->check(CLI::ExistingFile);
    cmd->add_option("--coref", coref, "Coreference chains (JSON lines)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--docs", docs, "Boundary spec (sentences per document)")->check(CLI::ExistingFile);
    cmd->add_option("--audit", audit, "Split audit TSV; middle split with --lmin when omitted")
        ->check(CLI::ExistingFile);
    cmd->add_option("--lmin", lmin, "Minimum length to split")->check(CLI::Range(2, 1 << 30))->capture_default_str();
    cmd->add_option("--dmax", dmax, "Largest distance bucket")->capture_default_str();
    cmd->add_option("--groups", groups, "Relation groups JSON {name: [labels], \"punctuation\": [labels]}")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out-prefix", out_prefix, "Writes PREFIX.coref.tsv and PREFIX.deps.tsv")->required();
  }

  RelationGroups relation_groups() const {
    if (groups.empty()) return RelationGroups::universal_dependencies();
    auto in = open_input(groups);
    RelationGroups g;
    try {
      const auto j = nlohmann::json::parse(in);
      for (const auto& [name, labels] : j.items()) {
        auto set = labels.get<std::set<std::string>>();
        if (name == "punctuation") {
          g.punctuation = std::move(set);
        } else {
          g.groups.emplace_back(name, std::move(set));
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("invalid relation groups: ") + e.what(), groups);
    }
    return g;
  }

  int run(const GlobalOptions&, std::ostream&) const {
    auto conllu_in = open_input(conllu);
    auto documents = read_conllu(conllu_in, conllu);
    if (!docs.empty()) {
      const auto sizes = load_sizes(docs);
      documents = partition_documents(std::move(documents), sizes);
    }
    auto coref_in = open_input(coref);
    const auto chains = read_coref_jsonl(coref_in, coref);

    std::map<std::size_t, std::size_t> audited;
    if (!audit.empty()) {
      auto audit_in = open_input(audit);
      for (const auto& r : read_audit(audit_in, audit)) audited[r.original_index] = r.point.source;
    }

    std::map<std::string, std::vector<CorefChain>> chains_by_doc;
    for (const auto& c : chains) chains_by_doc[c.document].push_back(c);

    std::vector<UnitDocument> original_units, split_units;
    std::vector<CorefChain> split_chains;
    std::vector<std::size_t> all_lengths;
    std::vector<DependencyTree> all_trees;
    std::vector<std::optional<std::size_t>> all_splits;
    std::size_t global_index = 0;
    for (const auto& doc : documents) {
      const auto lengths = doc.sentence_lengths();
      std::vector<std::optional<std::size_t>> splits;
      for (std::size_t len : lengths) {
        ++global_index;
        if (!audit.empty()) {
          const auto it = audited.find(global_index);
          splits.push_back(it == audited.end() ? std::nullopt : std::optional<std::size_t>(it->second));
        } else {
          splits.push_back(len >= lmin ? std::optional<std::size_t>(len / 2) : std::nullopt);
        }
      }
      const auto& doc_chains = chains_by_doc[doc.id];
      auto remapped = remap_annotations(lengths, splits, doc_chains, {});
      original_units.push_back(UnitDocument{doc.id, lengths});
      split_units.push_back(UnitDocument{doc.id, remapped.map.unit_lengths()});
      for (auto& c : remapped.chains) split_chains.push_back(std::move(c));
      all_lengths.insert(all_lengths.end(), lengths.begin(), lengths.end());
      all_trees.insert(all_trees.end(), doc.trees.begin(), doc.trees.end());
      all_splits.insert(all_splits.end(), splits.begin(), splits.end());
    }
    if (!audit.empty() && !audited.empty() && audited.rbegin()->first > global_index) {
      throw DataError("audit refers to sentence " + std::to_string(audited.rbegin()->first) + " but the parse has " +
                          std::to_string(global_index),
                      audit);
    }

    const auto before = antecedent_histogram(original_units, chains, dmax);
    const auto after = antecedent_histogram(split_units, split_chains, dmax);
    auto coref_out = open_output(out_prefix + ".coref.tsv");
    write_histogram_tsv(before, coref_out, "original");
    std::ostringstream split_table;
    write_histogram_tsv(after, split_table, "split");
    const std::string text = split_table.str();
    coref_out << text.substr(text.find('\n') + 1);

    const auto stats = broken_dependency_stats(all_lengths, all_trees, all_splits, relation_groups());
    auto deps_out = open_output(out_prefix + ".deps.tsv");
    write_dependency_tsv(stats, deps_out);
    return kExitOk;
  }
};

struct EvalCommand {
  std::string testset, scores, report, table, outcomes, convention = "unspecified", system = "system";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("eval-contrastive", "Contrastive accuracy from external model scores");
    cmd->add_option("--testset", testset, "Contrastive test set (JSON lines)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--scores", scores, "Scores (JSON lines or TSV)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--report", report, "JSON report output")->required();
    cmd->add_option("--table", table, "Text table output (stdout when omitted)");
    cmd->add_option("--outcomes", outcomes, "Per-example 0/1 outcomes, for mcnemar");
    cmd->add_option("--convention", convention, "How the scores were computed, recorded in the report");
    cmd->add_option("--system", system, "Row label in the text table");
  }

  int run(const GlobalOptions&, std::ostream& out) const {
    auto test_in = open_input(testset);
    const auto examples = read_contrastive_jsonl(test_in, testset);
    auto score_in = open_input(scores);
    const auto records = read_scores(score_in, scores);
    EvalReport r = contrastive_accuracy(examples, records);
    r.score_convention = convention;

    auto report_out = open_output(report);
    write_report_json(r, report_out);
    if (table.empty()) {
      write_report_table(r, out, system);
    } else {
      auto table_out = open_output(table);
      write_report_table(r, table_out, system);
    }
    if (!outcomes.empty()) {
      auto outcomes_out = open_output(outcomes);
      write_outcomes(r.outcomes, outcomes_out);
    }
    return kExitOk;
  }
};

struct McNemarCommand {
  std::string a, b;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("mcnemar", "Paired McNemar test on two outcome files");
    cmd->add_option("--a", a, "Outcomes of system A")->required()->check(CLI::ExistingFile);
    cmd->add_option("--b", b, "Outcomes of system B")->required()->check(CLI::ExistingFile);
  }

  int run(const GlobalOptions&, std::ostream& out) const {
    auto in_a = open_input(a);
    auto in_b = open_input(b);
    const auto r = mcnemar_test(read_outcomes(in_a, a), read_outcomes(in_b, b));
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.6g", r.p_value);
    out << "b\tc\tp_value\tmethod\n"
        << r.b << '\t' << r.c << '\t' << buf << '\t' << (r.exact ? "exact-binomial" : "chi-squared") << '\n';
    return kExitOk;
  }
};

struct ShuffleCommand {
  std::string testset, out;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("shuffle-context", "Derange contexts across contrastive examples");
    cmd->add_option("--testset", testset, "Contrastive test set (JSON lines)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "Shuffled test set output")->required();
  }

  int run(const GlobalOptions& global, std::ostream&) const {
    auto in = open_input(testset);
    const auto examples = read_contrastive_jsonl(in, testset);
    const auto shuffled = shuffle_context(examples, global.seed);
    auto out_file = open_output(out);
    write_contrastive_jsonl(shuffled, out_file);
    return kExitOk;
  }
};

struct BleuCommand {
  std::string hyp, ref, tokenize = "13a";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("bleu", "Case-sensitive corpus BLEU");
    cmd->add_option("--hyp", hyp, "Hypotheses, one per line")->required()->check(CLI::ExistingFile);
    cmd->add_option("--ref", ref, "References, one per line")->required()->check(CLI::ExistingFile);
    cmd->add_option("--tokenize", tokenize, "13a (for detokenized text) or none")
        ->check(CLI::IsMember({"13a", "none"}))
        ->capture_default_str();
  }

  int run(const GlobalOptions&, std::ostream& out) const {
    const auto mode = tokenize == "13a" ? BleuTokenizer::Mteval13a : BleuTokenizer::None;
    std::vector<std::vector<std::string>> h, r;
    for (const auto& line : read_lines(hyp)) h.push_back(bleu_tokenize(line, mode));
    for (const auto& line : read_lines(ref)) r.push_back(bleu_tokenize(line, mode));
    out << format_bleu(corpus_bleu_stats(h, r)) << '\n';
    return kExitOk;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Corpus splitting and evaluation toolkit for context-aware MT", "docsplit"};
  app.set_version_flag("--version", std::string("docsplit ") + kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Seed for randomized steps")->capture_default_str();
  app.add_option("--threads", global.threads, "Worker threads (output does not depend on it)")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
  app.add_flag("-v,--verbose", global.verbosity, "Report progress on stderr");

  SplitCommand split;
  AlignCommand align;
  SynthDocsCommand synth;
  StatsCommand stats;
  EvalCommand eval;
  McNemarCommand mcnemar;
  ShuffleCommand shuffle;
  BleuCommand bleu;
  split.add(app);
  align.add(app);
  stats.add(app);
  synth.add(app);
  eval.add(app);
  mcnemar.add(app);
  shuffle.add(app);
  bleu.add(app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "split") return split.run(global, err);
    if (name == "align") return align.run(global, err);
    if (name == "synth-docs") return synth.run(global, err);
    if (name == "stats") return stats.run(global, err);
    if (name == "eval-contrastive") return eval.run(global, out);
    if (name == "mcnemar") return mcnemar.run(global, out);
    if (name == "shuffle-context") return shuffle.run(global, err);
    if (name == "bleu") return bleu.run(global, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace docsplit::cli
