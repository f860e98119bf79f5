#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "docsplit/aligner.hpp"
#include "docsplit/cli.hpp"
#include "docsplit/corpus.hpp"
#include "docsplit/error.hpp"
#include "docsplit/eval.hpp"
#include "docsplit/splitter.hpp"
#include "docsplit/version.hpp"

namespace py = pybind11;
using namespace docsplit;

namespace {

using PyLinks = std::vector<std::pair<std::uint32_t, std::uint32_t>>;
using PyPair = std::tuple<std::string, std::string, std::optional<PyLinks>>;

Alignment to_alignment(const PyLinks& links, std::size_t src_len, std::size_t tgt_len) {
  Alignment out;
  out.reserve(links.size());
  for (auto [j, k] : links) {
    if (j < 1 || j > src_len || k < 1 || k > tgt_len) {
      throw InvalidArgument("link " + std::to_string(j) + "-" + std::to_string(k) + " is out of range");
    }
    out.push_back({j, k});
  }
  normalize(out);
  return out;
}

PyLinks to_links(const Alignment& alignment) {
  PyLinks out;
  out.reserve(alignment.size());
  for (const auto& l : alignment) out.emplace_back(l.source, l.target);
  return out;
}

SentencePair to_pair(const PyPair& p) {
  SentencePair pair{Sentence::parse(std::get<0>(p)), Sentence::parse(std::get<1>(p)), std::nullopt};
  if (const auto& links = std::get<2>(p)) pair.alignment = to_alignment(*links, pair.source.size(), pair.target.size());
  return pair;
}

PyPair from_pair(const SentencePair& pair) {
  std::optional<PyLinks> links;
  if (pair.alignment) links = to_links(*pair.alignment);
  return {pair.source.str(), pair.target.str(), std::move(links)};
}

Corpus to_corpus(const std::vector<std::vector<PyPair>>& docs) {
  Corpus corpus;
  corpus.documents.reserve(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    Document doc{default_document_id(d + 1), {}};
    for (const auto& p : docs[d]) doc.pairs.push_back(to_pair(p));
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

std::vector<std::vector<PyPair>> from_corpus(const Corpus& corpus) {
  std::vector<std::vector<PyPair>> out;
  for (const auto& doc : corpus.documents) {
    auto& dst = out.emplace_back();
    for (const auto& p : doc.pairs) dst.push_back(from_pair(p));
  }
  return out;
}

std::ifstream must_open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw py::value_error("cannot open " + path);
  return in;
}

py::dict cells(const std::map<std::string, AccuracyCell>& m) {
  py::dict d;
  for (const auto& [k, v] : m) d[py::str(k)] = py::make_tuple(v.correct, v.n);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the docsplit toolkit";
  m.attr("__version__") = kVersion;

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  py::enum_<SplitMethod>(m, "SplitMethod")
      .value("MIDDLE", SplitMethod::Middle)
      .value("ALIGNED", SplitMethod::Aligned);

  py::class_<SplitConfig>(m, "SplitConfig")
      .def(py::init<>())
      .def_readwrite("min_length", &SplitConfig::min_length)
      .def_readwrite("method", &SplitConfig::method)
      .def_readwrite("max_search_radius", &SplitConfig::max_search_radius)
      .def_readwrite("zero_resource", &SplitConfig::zero_resource)
      .def_readwrite("keep_original", &SplitConfig::keep_original);

  py::class_<SplitPoint>(m, "SplitPoint")
      .def_readonly("source", &SplitPoint::source)
      .def_readonly("target", &SplitPoint::target)
      .def_readonly("used_fallback", &SplitPoint::used_fallback)
      .def("__eq__", [](const SplitPoint& a, const SplitPoint& b) { return a == b; })
      .def("__repr__", [](const SplitPoint& p) {
        std::ostringstream os;
        os << "SplitPoint(source=" << p.source << ", target=" << p.target
           << ", used_fallback=" << (p.used_fallback ? "True" : "False") << ")";
        return os.str();
      });

  py::class_<AlignerConfig>(m, "AlignerConfig")
      .def(py::init<>())
      .def_readwrite("iterations", &AlignerConfig::iterations)
      .def_readwrite("use_diagonal_prior", &AlignerConfig::use_diagonal_prior)
      .def_readwrite("diagonal_tension", &AlignerConfig::diagonal_tension)
      .def_readwrite("include_null", &AlignerConfig::include_null)
      .def_readwrite("seed", &AlignerConfig::seed)
      .def_readwrite("threads", &AlignerConfig::threads);

  m.def("middle_split", [](const std::string& src, const std::string& tgt) {
    return middle_split(SentencePair{Sentence::parse(src), Sentence::parse(tgt), std::nullopt});
  }, py::arg("source"), py::arg("target"));

  m.def("aligned_split", [](const std::string& src, const std::string& tgt, const PyLinks& links, std::size_t radius) {
    return aligned_split(to_pair({src, tgt, links}), radius);
  }, py::arg("source"), py::arg("target"), py::arg("alignment"), py::arg("max_search_radius") = 5);

  m.def("apply_split", [](const std::string& src, const std::string& tgt, const SplitPoint& point) {
    auto seg = apply_split(SentencePair{Sentence::parse(src), Sentence::parse(tgt), std::nullopt}, point);
    return py::make_tuple(py::make_tuple(seg.first.source.str(), seg.first.target.str()),
                          py::make_tuple(seg.second.source.str(), seg.second.target.str()));
  }, py::arg("source"), py::arg("target"), py::arg("point"));

  m.def("split_corpus", [](const std::vector<std::vector<PyPair>>& docs, const SplitConfig& config) {
    auto result = split_corpus(to_corpus(docs), config);
    std::vector<std::tuple<std::size_t, SplitPoint>> records;
    for (const auto& r : result.records) records.emplace_back(r.original_index, r.point);
    return py::make_tuple(from_corpus(result.corpus), records);
  }, py::arg("documents"), py::arg("config") = SplitConfig{},
     "Split every document; each pair is (source, target, links or None).");

  m.def("align", [](const std::vector<std::pair<std::string, std::string>>& pairs, const AlignerConfig& config) {
    Corpus corpus;
    auto& doc = corpus.documents.emplace_back(Document{default_document_id(1), {}});
    for (const auto& [s, t] : pairs) doc.pairs.push_back({Sentence::parse(s), Sentence::parse(t), std::nullopt});
    Corpus aligned;
    {
      py::gil_scoped_release release;
      aligned = align_corpus(std::move(corpus), config);
    }
    std::vector<PyLinks> out;
    for (const auto& p : aligned.documents.front().pairs) out.push_back(to_links(p.alignment.value_or(Alignment{})));
    return out;
  }, py::arg("pairs"), py::arg("config") = AlignerConfig{});

  m.def("contrastive_accuracy", [](const std::string& testset, const std::string& scores) {
    auto in_t = must_open(testset);
    auto in_s = must_open(scores);
    auto examples = read_contrastive_jsonl(in_t, testset);
    auto records = read_scores(in_s, scores);
    auto report = contrastive_accuracy(examples, records);
    py::dict d;
    d["accuracy"] = report.overall_accuracy;
    d["n_total"] = report.n_total;
    d["n_correct"] = report.n_correct;
    d["per_distance"] = cells(report.per_distance);
    d["per_class"] = cells(report.per_class);
    d["outcomes"] = report.outcomes;
    d["score_convention"] = report.score_convention;
    return d;
  }, py::arg("testset"), py::arg("scores"));

  py::class_<McNemarResult>(m, "McNemarResult")
      .def_readonly("b", &McNemarResult::b)
      .def_readonly("c", &McNemarResult::c)
      .def_readonly("p_value", &McNemarResult::p_value)
      .def_readonly("exact", &McNemarResult::exact);

  m.def("mcnemar", &mcnemar_test, py::arg("outcomes_a"), py::arg("outcomes_b"));
  m.def("mcnemar_from_counts", &mcnemar_from_counts, py::arg("b"), py::arg("c"));
  m.def("seeded_derangement", &seeded_derangement, py::arg("n"), py::arg("seed"));

  py::enum_<BleuTokenizer>(m, "BleuTokenizer")
      .value("NONE", BleuTokenizer::None)
      .value("MTEVAL_13A", BleuTokenizer::Mteval13a);

  m.def("corpus_bleu", &corpus_bleu, py::arg("hypotheses"), py::arg("references"),
        py::arg("tokenizer") = BleuTokenizer::None);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Run the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
