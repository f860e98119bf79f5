#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "docsplit/cli.hpp"
#include "docsplit/corpus.hpp"
#include "docsplit/version.hpp"
#include "test_support.hpp"

namespace docsplit {
namespace {

using testing::read_file;
using testing::TempDir;
using testing::write_file;

const std::string kData = DOCSPLIT_TEST_DATA;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return Run{code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    write_file(src(), "a b c d e f g h\nshort one\nq r s t u v w x y\nl m n o p q r\n");
    write_file(tgt(), "A B C D E F G H\nkurz eins\nQ R S T U V W X Y Z\nL M N O P Q R\n");
    write_file(docs(), "2\n2\n");
  }
  std::string src() const { return (dir / "in.src").string(); }
  std::string tgt() const { return (dir / "in.tgt").string(); }
  std::string docs() const { return (dir / "in.docs").string(); }
  std::string path(const std::string& name) const { return (dir / name).string(); }

  TempDir dir;
};

TEST_F(CliTest, VersionAndHelp) {
  auto r = run({"--version"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_EQ(r.out, std::string("docsplit ") + kVersion + "\n");
  r = run({"--help"});
  EXPECT_EQ(r.code, cli::kExitOk);
  for (const char* sub : {"split", "align", "stats", "synth-docs", "eval-contrastive", "mcnemar", "shuffle-context",
                          "bleu"}) {
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  }
  r = run({"split", "--help"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_NE(r.out.find("--lmin"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  auto r = run({});
  EXPECT_EQ(r.code, cli::kExitUsage);
  r = run({"split", "--src", src(), "--tgt", tgt(), "--out-prefix", path("o"), "--bogus"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("--bogus"), std::string::npos);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  r = run({"split", "--src", path("missing"), "--tgt", tgt(), "--out-prefix", path("o")});
  EXPECT_EQ(r.code, cli::kExitUsage);
  r = run({"split", "--src", src(), "--tgt", tgt(), "--out-prefix", path("o"), "--method", "diagonal"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  r = run({"split", "--src", src(), "--tgt", tgt(), "--out-prefix", path("o"), "--lmin", "1"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  r = run({"--threads", "0", "bleu", "--hyp", src(), "--ref", src()});
  EXPECT_EQ(r.code, cli::kExitUsage);
  r = run({"frobnicate"});
  EXPECT_EQ(r.code, cli::kExitUsage);
}

TEST_F(CliTest, SplitMiddle) {
  const std::string before = read_file(src());
  auto r = run({"split", "--method", "middle", "--lmin", "7", "--src", src(), "--tgt", tgt(), "--docs", docs(),
                "--out-prefix", path("out")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(read_file(path("out.src")), "a b c d\ne f g h\nshort one\nq r s t\nu v w x y\nl m n\no p q r\n");
  EXPECT_EQ(read_file(path("out.tgt")), "A B C D\nE F G H\nkurz eins\nQ R S T U\nV W X Y Z\nL M N\nO P Q R\n");
  EXPECT_EQ(read_file(path("out.docs")), "3\n4\n");
  EXPECT_EQ(read_file(path("out.audit.tsv")), "index\tm_src\tm_tgt\tfallback\n1\t4\t4\t0\n3\t4\t5\t0\n4\t3\t3\t0\n");
  EXPECT_EQ(read_file(src()), before);

  const std::string first = read_file(path("out.src")) + read_file(path("out.tgt")) + read_file(path("out.docs"));
  r = run({"split", "--src", src(), "--tgt", tgt(), "--docs", docs(), "--out-prefix", path("out")});
  ASSERT_EQ(r.code, cli::kExitOk);
  EXPECT_EQ(read_file(path("out.src")) + read_file(path("out.tgt")) + read_file(path("out.docs")), first);
}

TEST_F(CliTest, SplitZeroResourceAndKeepOriginal) {
  auto r = run({"split", "--zero-resource", "--src", src(), "--tgt", tgt(), "--out-prefix", path("z"), "--audit",
                path("z.tsv")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(read_file(path("z.docs")), "2\n1\n2\n2\n");
  EXPECT_TRUE(std::filesystem::exists(path("z.tsv")));

  r = run({"split", "--keep-original", "--src", src(), "--tgt", tgt(), "--docs", docs(), "--out-prefix", path("k")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(read_file(path("k.docs")), "3\n4\n2\n2\n");
  const std::string out = read_file(path("k.src"));
  EXPECT_EQ(out.substr(out.size() - read_file(src()).size()), read_file(src()));
}

TEST_F(CliTest, SplitAligned) {
  write_file(path("a.txt"), "0-0 1-1 2-2 3-3 4-4 5-5 6-6 7-7\n\n0-0 1-1 2-2 3-4 4-3 5-5\n0-6 6-0\n");
  auto r = run({"split", "--method", "aligned", "--radius", "1", "--src", src(), "--tgt", tgt(), "--align",
                path("a.txt"), "--out-prefix", path("al")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(read_file(path("al.audit.tsv")), "index\tm_src\tm_tgt\tfallback\n1\t4\t4\t0\n3\t5\t5\t0\n4\t3\t3\t1\n");

  r = run({"split", "--method", "aligned", "--src", src(), "--tgt", tgt(), "--out-prefix", path("trained")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(read_file(path("trained.audit.tsv")).substr(0, 6), "index\t");

  write_file(path("bad.txt"), "0-0\n0-9\n\n\n");
  r = run({"split", "--method", "aligned", "--src", src(), "--tgt", tgt(), "--align", path("bad.txt"), "--out-prefix",
           path("bad")});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find(path("bad.txt") + ":2:"), std::string::npos) << r.err;
}

TEST_F(CliTest, SplitDataErrors) {
  write_file(path("short.tgt"), "A\nB\n");
  auto r = run({"split", "--src", src(), "--tgt", path("short.tgt"), "--out-prefix", path("e")});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("line-count mismatch"), std::string::npos) << r.err;
  write_file(path("bad.docs"), "3\n3\n");
  r = run({"split", "--src", src(), "--tgt", tgt(), "--docs", path("bad.docs"), "--out-prefix", path("e")});
  EXPECT_EQ(r.code, cli::kExitData);
  r = run({"split", "--src", src(), "--tgt", tgt(), "--out-prefix", path("no/such/dir/e")});
  EXPECT_EQ(r.code, cli::kExitData);
}

TEST_F(CliTest, AlignIsThreadIndependent) {
  std::ostringstream s, t;
  for (int i = 0; i < 300; ++i) {
    s << "w" << i % 7 << " w" << (i * 3) % 11 << " w" << (i * 5) % 13 << '\n';
    t << "v" << (i * 3) % 11 << " v" << i % 7 << " v" << (i * 5) % 13 << " x\n";
  }
  write_file(path("s"), s.str());
  write_file(path("t"), t.str());
  auto r = run({"--threads", "1", "align", "--diagonal", "--src", path("s"), "--tgt", path("t"), "--out",
                path("a1"), "--log-likelihood", path("ll")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  r = run({"--threads", "8", "align", "--diagonal", "--src", path("s"), "--tgt", path("t"), "--out", path("a8")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(read_file(path("a1")), read_file(path("a8")));
  std::istringstream lines(read_file(path("a1")));
  std::string first, second;
  std::getline(lines, first);
  std::getline(lines, second);
  EXPECT_EQ(second.substr(0, 11), "0-1 1-0 2-2");
  std::istringstream ll(read_file(path("ll")));
  std::size_t n = 0;
  std::string line;
  while (std::getline(ll, line)) ++n;
  EXPECT_EQ(n, 6u);
}

TEST_F(CliTest, SynthDocs) {
  auto r = run({"synth-docs", "--src", src(), "--tgt", tgt(), "--doc-len", "3", "--out", path("d")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(read_file(path("d")), "3\n1\n");
  r = run({"synth-docs", "--src", src(), "--tgt", tgt(), "--doc-len", "0", "--out", path("d")});
  EXPECT_EQ(r.code, cli::kExitUsage);
}

TEST_F(CliTest, Stats) {
  auto r = run({"stats", "--conllu", kData + "/fixture20.conllu", "--coref", kData + "/fixture20.coref.jsonl",
                "--out-prefix", path("st")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const std::string coref = read_file(path("st.coref.tsv"));
  EXPECT_EQ(coref.substr(0, coref.find('\n')),
            "data\tdistance\ttokens\tall\tpronouns\tnormalized_all\tnormalized_pronouns");
  EXPECT_NE(coref.find("\noriginal\t0\t"), std::string::npos);
  EXPECT_NE(coref.find("\nsplit\t3\t"), std::string::npos);
  const std::string deps = read_file(path("st.deps.tsv"));
  EXPECT_EQ(deps.substr(0, deps.find('\n')), "group\tsentences\ttotal\tpercent");
  EXPECT_NE(deps.find("\nany\t"), std::string::npos);

  write_file(path("groups.json"), R"({"core": ["nsubj", "obj"], "punctuation": ["punct"]})");
  write_file(path("audit.tsv"), "index\tm_src\tm_tgt\tfallback\n1\t2\t2\t0\n");
  r = run({"stats", "--conllu", kData + "/fixture20.conllu", "--coref", kData + "/fixture20.coref.jsonl",
           "--groups", path("groups.json"), "--audit", path("audit.tsv"), "--out-prefix", path("g")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(read_file(path("g.deps.tsv")), "group\tsentences\ttotal\tpercent\ncore\t1\t20\t5.00\nany\t1\t20\t5.00\n");

  write_file(path("late.tsv"), "index\tm_src\tm_tgt\tfallback\n21\t2\t2\t0\n");
  r = run({"stats", "--conllu", kData + "/fixture20.conllu", "--coref", kData + "/fixture20.coref.jsonl", "--audit",
           path("late.tsv"), "--out-prefix", path("g")});
  EXPECT_EQ(r.code, cli::kExitData);
}

TEST_F(CliTest, EvalMcNemarShuffle) {
  const std::string testset = kData + "/contrastive12.jsonl";
  auto r = run({"eval-contrastive", "--testset", testset, "--scores", kData + "/scores12.tsv", "--report",
                path("r.json"), "--outcomes", path("o1"), "--system", "K1", "--convention", "logprob"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("K1  66.67"), std::string::npos) << r.out;
  EXPECT_NE(read_file(path("r.json")).find("\"score_convention\": \"logprob\""), std::string::npos);
  EXPECT_EQ(read_file(path("o1")), "1\n1\n0\n1\n0\n1\n1\n0\n1\n1\n0\n1\n");

  write_file(path("o2"), "1\n0\n1\n1\n1\n1\n1\n1\n1\n1\n1\n1\n");
  r = run({"mcnemar", "--a", path("o1"), "--b", path("o2")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(r.out, "b\tc\tp_value\tmethod\n1\t4\t0.375\texact-binomial\n");
  write_file(path("o3"), "1\n");
  EXPECT_EQ(run({"mcnemar", "--a", path("o1"), "--b", path("o3")}).code, cli::kExitData);

  r = run({"--seed", "7", "shuffle-context", "--testset", testset, "--out", path("s7")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  run({"--seed", "7", "shuffle-context", "--testset", testset, "--out", path("s7b")});
  run({"--seed", "8", "shuffle-context", "--testset", testset, "--out", path("s8")});
  EXPECT_EQ(read_file(path("s7")), read_file(path("s7b")));
  EXPECT_NE(read_file(path("s7")), read_file(path("s8")));

  write_file(path("bad.scores"), "e01\t1 2\n");
  r = run({"eval-contrastive", "--testset", testset, "--scores", path("bad.scores"), "--report", path("x.json")});
  EXPECT_EQ(r.code, cli::kExitData);
}

TEST_F(CliTest, Bleu) {
  write_file(path("h"), "The cat sat on the mat.\nIt rained, all day!\n");
  auto r = run({"bleu", "--hyp", path("h"), "--ref", path("h")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(r.out.substr(0, 13), "BLEU = 100.00");
  write_file(path("r"), "The cat sat on the mat.\n");
  EXPECT_EQ(run({"bleu", "--hyp", path("h"), "--ref", path("r")}).code, cli::kExitData);
  r = run({"bleu", "--tokenize", "none", "--hyp", path("h"), "--ref", path("h")});
  EXPECT_EQ(r.out.substr(0, 13), "BLEU = 100.00");
}

}  // namespace
}  // namespace docsplit
