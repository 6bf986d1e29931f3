// End-to-end exercise of the seqrank command-line tool. Takes the binary's
// path as argv[1], drives full pipelines through std::system, and checks
// exit codes and output files.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void expect(bool ok, const std::string& what, int line) {
  if (!ok) {
    ++failures;
    std::fprintf(stderr, "FAIL (test_cli.cpp:%d): %s\n", line, what.c_str());
  }
}
#define EXPECT(cond) expect((cond), #cond, __LINE__)
#define EXPECT_EQ(a, b)                                                     \
  do {                                                                      \
    const auto va = (a);                                                    \
    const auto vb = (b);                                                    \
    expect(va == vb,                                                        \
           std::string(#a " == " #b " (got ") + std::to_string(va) + " vs " \
               + std::to_string(vb) + ")",                                  \
           __LINE__);                                                       \
  } while (0)

std::string g_bin;

int run(const std::string& args) {
  const std::string cmd = "SEQRANK_LOG=quiet \"" + g_bin + "\" " + args;
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  if (WIFEXITED(rc)) return WEXITSTATUS(rc);
  return 128;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return "<missing:" + p.string() + ">";
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_tab(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool parse_double(const std::string& s, double* out) {
  char* end = nullptr;
  *out = std::strtod(s.c_str(), &end);
  return end != s.c_str() && *end == '\0';
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path-to-seqrank-binary>\n", argv[0]);
    return 2;
  }
  g_bin = argv[1];

  const fs::path dir = fs::current_path() / "tmp_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto at = [&](const std::string& name) {
    return (dir / name).string();
  };

  // ---- bare usage errors ------------------------------------------------
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("no-such-command"), 1);
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("train --help"), 0);
  EXPECT_EQ(run("gen-data"), 1);  // --out is required

  // ---- gen-data ----------------------------------------------------------
  EXPECT_EQ(run("gen-data --out " + at("data") +
                " --records 50 --judgment-queries 8 --seed 5"),
            0);
  EXPECT(fs::exists(dir / "data/clicks.tsv"));
  EXPECT(fs::exists(dir / "data/judgments.tsv"));
  EXPECT(fs::exists(dir / "data/ground_truth.json"));
  EXPECT(fs::exists(dir / "data/provenance.txt"));
  const auto clicks = lines_of(slurp(dir / "data/clicks.tsv"));
  EXPECT_EQ(clicks.size(), 50u);
  EXPECT_EQ(lines_of(slurp(dir / "data/judgments.tsv")).size(), 8u * 8u);
  EXPECT(slurp(dir / "data/provenance.txt").find("command=gen-data") !=
         std::string::npos);

  EXPECT_EQ(run("gen-data --out " + at("data_rep") +
                " --records 50 --judgment-queries 8 --seed 5"),
            0);
  EXPECT(slurp(dir / "data/clicks.tsv") ==
         slurp(dir / "data_rep/clicks.tsv"));
  EXPECT_EQ(run("gen-data --out " + at("data_other") +
                " --records 50 --judgment-queries 8 --seed 6"),
            0);
  EXPECT(slurp(dir / "data/clicks.tsv") !=
         slurp(dir / "data_other/clicks.tsv"));
  EXPECT_EQ(run("gen-data --out " + at("data_bad") + " --topics 0"), 2);

  // ---- train ---------------------------------------------------------------
  const std::string train_args =
      " --corpus " + at("data/clicks.tsv") +
      " --cells 4 --negatives 2 --epochs 2 --minibatch 16 --seed 3";
  EXPECT_EQ(run("train --out " + at("model") + train_args), 0);
  for (const char* f :
       {"dict.tsv", "query.ckpt", "doc.ckpt", "loss_curve.csv",
        "provenance.txt"}) {
    EXPECT(fs::exists(dir / "model" / f));
  }
  const auto curve = lines_of(slurp(dir / "model/loss_curve.csv"));
  EXPECT_EQ(curve.size(), 3u);  // header + 2 epochs
  EXPECT(curve[0] == "epoch,mean_loss,seconds");
  EXPECT(curve[1].rfind("1,", 0) == 0);
  EXPECT(curve[1].substr(curve[1].rfind(',') + 1) == "0");  // redacted time

  // Byte-identical artifacts on re-run (deterministic mode is the default).
  EXPECT_EQ(run("train --out " + at("model_rep") + train_args), 0);
  for (const char* f :
       {"dict.tsv", "query.ckpt", "doc.ckpt", "loss_curve.csv"}) {
    expect(slurp(dir / "model" / f) == slurp(dir / "model_rep" / f),
           std::string("re-run byte-identical: ") + f, __LINE__);
  }

  EXPECT_EQ(run("train --out " + at("model_rnn") + " --arch rnn --corpus " +
                at("data/clicks.tsv") +
                " --cells 3 --negatives 2 --epochs 1 --seed 3"),
            0);
  EXPECT_EQ(run("train --out " + at("model_bidi") + " --bidirectional" +
                " --corpus " + at("data/clicks.tsv") +
                " --cells 3 --negatives 2 --epochs 1 --seed 3"),
            0);

  EXPECT_EQ(run("train --out " + at("x") + " --corpus " + at("nope.tsv")), 2);
  EXPECT_EQ(run("train --out " + at("x") + train_args + " --gamma 0"), 2);
  EXPECT_EQ(run("train --out " + at("x") + train_args + " --arch bogus"), 1);
  EXPECT_EQ(run("train --out " + at("x") + train_args + " --negatives 500"),
            2);  // corpus too small

  // ---- embed --------------------------------------------------------------
  {
    std::ofstream sents(dir / "sents.txt", std::ios::binary);
    for (int i = 0; i < 3; ++i) {
      sents << split_tab(clicks[static_cast<std::size_t>(i)])[0] << '\n';
    }
    sents << '\n';  // blank line is skipped
  }
  EXPECT_EQ(run("embed --checkpoint-q " + at("model/query.ckpt") + " --dict " +
                at("model/dict.tsv") + " --input " + at("sents.txt") +
                " --out " + at("emb.tsv")),
            0);
  {
    const auto rows = lines_of(slurp(dir / "emb.tsv"));
    EXPECT_EQ(rows.size(), 3u);
    for (const auto& row : rows) {
      const auto fields = split_tab(row);
      EXPECT_EQ(fields.size(), 4u);  // cells=4, unidirectional
      for (const auto& f : fields) {
        double v = 0;
        EXPECT(parse_double(f, &v));
        EXPECT(std::isfinite(v));
      }
    }
  }
  // Bidirectional embeddings concatenate both readings.
  EXPECT_EQ(run("embed --checkpoint-q " + at("model_bidi/query.ckpt") +
                " --dict " + at("model_bidi/dict.tsv") + " --input " +
                at("sents.txt") + " --out " + at("emb_bidi.tsv")),
            0);
  EXPECT_EQ(split_tab(lines_of(slurp(dir / "emb_bidi.tsv"))[0]).size(), 6u);

  EXPECT_EQ(run("embed --dict " + at("model/dict.tsv") + " --input " +
                at("sents.txt")),
            1);  // neither side given
  EXPECT_EQ(run("embed --checkpoint-q " + at("model/query.ckpt") +
                " --checkpoint-d " + at("model/doc.ckpt") + " --dict " +
                at("model/dict.tsv") + " --input " + at("sents.txt")),
            1);  // both sides given
  EXPECT_EQ(run("embed --checkpoint-q " + at("model/query.ckpt") + " --dict " +
                at("absent.tsv") + " --input " + at("sents.txt")),
            2);

  // ---- rank -----------------------------------------------------------------
  {
    std::ofstream cands(dir / "cands.txt", std::ios::binary);
    for (int i = 0; i < 4; ++i) {
      cands << split_tab(clicks[static_cast<std::size_t>(i)])[1] << '\n';
    }
  }
  const std::string query0 = split_tab(clicks[0])[0];
  EXPECT_EQ(run("rank --checkpoint-q " + at("model/query.ckpt") +
                " --checkpoint-d " + at("model/doc.ckpt") + " --dict " +
                at("model/dict.tsv") + " --query \"" + query0 +
                "\" --candidates " + at("cands.txt") + " --out " +
                at("ranked.tsv")),
            0);
  {
    const auto rows = lines_of(slurp(dir / "ranked.tsv"));
    EXPECT_EQ(rows.size(), 5u);
    EXPECT(rows[0] == "rank\tscore\tdocument");
    double prev = 2.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto fields = split_tab(rows[i]);
      EXPECT_EQ(fields.size(), 3u);
      EXPECT(fields[0] == std::to_string(i));
      double score = 0;
      EXPECT(parse_double(fields[1], &score));
      EXPECT(score <= prev + 1e-15);
      prev = score;
    }
  }
  {
    std::ofstream empty(dir / "empty.txt", std::ios::binary);
    empty << "\n\n";
  }
  EXPECT_EQ(run("rank --checkpoint-q " + at("model/query.ckpt") +
                " --checkpoint-d " + at("model/doc.ckpt") + " --dict " +
                at("model/dict.tsv") + " --query \"" + query0 +
                "\" --candidates " + at("empty.txt")),
            2);

  // ---- eval ----------------------------------------------------------------
  const std::string eval_common = " --checkpoint-q " + at("model/query.ckpt") +
                                  " --checkpoint-d " + at("model/doc.ckpt") +
                                  " --dict " + at("model/dict.tsv") +
                                  " --judgments " + at("data/judgments.tsv");
  EXPECT_EQ(run("eval" + eval_common + " --k 1,3 --per-query --out " +
                at("eval.tsv")),
            0);
  {
    const auto rows = lines_of(slurp(dir / "eval.tsv"));
    EXPECT(rows.size() >= 3u);
    EXPECT(rows[0] == "k\tmean_ndcg");
    for (int i = 1; i <= 2; ++i) {
      const auto fields = split_tab(rows[static_cast<std::size_t>(i)]);
      EXPECT_EQ(fields.size(), 2u);
      double v = 0;
      EXPECT(parse_double(fields[1], &v));
      EXPECT(v >= 0.0);
      EXPECT(v <= 1.0 + 1e-12);
    }
    // Per-query block: blank separator, header, <= 8 query rows.
    EXPECT(rows[3].empty());
    EXPECT(rows[4] == "query\tndcg@1\tndcg@3");
    EXPECT(rows.size() > 5u);
    EXPECT(rows.size() <= 5u + 8u);
  }
  EXPECT(fs::exists(dir / "eval.tsv.provenance.txt"));
  // Swapped sides only warn (exit 0).
  EXPECT_EQ(run("eval --checkpoint-q " + at("model/doc.ckpt") +
                " --checkpoint-d " + at("model/query.ckpt") + " --dict " +
                at("model/dict.tsv") + " --judgments " +
                at("data/judgments.tsv") + " --k 1 --out " + at("eval2.tsv")),
            0);
  EXPECT_EQ(run("eval" + eval_common + " --k 0"), 2);
  EXPECT_EQ(run("eval" + eval_common + " --k abc"), 1);

  // ---- gradcheck -------------------------------------------------------------
  EXPECT_EQ(run("gradcheck --arch rnn --seeds 2 --seed 9 --out " +
                at("gc.tsv")),
            0);
  {
    const auto rows = lines_of(slurp(dir / "gc.tsv"));
    EXPECT(rows.size() >= 3u);
    EXPECT(rows[0] == "group\tmax_rel_err");
    EXPECT(split_tab(rows.back())[0] == "overall");
    double overall = 0;
    EXPECT(parse_double(split_tab(rows.back())[1], &overall));
    EXPECT(overall <= 1e-4);
    EXPECT(fs::exists(dir / "gc.tsv.provenance.txt"));
  }
  EXPECT_EQ(run("gradcheck --arch lstm --variant reduced --seeds 1 "
                "--bidirectional --cells 4 --dim 12 --out " +
                at("gc2.tsv")),
            0);
  EXPECT_EQ(run("gradcheck --arch rnn --seeds 1 --tol 1e-18"), 3);
  EXPECT_EQ(run("gradcheck --arch bogus"), 1);

  // ---- analyze ----------------------------------------------------------------
  EXPECT_EQ(run("analyze --checkpoint-q " + at("model/query.ckpt") +
                " --dict " + at("model/dict.tsv") + " --sentence \"" + query0 +
                "\" --out " + at("an_uni")),
            0);
  for (const char* f :
       {"sentence0_l2r_output.csv", "sentence0_l2r_input_gate.csv",
        "sentence0_l2r_forget_gate.csv", "sentence0_l2r_output_gate.csv",
        "sentence0_l2r_cell_state.csv", "sentence0_l2r.json",
        "provenance.txt"}) {
    expect(fs::exists(dir / "an_uni" / f), std::string("an_uni file: ") + f,
           __LINE__);
  }
  EXPECT(!fs::exists(dir / "an_uni/sentence0_r2l_output.csv"));
  EXPECT_EQ(run("analyze --checkpoint-q " + at("model/query.ckpt") +
                " --dict " + at("model/dict.tsv") + " --sentence \"" + query0 +
                "\" --out " + at("an_kw_uni") + " --keywords"),
            2);

  EXPECT_EQ(run("analyze --checkpoint-q " + at("model_bidi/query.ckpt") +
                " --dict " + at("model_bidi/dict.tsv") + " --input " +
                at("sents.txt") + " --out " + at("an_bidi") +
                " --keywords --topics --top-k 3 --top-m 2"),
            0);
  for (const char* f :
       {"sentence0_l2r_output.csv", "sentence0_r2l_output.csv",
        "sentence0_keywords.json", "sentence1_keywords.json",
        "sentence2_keywords.json", "topic_cells.json"}) {
    expect(fs::exists(dir / "an_bidi" / f), std::string("an_bidi file: ") + f,
           __LINE__);
  }
  // RNN checkpoints expose only output grids.
  EXPECT_EQ(run("analyze --checkpoint-q " + at("model_rnn/query.ckpt") +
                " --dict " + at("model_rnn/dict.tsv") + " --sentence \"" +
                query0 + "\" --out " + at("an_rnn")),
            0);
  EXPECT(fs::exists(dir / "an_rnn/sentence0_l2r_output.csv"));
  EXPECT(!fs::exists(dir / "an_rnn/sentence0_l2r_input_gate.csv"));
  EXPECT_EQ(run("analyze --checkpoint-q " + at("model/query.ckpt") +
                " --dict " + at("model/dict.tsv") + " --out " + at("an_none")),
            2);  // no sentence given

  if (failures == 0) {
    std::printf("test_cli: all checks passed\n");
    return 0;
  }
  std::fprintf(stderr, "test_cli: %d check(s) failed\n", failures);
  return 1;
}
