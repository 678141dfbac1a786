#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "lexvar/cli.hpp"
#include "lexvar/io.hpp"
#include "lexvar/synth.hpp"
#include "oracles.hpp"

using namespace lexvar;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "lexvar");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv(const fs::path& p) { return io::read_csv(p); }

fs::path text_corpus(const std::string& name) {
  auto dir = oracle::temp_dir(name);
  io::write_file(dir / "a.txt", "Мама мыла раму. Рама была чистой.");
  io::write_file(dir / "b.txt", "Кот спал на раме, мама спала.");
  io::write_file(dir / "c.txt", "Всё её, а раму мыла мама.");
  return dir;
}

std::string spec_file(const fs::path& dir, const GeneratorSpec& spec) {
  fs::create_directories(dir);
  io::write_file(dir / "spec.json", to_json(spec).dump());
  return (dir / "spec.json").string();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = oracle::slurp(e.path());
  return files;
}

}  // namespace

TEST(Cli, IngestThreeFiles) {
  auto in = text_corpus("cli_ingest_in");
  auto out = oracle::temp_dir("cli_ingest_out");
  auto r = run({"ingest", in.string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("B=3"), std::string::npos);
  for (const char* f : {"matrix.mtx", "vocab.csv", "docs.csv", "run.json"}) EXPECT_TRUE(fs::exists(out / f)) << f;
  auto header = nlohmann::json::parse(oracle::slurp(out / "run.json"));
  EXPECT_EQ(header["command"], "ingest");
  EXPECT_EQ(header["config_hash"].get<std::string>().size(), 16u);
}

TEST(Cli, EmptyDirectoryWarns) {
  auto in = oracle::temp_dir("cli_empty_in");
  auto out = oracle::temp_dir("cli_empty_out");
  auto r = run({"ingest", in.string(), "-o", out.string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("B=0"), std::string::npos);
  EXPECT_NE(r.out.find("warning"), std::string::npos);
}

TEST(Cli, DuplicateManifestIdFails) {
  auto dir = oracle::temp_dir("cli_dup");
  io::write_file(dir / "x.txt", "слово");
  io::write_file(dir / "list.tsv", "twin\tx.txt\ntwin\tx.txt\n");
  auto r = run({"ingest", (dir / "list.tsv").string(), "-o", (dir / "out").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("twin"), std::string::npos);
}

TEST(Cli, EncodingErrorNamesFile) {
  auto dir = oracle::temp_dir("cli_enc");
  io::write_file(dir / "bad.txt", "ok \xFF");
  auto r = run({"ingest", dir.string(), "-o", (dir / "out").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bad.txt"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_NE(run({}).code, 0);
  EXPECT_NE(run({"stats"}).code, 0);
  EXPECT_NE(run({"frobnicate"}).code, 0);
  EXPECT_NE(run({"stats", "/nonexistent/path"}).code, 0);
}

TEST(Cli, StatsFilesMatchVocabulary) {
  auto in = text_corpus("cli_stats_in");
  auto out = oracle::temp_dir("cli_stats_out");
  auto r = run({"stats", in.string(), "-o", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto words = csv(out / "moments.csv");
  auto corpus = build_corpus(scan_directory(in));
  EXPECT_EQ(words.size(), corpus.num_words() + 1);
  EXPECT_EQ(words[0], (std::vector<std::string>{"word", "rank", "p_hat", "mean", "var", "norm_var", "y"}));
  EXPECT_EQ(csv(out / "normvar.csv").size(), corpus.num_words() + 1);
  auto fit = csv(out / "fit.csv");
  ASSERT_EQ(fit.size(), 2u);
  EXPECT_EQ(fit[0], (std::vector<std::string>{"a", "kappa", "stderr", "r2", "n_points"}));
  EXPECT_EQ(words[1][1], "1");
}

TEST(Cli, StatsRecoversPlantedExponent) {
  // every word sits in exactly one document, so var = (B - 1) mean^2
  auto dir = oracle::temp_dir("cli_planted");
  for (int d = 0; d < 4; ++d) {
    std::string text;
    for (int w = 0; w < 3; ++w) {
      const std::string word = std::string("слово") + static_cast<char>('a' + d) + static_cast<char>('a' + w);
      for (int k = 0; k < (w + 1) * (d + 1); ++k) text += word + " ";
    }
    io::write_file(dir / ("d" + std::to_string(d) + ".txt"), text);
  }
  auto r = run({"stats", dir.string(), "-o", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto fit = csv(dir / "out" / "fit.csv");
  EXPECT_NEAR(io::parse_double(fit[1][1]), 2.0, 1e-10);
  EXPECT_NEAR(io::parse_double(fit[1][0]), 3.0, 1e-9);
}

TEST(Cli, StatsOnIidSimulationNearOne) {
  GeneratorSpec spec;
  spec.documents = 300;
  spec.min_length = spec.max_length = 2000;
  spec.seed = 4;
  spec.word_probs = Simplex(20, 0.05);
  auto dir = oracle::temp_dir("cli_iid");
  ASSERT_EQ(run({"simulate", "--spec", spec_file(dir, spec), "--counts-only", "-o", (dir / "corpus").string()}).code, 0);
  auto r = run({"stats", (dir / "corpus").string(), "-o", (dir / "stats").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = csv(dir / "stats" / "normvar.csv");
  ASSERT_EQ(rows.size(), 21u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double v = io::parse_double(rows[i][2]);
    EXPECT_GT(v, 0.7);
    EXPECT_LT(v, 1.3);
  }
}

TEST(Cli, LsaRankOneHasSingleValue) {
  auto dir = oracle::temp_dir("cli_lsa");
  for (int d = 0; d < 12; ++d) {
    std::string text;
    for (int rep = 0; rep <= d; ++rep) text += "альфа альфа бета гамма гамма гамма ";
    io::write_file(dir / ("t" + std::to_string(d) + ".txt"), text);
  }
  auto r = run({"lsa", dir.string(), "-o", (dir / "out").string(), "--rank", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto spec = csv(dir / "out" / "spectrum.csv");
  ASSERT_EQ(spec.size(), 4u);
  EXPECT_EQ(spec[0], (std::vector<std::string>{"k", "theta_k", "eigenvalue"}));
  const double t1 = io::parse_double(spec[1][1]);
  EXPECT_GT(t1, 0.0);
  for (std::size_t k = 2; k < spec.size(); ++k) EXPECT_LT(io::parse_double(spec[k][1]), 1e-6 * t1);
  EXPECT_EQ(csv(dir / "out" / "factors.csv")[0].size(), 2u);
  EXPECT_EQ(csv(dir / "out" / "bookfactors.csv").size(), 13u);
}

TEST(Cli, PlsaWritesModel) {
  auto in = text_corpus("cli_plsa_in");
  auto out = oracle::temp_dir("cli_plsa_out");
  auto r = run({"plsa", in.string(), "-o", out.string(), "--topics", "2", "--seed", "3", "--max-iters", "50"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto header = nlohmann::json::parse(oracle::slurp(out / "model.json"));
  EXPECT_EQ(header["topics"], 2);
  EXPECT_EQ(header["seed"], 3);
  EXPECT_TRUE(fs::exists(out / "word_given_topic.csv"));
}

TEST(Cli, LdaReportsPlantedMarkers) {
  GeneratorSpec spec;
  spec.mode = GeneratorMode::lda;
  spec.documents = 2000;
  spec.min_length = spec.max_length = 500;
  spec.seed = 11;
  spec.alpha = {0.1, 0.1, 0.1, 0.1, 0.01};
  spec.topics.assign(5, Simplex(200, 0.0));
  for (int z = 0; z < 4; ++z)
    for (int w = 0; w < 49; ++w) spec.topics[z][3 + z * 49 + w] = 1.0 / 49;
  for (int w = 0; w < 3; ++w) spec.topics[4][w] = 1.0 / 3;
  auto dir = oracle::temp_dir("cli_lda");
  ASSERT_EQ(run({"simulate", "--spec", spec_file(dir, spec), "--counts-only", "-o", (dir / "corpus").string()}).code, 0);
  auto r = run({"lda", (dir / "corpus").string(), "-o", (dir / "fit").string(), "--topics", "5", "--top-words", "200",
                "--seed", "5", "--report-words", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = csv(dir / "fit" / "rare_topics.csv");
  ASSERT_EQ(rows.size(), 16u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"topic", "alpha", "word", "beta", "corpus_mean", "marker_strength"}));
  std::set<std::string> lead{rows[1][2], rows[2][2], rows[3][2]};
  EXPECT_EQ(lead, (std::set<std::string>{"wa", "wb", "wc"}));
}

TEST(Cli, RerunsAreByteIdentical) {
  auto in = text_corpus("cli_rerun_in");
  GeneratorSpec spec;
  spec.mode = GeneratorMode::lda;
  spec.documents = 30;
  spec.min_length = 20;
  spec.max_length = 60;
  spec.seed = 8;
  spec.alpha = {0.5, 0.05};
  spec.topics = {{0.5, 0.3, 0.2, 0.0}, {0.0, 0.1, 0.2, 0.7}};
  auto base = oracle::temp_dir("cli_rerun");
  const auto spec_path = spec_file(base / "spec", spec);
  const std::vector<std::vector<std::string>> commands{
      {"ingest", in.string()},
      {"stats", in.string(), "--top-words", "5"},
      {"lsa", in.string(), "--rank", "3"},
      {"plsa", in.string(), "--topics", "2", "--seed", "4"},
      {"lda", in.string(), "--topics", "2", "--seed", "4", "--max-iters", "40"},
      {"simulate", "--spec", spec_path},
      {"calibrate", "--documents", "50", "--length", "200", "--vocabulary", "10", "--null-only"}};
  for (const auto& cmd : commands) {
    std::map<std::string, std::string> first;
    for (int rep = 0; rep < 2; ++rep) {
      auto out = base / (cmd[0] + std::to_string(rep));
      auto args = cmd;
      args.push_back("-o");
      args.push_back(out.string());
      auto r = run(args);
      ASSERT_EQ(r.code, 0) << cmd[0] << ": " << r.err;
      auto files = snapshot(out);
      if (rep == 0) first = files;
      else EXPECT_EQ(files, first) << cmd[0];
    }
  }
}
