#pragma once

// Command implementations behind the lexvar executable. Each command reads
// its inputs, writes CSV/JSON artifacts into the output directory, and
// records a run.json with the resolved configuration.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lexvar/corpus.hpp"
#include "lexvar/error.hpp"
#include "lexvar/io.hpp"
#include "lexvar/lda.hpp"
#include "lexvar/lsa.hpp"
#include "lexvar/matrix.hpp"
#include "lexvar/plsa.hpp"
#include "lexvar/synth.hpp"
#include "lexvar/varstats.hpp"

#ifndef LEXVAR_VERSION
#define LEXVAR_VERSION "0.0.0"
#endif

namespace lexvar::cli {

namespace fs = std::filesystem;

struct RunConfig {
  std::string command;
  std::vector<std::string> inputs;
  std::string out = "out";
  /// 0 selects the command's default
  std::size_t top_words = 0;
  double kappa = kDefaultKappa;
  std::size_t topics = 0;
  std::size_t rank = 10;
  std::uint64_t seed = 1;
  std::optional<double> tol;
  std::optional<std::size_t> max_iters;
  std::size_t report_words = 10;
  std::size_t restarts = 3;
  // simulate
  std::string spec;
  bool counts_only = false;
  // calibrate
  std::size_t documents = 1000;
  std::size_t length = 10000;
  std::size_t vocabulary = 100;
  bool null_only = false;
};

inline std::size_t default_top_words(const std::string& command) {
  if (command == "stats") return 1000;
  if (command == "lsa") return 500;
  if (command == "plsa") return 100;
  if (command == "lda") return 1000;
  return 0;
}

inline std::size_t default_topics(const std::string& command) {
  if (command == "plsa") return 10;
  if (command == "lda") return 50;
  return 0;
}

/// Only the fields that affect a command's output go into its config.
inline nlohmann::ordered_json config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["inputs"] = c.inputs;
  const auto& cmd = c.command;
  if (cmd == "stats" || cmd == "lsa" || cmd == "plsa" || cmd == "lda") j["top_words"] = c.top_words;
  if (cmd == "stats") j["kappa"] = c.kappa;
  if (cmd == "lsa") j["rank"] = c.rank;
  if (cmd == "plsa" || cmd == "lda") {
    j["topics"] = c.topics;
    j["seed"] = c.seed;
    j["tol"] = c.tol ? nlohmann::ordered_json(*c.tol) : nlohmann::ordered_json(nullptr);
    j["max_iters"] = c.max_iters ? nlohmann::ordered_json(*c.max_iters) : nlohmann::ordered_json(nullptr);
  }
  if (cmd == "lda") {
    j["report_words"] = c.report_words;
    j["restarts"] = c.restarts;
  }
  if (cmd == "simulate") {
    j["spec"] = c.spec;
    j["counts_only"] = c.counts_only;
  }
  if (cmd == "calibrate") {
    j["seed"] = c.seed;
    j["documents"] = c.documents;
    j["length"] = c.length;
    j["vocabulary"] = c.vocabulary;
    j["null_only"] = c.null_only;
  }
  return j;
}

inline void write_run_header(const RunConfig& c) {
  nlohmann::ordered_json j;
  const auto config = config_json(c);
  j["command"] = c.command;
  j["version"] = LEXVAR_VERSION;
  j["config"] = config;
  j["config_hash"] = io::hex64(io::fnv1a(c.command + "\n" + config.dump()));
  io::write_file(fs::path(c.out) / "run.json", j.dump(2) + "\n");
}

/// Sources from a directory of text files or a manifest file.
inline std::vector<Source> collect_sources(const std::vector<std::string>& inputs) {
  std::vector<Source> all;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (!fs::exists(p)) throw Error("input not found: " + in);
    auto part = fs::is_directory(p) ? scan_directory(p) : read_manifest(p);
    for (auto& s : part) all.push_back(std::move(s));
  }
  return all;
}

/// A corpus artifact directory (holding matrix.mtx) is read directly;
/// anything else is ingested on the fly.
inline TermDocMatrix load_matrix(const std::vector<std::string>& inputs) {
  if (inputs.empty()) throw Error("no input given");
  if (inputs.size() == 1 && fs::is_directory(inputs[0]) && fs::exists(fs::path(inputs[0]) / "matrix.mtx"))
    return read_matrix(inputs[0]);
  const auto sources = collect_sources(inputs);
  return count_matrix(build_corpus(sources));
}

inline std::size_t clamp_top(std::size_t requested, const TermDocMatrix& m, std::ostream& log) {
  if (requested > m.num_words()) {
    log << "note: top-words " << requested << " exceeds vocabulary size " << m.num_words() << "; using "
        << m.num_words() << "\n";
    return m.num_words();
  }
  return requested;
}

inline void cmd_ingest(const RunConfig& c, std::ostream& log) {
  const auto sources = collect_sources(c.inputs);
  const Corpus corpus = build_corpus(sources);
  const TermDocMatrix m = count_matrix(corpus);
  write_matrix(m, c.out);
  write_run_header(c);
  if (corpus.num_documents() == 0) log << "warning: no documents found\n";
  log << "B=" << m.num_documents() << " N=" << m.num_words() << " T=" << m.total_tokens() << "\n";
}

inline void cmd_stats(const RunConfig& c, std::ostream& log) {
  const TermDocMatrix m = load_matrix(c.inputs);
  const auto table = cross_text_moments(m, c.kappa);
  const std::size_t top = clamp_top(c.top_words, m, log);
  const auto fit = fit_power_law(table, WordSelection::top(top));
  const auto ex = derived_exponents(fit.exponent);
  fs::create_directories(c.out);

  io::CsvWriter moments(fs::path(c.out) / "moments.csv");
  moments.row("word", "rank", "p_hat", "mean", "var", "norm_var", "y");
  for (WordId w : table.by_rank())
    moments.row(table.words[w], table.rank[w], table.p_hat[w], table.mean[w], table.var[w], table.norm_var[w], table.y[w]);
  moments.close();

  io::CsvWriter normvar(fs::path(c.out) / "normvar.csv");
  normvar.row("word", "mean", "norm_var");
  for (WordId w : table.by_rank()) normvar.row(table.words[w], table.mean[w], table.norm_var[w]);
  normvar.close();

  io::CsvWriter f(fs::path(c.out) / "fit.csv");
  f.row("a", "kappa", "stderr", "r2", "n_points");
  f.row(fit.amplitude, fit.exponent, fit.stderr_exponent, fit.r_squared, fit.n_points);
  f.close();

  io::CsvWriter vol(fs::path(c.out) / "volatility.csv");
  vol.row("sigma_exponent", "ratio_exponent", "n_excluded", "top_words", "documents");
  vol.row(ex.sigma_exponent, ex.ratio_exponent, fit.n_excluded, top, table.documents_used);
  vol.close();
  write_run_header(c);
  log << "kappa=" << io::format_double(fit.exponent) << " over " << fit.n_points << " words\n";
}

inline void cmd_lsa(const RunConfig& c, std::ostream& log) {
  const TermDocMatrix full = load_matrix(c.inputs);
  const auto r = restrict_top(full, clamp_top(c.top_words, full, log));
  const SparseReal x = frequency_matrix(r.matrix);
  const std::size_t max_rank = std::min<std::size_t>(x.rows(), x.cols());
  const auto fd = truncated_svd(x, std::min(c.rank, max_rank), true);
  const std::size_t rank = fd.rank();
  if (rank < c.rank) log << "note: numerical rank is " << rank << "\n";
  fs::create_directories(c.out);

  io::CsvWriter spec(fs::path(c.out) / "spectrum.csv");
  spec.row("k", "theta_k", "eigenvalue");
  for (Eigen::Index k = 0; k < fd.gram_eigenvalues.size(); ++k)
    spec.row(k + 1, std::sqrt(fd.gram_eigenvalues[k]), fd.gram_eigenvalues[k]);
  spec.close();

  io::CsvWriter wf(fs::path(c.out) / "factors.csv");
  wf.field("word");
  for (std::size_t k = 0; k < rank; ++k) wf.field("f_" + std::to_string(k + 1));
  wf.end_row();
  for (Eigen::Index w = 0; w < fd.word_factors.rows(); ++w) {
    wf.field(r.matrix.words()[static_cast<std::size_t>(w)]);
    for (Eigen::Index k = 0; k < fd.word_factors.cols(); ++k) wf.field(fd.word_factors(w, k));
    wf.end_row();
  }
  wf.close();

  io::CsvWriter bf(fs::path(c.out) / "bookfactors.csv");
  bf.field("doc");
  for (std::size_t k = 0; k < rank; ++k) bf.field("v_" + std::to_string(k + 1));
  bf.end_row();
  for (Eigen::Index d = 0; d < fd.book_factors.rows(); ++d) {
    bf.field(r.matrix.doc_ids()[static_cast<std::size_t>(d)]);
    for (Eigen::Index k = 0; k < fd.book_factors.cols(); ++k) bf.field(fd.book_factors(d, k));
    bf.end_row();
  }
  bf.close();

  io::CsvWriter summary(fs::path(c.out) / "outliers.csv");
  summary.row("outliers", "bulk_edge", "bulk_median", "bulk_iqr", "c", "bulk_fraction", "f1_all_positive",
              "f1_cosine_to_mean");
  const auto lead = leading_vector_positivity(fd, x);
  if (fd.gram_eigenvalues.size() >= 10) {
    std::vector<double> ev(fd.gram_eigenvalues.data(), fd.gram_eigenvalues.data() + fd.gram_eigenvalues.size());
    const auto rep = count_outliers(ev);
    summary.row(rep.count, rep.bulk_edge, rep.bulk_median, rep.bulk_iqr, rep.policy.c, rep.policy.bulk_fraction,
                lead.all_positive ? 1 : 0, lead.cosine_to_mean);
    log << "outliers=" << rep.count << "\n";
  } else {
    summary.row("", "", "", "", "", "", lead.all_positive ? 1 : 0, lead.cosine_to_mean);
    log << "note: fewer than 10 eigenvalues; outlier count skipped\n";
  }
  summary.close();
  write_run_header(c);
  log << "theta_1=" << io::format_double(fd.thetas[0]) << "\n";
}

inline void cmd_plsa(const RunConfig& c, std::ostream& log) {
  const TermDocMatrix full = load_matrix(c.inputs);
  const auto r = restrict_top(full, clamp_top(c.top_words, full, log));
  PlsaOptions opts;
  if (c.tol) opts.rel_tol = *c.tol;
  if (c.max_iters) opts.max_iters = *c.max_iters;
  const auto model = plsa_em(r.matrix, c.topics, c.seed, opts);
  write_plsa_model(model, r.matrix, c.out);
  write_run_header(c);
  for (const auto& w : model.warnings) log << "warning: " << w << "\n";
  log << "iterations=" << model.iterations << " loglik=" << io::format_double(model.loglik_trace.back())
      << (model.converged ? "" : " (not converged)") << "\n";
}

inline void cmd_lda(const RunConfig& c, std::ostream& log) {
  const TermDocMatrix full = load_matrix(c.inputs);
  const auto r = restrict_top(full, clamp_top(c.top_words, full, log));
  LdaOptions opts;
  if (c.tol) opts.rel_tol = *c.tol;
  if (c.max_iters) opts.max_iters = *c.max_iters;
  opts.restarts = c.restarts;
  const auto model = lda_fit(r.matrix, c.topics, c.seed, opts);
  write_lda_model(model, r.matrix.words(), r.matrix.doc_ids(), c.out);

  const auto table = cross_text_moments(full);
  std::vector<double> corpus_mean(r.kept.size());
  for (std::size_t i = 0; i < r.kept.size(); ++i) corpus_mean[i] = table.mean[r.kept[i]];
  write_rare_topic_report(rare_topic_report(model, corpus_mean, c.report_words), r.matrix.words(),
                          fs::path(c.out) / "rare_topics.csv");
  write_run_header(c);
  for (const auto& w : model.warnings) log << "warning: " << w << "\n";
  log << "iterations=" << model.iterations << " elbo=" << io::format_double(model.elbo_trace.back())
      << (model.converged ? "" : " (not converged)") << "\n";
}

inline void cmd_simulate(const RunConfig& c, std::ostream& log) {
  if (c.spec.empty()) throw Error("simulate needs --spec");
  const auto spec = read_generator_spec(c.spec);
  if (c.counts_only) {
    const auto gen = generate_counts(spec);
    write_generated(spec, gen, c.out);
    log << "B=" << gen.matrix.num_documents() << " N=" << gen.matrix.num_words() << " T=" << gen.matrix.total_tokens()
        << "\n";
  } else {
    const auto gen = generate(spec);
    write_generated(spec, gen, c.out);
    write_matrix(count_matrix(gen.corpus), c.out);
    log << "B=" << gen.corpus.num_documents() << " N=" << gen.corpus.num_words()
        << " T=" << gen.corpus.total_tokens() << "\n";
  }
  write_run_header(c);
}

inline void cmd_calibrate(const RunConfig& c, std::ostream& log) {
  fs::create_directories(c.out);
  const Simplex p(c.vocabulary, 1.0 / static_cast<double>(c.vocabulary));
  const auto null = null_calibration_experiment(p, c.documents, c.length, c.seed);
  {
    io::CsvWriter v(fs::path(c.out) / "null_normvar.csv");
    v.row("word", "norm_var");
    for (std::size_t i = 0; i < null.values.size(); ++i) v.row(synthetic_word(i), null.values[i]);
    v.close();
    io::CsvWriter s(fs::path(c.out) / "null_summary.csv");
    s.row("documents", "length", "vocabulary", "mean", "sd", "q05", "q25", "q50", "q75", "q95", "fraction_0.8_1.2");
    s.row(c.documents, c.length, c.vocabulary, null.mean, null.sd, null.q05, null.q25, null.q50, null.q75, null.q95,
          null.fraction_near_one);
    s.close();
  }
  log << "null: mean V=" << io::format_double(null.mean) << "\n";

  if (!c.null_only) {
    const auto results = powerlaw_emergence_experiment(default_emergence_sweep(c.seed));
    io::CsvWriter pts(fs::path(c.out) / "emergence_points.csv");
    pts.row("regime", "word", "mean", "var", "expected_mean", "expected_var");
    io::CsvWriter fits(fs::path(c.out) / "emergence_fit.csv");
    fits.row("regime", "kappa", "stderr_kappa", "r_squared", "theory_kappa", "target_kappa", "n_points");
    for (const auto& r : results) {
      for (std::size_t i = 0; i < r.fit_words.size(); ++i)
        pts.row(r.name, synthetic_word(r.fit_words[i]), r.mean[i], r.var[i], r.expected_mean[i], r.expected_var[i]);
      fits.row(r.name, r.fit.exponent, r.fit.stderr_exponent, r.fit.r_squared, r.theory_kappa, r.target_kappa,
               r.fit.n_points);
      log << r.name << ": kappa=" << io::format_double(r.fit.exponent)
          << " theory=" << io::format_double(r.theory_kappa) << "\n";
    }
    pts.close();
    fits.close();
  }
  write_run_header(c);
}

inline void dispatch(RunConfig c, std::ostream& log) {
  if (c.top_words == 0) c.top_words = default_top_words(c.command);
  if (c.topics == 0) c.topics = default_topics(c.command);
  if (c.command == "ingest") return cmd_ingest(c, log);
  if (c.command == "stats") return cmd_stats(c, log);
  if (c.command == "lsa") return cmd_lsa(c, log);
  if (c.command == "plsa") return cmd_plsa(c, log);
  if (c.command == "lda") return cmd_lda(c, log);
  if (c.command == "simulate") return cmd_simulate(c, log);
  if (c.command == "calibrate") return cmd_calibrate(c, log);
  throw Error("unknown command '" + c.command + "'");
}

/// Parses argv and runs one command. Returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Word-frequency variation statistics and latent factor models"};
  app.set_version_flag("--version", std::string(LEXVAR_VERSION));
  app.require_subcommand(1);
  RunConfig c;

  auto add_common = [&](CLI::App* sub, bool needs_input) {
    auto* opt = sub->add_option("inputs", c.inputs, "corpus artifact directory, text directory, or manifest");
    if (needs_input) opt->required();
    sub->add_option("-o,--out", c.out, "output directory")->capture_default_str();
  };
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--top-words", c.top_words, "restrict to the most frequent words");
    sub->add_option("--topics", c.topics, "number of topics");
    sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
    sub->add_option("--tol", c.tol, "relative convergence tolerance");
    sub->add_option("--max-iters", c.max_iters, "iteration cap");
  };

  auto* ingest = app.add_subcommand("ingest", "tokenize texts and write the count matrix");
  add_common(ingest, true);
  auto* stats = app.add_subcommand("stats", "per-word moments, normalized variance, power-law fit");
  add_common(stats, true);
  stats->add_option("--top-words", c.top_words, "words entering the fit, by mean frequency");
  stats->add_option("--kappa", c.kappa, "exponent for y = var / mean^kappa")->capture_default_str();
  auto* lsa = app.add_subcommand("lsa", "truncated SVD and eigenvalue spectrum");
  add_common(lsa, true);
  lsa->add_option("--top-words", c.top_words, "restrict to the most frequent words");
  lsa->add_option("--rank", c.rank, "number of factors")->capture_default_str();
  auto* plsa = app.add_subcommand("plsa", "pLSA fitted by EM");
  add_common(plsa, true);
  add_model(plsa);
  auto* lda = app.add_subcommand("lda", "LDA fitted by variational EM");
  add_common(lda, true);
  add_model(lda);
  lda->add_option("--report-words", c.report_words, "words per topic in rare_topics.csv")->capture_default_str();
  lda->add_option("--restarts", c.restarts, "independent starts; the best bound is kept")->capture_default_str();
  auto* sim = app.add_subcommand("simulate", "generate a synthetic corpus from a JSON spec");
  sim->add_option("-o,--out", c.out, "output directory")->capture_default_str();
  sim->add_option("--spec", c.spec, "generator spec (JSON)")->required();
  sim->add_flag("--counts-only", c.counts_only, "write only the count matrix");
  auto* cal = app.add_subcommand("calibrate", "null calibration and power-law emergence experiments");
  cal->add_option("-o,--out", c.out, "output directory")->capture_default_str();
  cal->add_option("--seed", c.seed, "random seed")->capture_default_str();
  cal->add_option("--documents", c.documents, "documents in the null corpus")->capture_default_str();
  cal->add_option("--length", c.length, "tokens per null document")->capture_default_str();
  cal->add_option("--vocabulary", c.vocabulary, "words in the null corpus")->capture_default_str();
  cal->add_flag("--null-only", c.null_only, "skip the emergence sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  c.command = app.get_subcommands().front()->get_name();
  try {
    dispatch(c, out);
  } catch (const IngestError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace lexvar::cli
