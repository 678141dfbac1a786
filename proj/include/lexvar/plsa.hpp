#pragma once

// Probabilistic latent semantic analysis: P(w|b) = sum_z P(w|z) P(z|b),
// fitted by expectation-maximization on the count matrix.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "lexvar/error.hpp"
#include "lexvar/io.hpp"
#include "lexvar/matrix.hpp"
#include "lexvar/parallel.hpp"

namespace lexvar {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct PlsaModel {
  RowMatrix word_given_topic;  // s x N, rows sum to 1
  RowMatrix topic_given_doc;   // B x s, rows sum to 1
  std::vector<double> loglik_trace;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  bool converged = false;
  std::vector<std::string> warnings;

  std::size_t topics() const noexcept { return static_cast<std::size_t>(word_given_topic.rows()); }
  std::size_t num_words() const noexcept { return static_cast<std::size_t>(word_given_topic.cols()); }
  std::size_t num_documents() const noexcept { return static_cast<std::size_t>(topic_given_doc.rows()); }
};

struct PlsaOptions {
  std::size_t max_iters = 2000;
  /// stop once (L_new - L_old) < rel_tol * |L_old|
  double rel_tol = 1e-9;
  /// additive floor on expected word counts before normalizing P(w|z); 0 = pure MLE
  double epsilon_floor = 0.0;
};

namespace detail {

inline void check_dims(const TermDocMatrix& counts, const PlsaModel& model) {
  if (model.num_words() != counts.num_words() || model.num_documents() != counts.num_documents() ||
      static_cast<std::size_t>(model.topic_given_doc.cols()) != model.topics())
    throw Error("pLSA model dimensions do not match the count matrix");
}

template <typename Rng>
RowMatrix random_stochastic_rows(std::size_t rows, std::size_t cols, Rng& rng) {
  // uniform Dirichlet: normalized unit exponentials
  std::exponential_distribution<double> exp1(1.0);
  RowMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    double sum = 0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) sum += (m(r, c) = exp1(rng));
    m.row(r) /= sum;
  }
  return m;
}

}  // namespace detail

/// L = sum over observed cells of n(w,b) log P(w|b). Throws if an observed
/// cell has zero probability under the model.
inline double plsa_loglik(const TermDocMatrix& counts, const PlsaModel& model) {
  detail::check_dims(counts, model);
  const std::size_t s = model.topics();
  std::vector<double> partial(counts.num_documents(), 0.0);
  parallel_for(counts.num_documents(), [&](std::size_t d) {
    double acc = 0;
    for (const auto& e : counts.column(d)) {
      double p = 0;
      for (std::size_t z = 0; z < s; ++z) p += model.word_given_topic(z, e.word) * model.topic_given_doc(d, z);
      if (!(p > 0))
        throw Error("pLSA log-likelihood: observed cell (" + counts.words()[e.word] + ", " + counts.doc_ids()[d] +
                    ") has zero probability");
      acc += static_cast<double>(e.count) * std::log(p);
    }
    partial[d] = acc;
  });
  double total = 0;
  for (double v : partial) total += v;
  return total;
}

/// Random row-stochastic starting point from a seeded uniform Dirichlet.
inline PlsaModel plsa_random_init(const TermDocMatrix& counts, std::size_t topics, std::uint64_t seed) {
  if (topics < 1) throw Error("pLSA needs at least one topic");
  std::mt19937_64 rng(seed);
  PlsaModel m;
  m.seed = seed;
  m.word_given_topic = detail::random_stochastic_rows(topics, counts.num_words(), rng);
  m.topic_given_doc = detail::random_stochastic_rows(counts.num_documents(), topics, rng);
  return m;
}

/// One EM update. The E-step posterior P(z|b,w) is never stored: the
/// document side is accumulated per column and the word side per row, each
/// in a fixed order, so the result does not depend on the thread count.
inline PlsaModel plsa_em_step(const TermDocMatrix& counts, const PlsaModel& model, double epsilon_floor = 0.0) {
  detail::check_dims(counts, model);
  const std::size_t s = model.topics();
  const std::size_t n = counts.num_words();
  const auto& pwz = model.word_given_topic;
  const auto& pzb = model.topic_given_doc;

  PlsaModel next;
  next.seed = model.seed;
  next.word_given_topic = RowMatrix::Zero(s, n);
  next.topic_given_doc = pzb;

  parallel_for(counts.num_documents(), [&](std::size_t d) {
    auto col = counts.column(d);
    if (col.empty()) return;
    std::vector<double> acc(s, 0.0);
    for (const auto& e : col) {
      double denom = 0;
      for (std::size_t z = 0; z < s; ++z) denom += pwz(z, e.word) * pzb(d, z);
      if (!(denom > 0)) throw Error("pLSA E-step: observed cell has zero probability");
      const double r = static_cast<double>(e.count) / denom;
      for (std::size_t z = 0; z < s; ++z) acc[z] += r * pwz(z, e.word);
    }
    double total = 0;
    for (std::size_t z = 0; z < s; ++z) total += (acc[z] *= pzb(d, z));
    for (std::size_t z = 0; z < s; ++z) next.topic_given_doc(d, z) = acc[z] / total;
  });

  RowMatrix expected = RowMatrix::Zero(s, n);
  parallel_for(n, [&](std::size_t w) {
    for (const auto& e : counts.row(w)) {
      double denom = 0;
      for (std::size_t z = 0; z < s; ++z) denom += pwz(z, w) * pzb(e.doc, z);
      const double r = static_cast<double>(e.count) / denom;
      for (std::size_t z = 0; z < s; ++z) expected(z, w) += r * pzb(e.doc, z);
    }
    for (std::size_t z = 0; z < s; ++z) expected(z, w) *= pwz(z, w);
  });

  for (std::size_t z = 0; z < s; ++z) {
    double total = 0;
    for (std::size_t w = 0; w < n; ++w) total += (expected(z, w) += epsilon_floor);
    if (total > 0) {
      next.word_given_topic.row(z) = expected.row(z) / total;
    } else {
      next.word_given_topic.row(z) = pwz.row(z);
      next.warnings.push_back("topic " + std::to_string(z) + " received no mass; kept previous P(w|z)");
    }
  }
  return next;
}

/// Runs EM from `init` until the relative log-likelihood gain drops below
/// options.rel_tol or options.max_iters updates have been applied.
/// loglik_trace[0] is the starting value; the last entry belongs to the
/// returned parameters.
inline PlsaModel plsa_em(const TermDocMatrix& counts, PlsaModel init, const PlsaOptions& options = {}) {
  detail::check_dims(counts, init);
  if (counts.nonzeros() == 0) throw Error("pLSA: count matrix is empty");
  std::size_t distinct = 0;
  for (std::size_t w = 0; w < counts.num_words(); ++w) distinct += counts.word_totals()[w] > 0;

  const std::size_t topics = init.topics();
  PlsaModel model = std::move(init);
  std::vector<std::string> warnings = std::move(model.warnings);
  if (topics > distinct)
    warnings.push_back("more topics than distinct observed words; degenerate topics are possible");
  model.loglik_trace.clear();
  model.iterations = 0;
  model.converged = false;

  double current = plsa_loglik(counts, model);
  std::vector<double> trace{current};
  std::size_t iters = 0;
  bool converged = false;
  while (iters < options.max_iters) {
    PlsaModel next = plsa_em_step(counts, model, options.epsilon_floor);
    for (auto& w : next.warnings) warnings.push_back("iteration " + std::to_string(iters + 1) + ": " + w);
    next.warnings.clear();
    const double value = plsa_loglik(counts, next);
    ++iters;
    trace.push_back(value);
    const double gain = value - current;
    model = std::move(next);
    current = value;
    if (gain < options.rel_tol * std::abs(trace[trace.size() - 2])) {
      converged = true;
      break;
    }
  }
  model.loglik_trace = std::move(trace);
  model.iterations = iters;
  model.converged = converged;
  model.warnings = std::move(warnings);
  return model;
}

inline PlsaModel plsa_em(const TermDocMatrix& counts, std::size_t topics, std::uint64_t seed,
                         const PlsaOptions& options = {}) {
  return plsa_em(counts, plsa_random_init(counts, topics, seed), options);
}

// Serialization: model.json header plus two CSV matrices.

inline void write_plsa_model(const PlsaModel& m, const TermDocMatrix& counts, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::size_t s = m.topics();
  nlohmann::ordered_json header;
  header["model"] = "plsa";
  header["topics"] = s;
  header["words"] = m.num_words();
  header["documents"] = m.num_documents();
  header["seed"] = m.seed;
  header["iterations"] = m.iterations;
  header["converged"] = m.converged;
  header["final_loglik"] = m.loglik_trace.empty() ? 0.0 : m.loglik_trace.back();
  header["loglik_trace"] = m.loglik_trace;
  header["warnings"] = m.warnings;
  io::write_file(dir / "model.json", header.dump(2) + "\n");

  io::CsvWriter wz(dir / "word_given_topic.csv");
  wz.field("word");
  for (std::size_t z = 0; z < s; ++z) wz.field("topic_" + std::to_string(z + 1));
  wz.end_row();
  for (std::size_t w = 0; w < m.num_words(); ++w) {
    wz.field(counts.words()[w]);
    for (std::size_t z = 0; z < s; ++z) wz.field(m.word_given_topic(z, w));
    wz.end_row();
  }
  wz.close();

  io::CsvWriter zb(dir / "topic_given_doc.csv");
  zb.field("doc");
  for (std::size_t z = 0; z < s; ++z) zb.field("topic_" + std::to_string(z + 1));
  zb.end_row();
  for (std::size_t d = 0; d < m.num_documents(); ++d) {
    zb.field(counts.doc_ids()[d]);
    for (std::size_t z = 0; z < s; ++z) zb.field(m.topic_given_doc(d, z));
    zb.end_row();
  }
  zb.close();
}

inline PlsaModel read_plsa_model(const std::filesystem::path& dir) {
  auto header = nlohmann::json::parse(io::read_file(dir / "model.json"));
  PlsaModel m;
  const auto s = header.at("topics").get<std::size_t>();
  const auto n = header.at("words").get<std::size_t>();
  const auto b = header.at("documents").get<std::size_t>();
  m.seed = header.at("seed").get<std::uint64_t>();
  m.iterations = header.at("iterations").get<std::size_t>();
  m.converged = header.at("converged").get<bool>();
  m.loglik_trace = header.at("loglik_trace").get<std::vector<double>>();

  auto load = [&](const char* name, std::size_t rows, std::size_t cols, bool transpose) {
    auto csv = io::read_csv(dir / name);
    if (csv.size() != rows + 1) throw Error(std::string(name) + ": unexpected row count");
    RowMatrix out(transpose ? cols : rows, transpose ? rows : cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const auto& line = csv[r + 1];
      if (line.size() != cols + 1) throw Error(std::string(name) + ": unexpected column count");
      for (std::size_t c = 0; c < cols; ++c) {
        const double v = io::parse_double(line[c + 1]);
        if (transpose) out(c, r) = v; else out(r, c) = v;
      }
    }
    return out;
  };
  m.word_given_topic = load("word_given_topic.csv", n, s, true);
  m.topic_given_doc = load("topic_given_doc.csv", b, s, false);
  return m;
}

}  // namespace lexvar
