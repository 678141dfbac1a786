#pragma once

// Latent Dirichlet allocation: Dirichlet moment algebra, the two-topic
// burstiness formulas, and variational EM with an asymmetric alpha.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <Eigen/Dense>
#include <json.hpp>

#include "lexvar/error.hpp"
#include "lexvar/io.hpp"
#include "lexvar/matrix.hpp"
#include "lexvar/parallel.hpp"
#include "lexvar/plsa.hpp"

namespace lexvar {

namespace detail {

inline double lgam(double x) { return boost::math::lgamma(x); }
inline double digam(double x) { return boost::math::digamma(x); }
inline double trigam(double x) { return boost::math::trigamma(x); }

}  // namespace detail

/// E[prod_i theta_i^k_i] for theta ~ Dirichlet(alpha), evaluated as
/// exp(lnG(sum a) - lnG(sum a + sum k) + sum_i [lnG(a_i + k_i) - lnG(a_i)]).
inline double dirichlet_joint_moment(std::span<const double> alpha, std::span<const unsigned> k) {
  if (alpha.size() != k.size()) throw Error("dirichlet_joint_moment: alpha and k differ in length");
  if (alpha.empty()) throw Error("dirichlet_joint_moment: empty parameter vector");
  double a0 = 0, k0 = 0, log_m = 0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] > 0) || !std::isfinite(alpha[i])) throw Error("dirichlet_joint_moment: alpha must be positive");
    a0 += alpha[i];
    k0 += k[i];
    if (k[i] > 0) log_m += detail::lgam(alpha[i] + k[i]) - detail::lgam(alpha[i]);
  }
  if (k0 == 0) return 1.0;
  log_m += detail::lgam(a0) - detail::lgam(a0 + k0);
  return std::exp(log_m);
}

/// Mean and variance of p_w = sum_z theta_z beta_zw when theta ~ Dir(alpha),
/// assembled from first and second joint moments.
struct MixtureMoments {
  double mean;
  double second;  // E[p_w^2]
  double variance;
};

inline MixtureMoments mixture_moments(std::span<const double> alpha, std::span<const double> beta_w) {
  if (alpha.size() != beta_w.size()) throw Error("mixture_moments: size mismatch");
  const std::size_t s = alpha.size();
  std::vector<unsigned> k(s, 0);
  double mean = 0, second = 0;
  for (std::size_t i = 0; i < s; ++i) {
    k[i] = 1;
    mean += beta_w[i] * dirichlet_joint_moment(alpha, k);
    k[i] = 2;
    second += beta_w[i] * beta_w[i] * dirichlet_joint_moment(alpha, k);
    k[i] = 1;
    for (std::size_t j = i + 1; j < s; ++j) {
      k[j] = 1;
      second += 2.0 * beta_w[i] * beta_w[j] * dirichlet_joint_moment(alpha, k);
      k[j] = 0;
    }
    k[i] = 0;
  }
  return {mean, second, second - mean * mean};
}

enum class TwoTopicRegime {
  symmetric,   // alpha = (a, a)
  asymmetric,  // alpha = (1, a)
};

inline const char* to_string(TwoTopicRegime r) {
  return r == TwoTopicRegime::symmetric ? "symmetric" : "asymmetric";
}

inline std::vector<double> two_topic_alpha(TwoTopicRegime regime, double alpha) {
  return regime == TwoTopicRegime::symmetric ? std::vector<double>{alpha, alpha} : std::vector<double>{1.0, alpha};
}

struct TwoTopicMomentReport {
  TwoTopicRegime regime;
  double alpha;
  double beta1;
  double beta2;
  double mean;
  double variance;
  double xi;     // |beta2 - beta1| / 2
  double gamma;  // beta1 / alpha
  /// small-alpha approximations for the asymmetric model:
  /// E(p)^2 ~ (gamma + beta2)^2 alpha^2 and V(p) ~ beta2^2 alpha / 2
  double asymptotic_mean_sq;
  double asymptotic_variance;
};

/// Closed-form E(p_w) and V(p_w) for two topics.
///
/// symmetric:  E = (b1 + b2)/2,               V = (b1 - b2)^2 / (4 (2a + 1))
/// asymmetric: E = (b1 + a b2)/(1 + a),       V = a (b1 - b2)^2 / ((2 + a)(1 + a)^2)
inline TwoTopicMomentReport two_topic_moments(TwoTopicRegime regime, double alpha, double beta1, double beta2) {
  if (!(alpha > 0) || !std::isfinite(alpha)) throw Error("two_topic_moments: alpha must be positive");
  if (!(beta1 >= 0 && beta1 <= 1 && beta2 >= 0 && beta2 <= 1))
    throw Error("two_topic_moments: beta values must lie in [0, 1]");
  TwoTopicMomentReport r{};
  r.regime = regime;
  r.alpha = alpha;
  r.beta1 = beta1;
  r.beta2 = beta2;
  const double diff2 = (beta1 - beta2) * (beta1 - beta2);
  if (regime == TwoTopicRegime::symmetric) {
    r.mean = 0.5 * (beta1 + beta2);
    r.variance = 0.25 / (2.0 * alpha + 1.0) * diff2;
  } else {
    r.mean = beta1 / (1.0 + alpha) + alpha * beta2 / (1.0 + alpha);
    r.variance = alpha / ((2.0 + alpha) * (1.0 + alpha) * (1.0 + alpha)) * diff2;
  }
  r.xi = std::abs(beta2 - beta1) / 2.0;
  r.gamma = beta1 / alpha;
  r.asymptotic_mean_sq = (r.gamma + beta2) * (r.gamma + beta2) * alpha * alpha;
  r.asymptotic_variance = beta2 * beta2 / 2.0 * alpha;
  return r;
}

struct BurstinessOptions {
  /// alpha at or below this counts as "small"
  double small_alpha = 0.1;
  /// factor standing in for "much less than"
  double separation = 10.0;
};

struct BurstinessReport {
  TwoTopicMomentReport moments;
  double exact_ratio;       // V / E^2
  double asymptotic_ratio;  // beta2^2 / (2 alpha (gamma + beta2)^2)
  bool asymptotics_applicable;
  bool bursty;              // V >> E^2
  /// the power relation V = E^kappa needs beta1 << beta2 << beta1 / alpha
  double band_lower;
  double band_upper;
  bool in_band;
  bool well_inside_band;
};

/// Asymmetric two-topic model with beta1 = gamma * alpha: compares V/E^2
/// with its small-alpha prediction and locates beta2 relative to the band
/// in which a sub-quadratic power relation is attainable.
inline BurstinessReport burstiness_regime_check(double alpha, double gamma, double beta2,
                                                const BurstinessOptions& options = {}) {
  if (!(gamma >= 0)) throw Error("burstiness_regime_check: gamma must be nonnegative");
  const double beta1 = gamma * alpha;
  BurstinessReport r{};
  r.moments = two_topic_moments(TwoTopicRegime::asymmetric, alpha, beta1, beta2);
  const double e = r.moments.mean;
  r.exact_ratio = e > 0 ? r.moments.variance / (e * e) : std::numeric_limits<double>::infinity();
  r.asymptotic_ratio = r.moments.asymptotic_variance / r.moments.asymptotic_mean_sq;
  r.asymptotics_applicable = alpha <= options.small_alpha;
  r.bursty = r.exact_ratio > options.separation;
  r.band_lower = beta1;
  r.band_upper = beta1 / alpha;
  r.in_band = beta2 > r.band_lower && beta2 < r.band_upper;
  r.well_inside_band = beta2 >= options.separation * r.band_lower && beta2 * options.separation <= r.band_upper;
  return r;
}

// --- variational EM -------------------------------------------------------

struct LdaModel {
  Eigen::VectorXd alpha;        // s, positive
  RowMatrix beta;               // s x N, rows sum to 1
  RowMatrix gamma;              // B x s variational Dirichlet parameters
  std::vector<double> elbo_trace;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  bool converged = false;
  std::size_t damped_newton_steps = 0;
  std::vector<std::string> warnings;

  std::size_t topics() const noexcept { return static_cast<std::size_t>(beta.rows()); }
  std::size_t num_words() const noexcept { return static_cast<std::size_t>(beta.cols()); }

  /// Posterior mean of theta_b.
  Eigen::VectorXd topic_proportions(std::size_t doc) const {
    Eigen::VectorXd g = gamma.row(static_cast<Eigen::Index>(doc)).transpose();
    return g / g.sum();
  }
};

struct LdaOptions {
  std::size_t max_iters = 500;
  double rel_tol = 1e-6;
  std::size_t estep_max_iters = 100;
  double estep_rel_tol = 1e-6;
  double initial_alpha = 0.5;
  bool estimate_alpha = true;
  /// outer iterations run with alpha held fixed before Newton updates begin
  std::size_t alpha_burn_in = 20;
  /// independent starts in the seeded lda_fit; the best final bound is kept
  std::size_t restarts = 3;
  /// weight of the random positive mass mixed into each starting topic
  double init_smoothing = 0.1;
};

namespace detail {

struct AlphaObjective {
  double docs;
  std::vector<double> suff;  // sum_d E[log theta_dk]

  double value(const Eigen::VectorXd& a) const {
    double v = docs * lgam(a.sum());
    for (Eigen::Index k = 0; k < a.size(); ++k)
      v += -docs * lgam(a[k]) + (a[k] - 1.0) * suff[static_cast<std::size_t>(k)];
    return v;
  }
};

/// Newton ascent on the alpha part of the bound with the diagonal-plus-rank-one
/// Hessian. Steps that leave the positive orthant or lower the objective
/// are halved; the number of such damped steps is returned.
inline std::size_t newton_alpha(Eigen::VectorXd& alpha, const AlphaObjective& obj, std::size_t max_iters = 200) {
  std::size_t damped = 0;
  const auto s = alpha.size();
  double current = obj.value(alpha);
  for (std::size_t it = 0; it < max_iters; ++it) {
    const double a0 = alpha.sum();
    Eigen::VectorXd g(s), q(s);
    for (Eigen::Index k = 0; k < s; ++k) {
      g[k] = obj.docs * (digam(a0) - digam(alpha[k])) + obj.suff[static_cast<std::size_t>(k)];
      q[k] = -obj.docs * trigam(alpha[k]);
    }
    const double z = obj.docs * trigam(a0);
    const double b = (g.array() / q.array()).sum() / (1.0 / z + (1.0 / q.array()).sum());
    Eigen::VectorXd step = (g.array() - b) / q.array();  // H^{-1} g

    double t = 1.0;
    Eigen::VectorXd candidate = alpha - step;
    double value = (candidate.array() > 0).all() ? obj.value(candidate) : -std::numeric_limits<double>::infinity();
    bool was_damped = false;
    while (!(value >= current) && t > 1e-12) {
      t *= 0.5;
      was_damped = true;
      candidate = alpha - t * step;
      value = (candidate.array() > 0).all() ? obj.value(candidate) : -std::numeric_limits<double>::infinity();
    }
    if (!(value >= current)) break;
    damped += was_damped;
    const double change = (candidate - alpha).cwiseAbs().maxCoeff();
    alpha = candidate;
    current = value;
    if (change <= 1e-12 * alpha.maxCoeff()) break;
  }
  return damped;
}

struct DocState {
  std::vector<WordId> words;
  std::vector<double> counts;
  double total = 0;
};

/// Coordinate ascent on one document's (phi, gamma) starting from `gamma`.
/// Adds c_n phi_nk into expected(k, w) and returns the document's bound.
inline double lda_estep_document(const DocState& doc, const Eigen::VectorXd& alpha, const RowMatrix& beta,
                                 Eigen::Ref<Eigen::VectorXd> gamma, RowMatrix* expected, std::size_t max_iters,
                                 double rel_tol) {
  const auto s = alpha.size();
  const std::size_t n = doc.words.size();
  double alpha_terms = lgam(alpha.sum());
  for (Eigen::Index k = 0; k < s; ++k) alpha_terms -= lgam(alpha[k]);

  std::vector<double> phi(n * static_cast<std::size_t>(s));
  Eigen::VectorXd psi(s), weight(s), next_gamma(s);
  double bound = -std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < std::max<std::size_t>(1, max_iters); ++it) {
    for (Eigen::Index k = 0; k < s; ++k) psi[k] = digam(gamma[k]);
    const double top = psi.maxCoeff();
    for (Eigen::Index k = 0; k < s; ++k) weight[k] = std::exp(psi[k] - top);

    next_gamma = alpha;
    double word_terms = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double* ph = &phi[i * static_cast<std::size_t>(s)];
      double norm = 0;
      for (Eigen::Index k = 0; k < s; ++k) norm += (ph[k] = beta(k, doc.words[i]) * weight[k]);
      if (!(norm > 0)) throw Error("LDA E-step: word has zero probability under every topic");
      double expected_shift = 0;
      for (Eigen::Index k = 0; k < s; ++k) {
        ph[k] /= norm;
        next_gamma[k] += doc.counts[i] * ph[k];
        expected_shift += ph[k] * (psi[k] - top);
      }
      // sum_k phi (log beta - log phi) = log norm - sum_k phi (psi_k - top)
      word_terms += doc.counts[i] * (std::log(norm) - expected_shift);
    }
    gamma = next_gamma;
    double gamma_terms = -lgam(gamma.sum());
    for (Eigen::Index k = 0; k < s; ++k) gamma_terms += lgam(gamma[k]);
    const double value = alpha_terms + gamma_terms + word_terms;
    const bool done = std::abs(value - bound) <= rel_tol * std::abs(value);
    bound = value;
    if (done) break;
  }
  if (expected)
    for (std::size_t i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < s; ++k)
        (*expected)(k, doc.words[i]) += doc.counts[i] * phi[i * static_cast<std::size_t>(s) + static_cast<std::size_t>(k)];
  return bound;
}

}  // namespace detail

namespace detail {

inline std::vector<DocState> document_states(const TermDocMatrix& counts, std::vector<std::size_t>& active) {
  std::vector<DocState> docs(counts.num_documents());
  active.clear();
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& e : counts.column(d)) {
      docs[d].words.push_back(e.word);
      docs[d].counts.push_back(static_cast<double>(e.count));
      docs[d].total += static_cast<double>(e.count);
    }
    if (docs[d].total > 0) active.push_back(d);
  }
  return docs;
}

}  // namespace detail

/// Seeded starting point: each topic starts from one anchor document's
/// frequency profile plus a little positive noise, and alpha is constant.
inline LdaModel lda_initial_model(const TermDocMatrix& counts, std::size_t topics, std::uint64_t seed,
                                  const LdaOptions& options = {}) {
  if (topics < 2) throw Error("lda_fit: need at least two topics");
  if (counts.nonzeros() == 0) throw Error("lda_fit: count matrix is empty");
  if (!(options.initial_alpha > 0)) throw Error("lda_fit: initial alpha must be positive");
  const std::size_t n_words = counts.num_words();
  const auto s = static_cast<Eigen::Index>(topics);
  std::vector<std::size_t> active;
  const auto docs = detail::document_states(counts, active);

  LdaModel model;
  model.seed = seed;
  model.alpha = Eigen::VectorXd::Constant(s, options.initial_alpha);
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> noise(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Anchors chosen by greedy k-means++ seeding on frequency profiles: each
  // step draws a few candidates with probability proportional to squared
  // distance from the nearest anchor and keeps the one that lowers the total
  // distance most.
  auto profile = [&](std::size_t d) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_words));
    for (std::size_t i = 0; i < docs[d].words.size(); ++i) x[docs[d].words[i]] = docs[d].counts[i] / docs[d].total;
    return x;
  };
  auto distances = [&](const Eigen::VectorXd& anchor) {
    std::vector<double> out(active.size());
    const double norm = anchor.squaredNorm();
    for (std::size_t i = 0; i < active.size(); ++i) {
      const auto& doc = docs[active[i]];
      double dist = norm;
      for (std::size_t j = 0; j < doc.words.size(); ++j) {
        const double x = doc.counts[j] / doc.total;
        const double a = anchor[doc.words[j]];
        dist += (x - a) * (x - a) - a * a;
      }
      out[i] = std::max(dist, 0.0);
    }
    return out;
  };
  const std::size_t candidates = 2 + static_cast<std::size_t>(std::log(static_cast<double>(topics)));
  model.beta = RowMatrix::Zero(s, static_cast<Eigen::Index>(n_words));
  Eigen::VectorXd anchor = profile(active[std::uniform_int_distribution<std::size_t>(0, active.size() - 1)(rng)]);
  std::vector<double> nearest = distances(anchor);
  model.beta.row(0) = anchor.transpose();
  for (Eigen::Index k = 1; k < s; ++k) {
    const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
    if (!(total > 0)) {
      model.beta.row(k) = model.beta.row(k - 1);
      continue;
    }
    double best_potential = std::numeric_limits<double>::infinity();
    std::vector<double> best_nearest;
    for (std::size_t c = 0; c < candidates; ++c) {
      double target = unit(rng) * total;
      std::size_t pick = active.size() - 1;
      for (std::size_t i = 0; i < active.size(); ++i) {
        target -= nearest[i];
        if (target < 0) {
          pick = i;
          break;
        }
      }
      Eigen::VectorXd cand = profile(active[pick]);
      auto dist = distances(cand);
      double potential = 0;
      for (std::size_t i = 0; i < dist.size(); ++i) potential += (dist[i] = std::min(dist[i], nearest[i]));
      if (potential < best_potential) {
        best_potential = potential;
        best_nearest = std::move(dist);
        anchor = std::move(cand);
      }
    }
    nearest = std::move(best_nearest);
    model.beta.row(k) = anchor.transpose();
  }
  for (Eigen::Index k = 0; k < s; ++k) {
    for (std::size_t w = 0; w < n_words; ++w)
      model.beta(k, static_cast<Eigen::Index>(w)) += options.init_smoothing * noise(rng) / static_cast<double>(n_words);
    model.beta.row(k) /= model.beta.row(k).sum();
  }
  return model;
}

/// Variational EM for LDA: per-document coordinate ascent on (phi, gamma),
/// then the closed-form beta update and a Newton step for the full alpha
/// vector. elbo_trace holds the bound after every E-step; gamma is warm
/// started across iterations so the trace is non-decreasing.
///
/// Starts from `init`; a gamma of the wrong shape is replaced by alpha + T_b / s.
inline LdaModel lda_fit(const TermDocMatrix& counts, LdaModel init, const LdaOptions& options = {}) {
  const std::size_t n_words = counts.num_words();
  const std::size_t n_docs = counts.num_documents();
  const std::size_t topics = init.topics();
  const auto s = static_cast<Eigen::Index>(topics);
  if (topics < 2) throw Error("lda_fit: need at least two topics");
  if (counts.nonzeros() == 0) throw Error("lda_fit: count matrix is empty");
  if (init.num_words() != n_words || init.alpha.size() != s) throw Error("lda_fit: model does not match the count matrix");
  if (!(init.alpha.array() > 0).all()) throw Error("lda_fit: alpha must be positive");
  std::vector<std::size_t> active;
  const auto docs = detail::document_states(counts, active);

  LdaModel model = std::move(init);
  model.elbo_trace.clear();
  model.iterations = 0;
  model.converged = false;
  model.damped_newton_steps = 0;
  if (model.gamma.rows() != static_cast<Eigen::Index>(n_docs) || model.gamma.cols() != s) {
    model.gamma = RowMatrix(static_cast<Eigen::Index>(n_docs), s);
    for (std::size_t d = 0; d < n_docs; ++d)
      model.gamma.row(static_cast<Eigen::Index>(d)) =
          (model.alpha.array() + docs[d].total / static_cast<double>(topics)).transpose();
  }

  const auto blocks = fixed_blocks(active.size(), std::max<std::size_t>(128, active.size() / 64 + 1));
  double previous = -std::numeric_limits<double>::infinity();
  // alpha stays fixed until the burn-in ends or the fixed-alpha phase stalls
  bool alpha_phase = !options.estimate_alpha || options.alpha_burn_in == 0;
  bool alpha_updated = !options.estimate_alpha;
  for (std::size_t iter = 1; iter <= std::max<std::size_t>(1, options.max_iters); ++iter) {
    // E-step, reduced block by block in a fixed order.
    std::vector<RowMatrix> expected(blocks.size());
    std::vector<double> block_bound(blocks.size(), 0.0);
    parallel_for(blocks.size(), [&](std::size_t bi) {
      expected[bi] = RowMatrix::Zero(s, static_cast<Eigen::Index>(n_words));
      double acc = 0;
      for (std::size_t i = blocks[bi].begin; i < blocks[bi].end; ++i) {
        const std::size_t d = active[i];
        Eigen::VectorXd g = model.gamma.row(static_cast<Eigen::Index>(d)).transpose();
        acc += detail::lda_estep_document(docs[d], model.alpha, model.beta, g, &expected[bi],
                                          options.estep_max_iters, options.estep_rel_tol);
        model.gamma.row(static_cast<Eigen::Index>(d)) = g.transpose();
      }
      block_bound[bi] = acc;
    });
    double elbo = 0;
    for (double v : block_bound) elbo += v;
    model.elbo_trace.push_back(elbo);
    model.iterations = iter;
    const bool stalled = iter > 1 && elbo - previous < options.rel_tol * std::abs(previous);
    if (stalled && alpha_updated) {
      model.converged = true;
      break;
    }
    if (stalled || iter > options.alpha_burn_in) alpha_phase = true;
    previous = elbo;
    if (iter == options.max_iters) break;

    // M-step: beta
    RowMatrix total = RowMatrix::Zero(s, static_cast<Eigen::Index>(n_words));
    for (const auto& e : expected) total += e;
    for (Eigen::Index k = 0; k < s; ++k) {
      const double mass = total.row(k).sum();
      if (mass > 0) {
        model.beta.row(k) = total.row(k) / mass;
      } else {
        model.warnings.push_back("iteration " + std::to_string(iter) + ": topic " + std::to_string(k) +
                                 " received no mass; kept previous beta row");
      }
    }
    // M-step: alpha
    if (options.estimate_alpha && alpha_phase) {
      alpha_updated = true;
      detail::AlphaObjective obj{static_cast<double>(active.size()), std::vector<double>(topics, 0.0)};
      for (std::size_t d : active) {
        const auto g = model.gamma.row(static_cast<Eigen::Index>(d));
        const double dsum = detail::digam(g.sum());
        for (Eigen::Index k = 0; k < s; ++k) obj.suff[static_cast<std::size_t>(k)] += detail::digam(g[k]) - dsum;
      }
      const std::size_t damped = detail::newton_alpha(model.alpha, obj);
      if (damped > 0 && model.damped_newton_steps == 0)
        model.warnings.push_back("iteration " + std::to_string(iter) + ": alpha Newton step damped");
      model.damped_newton_steps += damped;
    }
  }
  return model;
}

/// Seeded fit. With options.restarts > 1 the run is repeated from
/// independently seeded starting points and the highest final bound wins.
inline LdaModel lda_fit(const TermDocMatrix& counts, std::size_t topics, std::uint64_t seed,
                        const LdaOptions& options = {}) {
  LdaModel best;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, options.restarts); ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::uint64_t start = seed;
    if (r > 0) {
      std::mt19937_64 mix(seq);
      start = mix();
    }
    LdaModel m = lda_fit(counts, lda_initial_model(counts, topics, start, options), options);
    if (r == 0 || m.elbo_trace.back() > best.elbo_trace.back()) best = std::move(m);
  }
  best.seed = seed;
  return best;
}

/// Corpus bound for a fixed model, re-running the E-step from the model's
/// gamma without updating alpha or beta.
inline double lda_elbo(const TermDocMatrix& counts, const LdaModel& model, const LdaOptions& options = {}) {
  double total = 0;
  for (std::size_t d = 0; d < counts.num_documents(); ++d) {
    detail::DocState doc;
    for (const auto& e : counts.column(d)) {
      doc.words.push_back(e.word);
      doc.counts.push_back(static_cast<double>(e.count));
      doc.total += static_cast<double>(e.count);
    }
    if (doc.total == 0) continue;
    Eigen::VectorXd g = model.gamma.row(static_cast<Eigen::Index>(d)).transpose();
    total += detail::lda_estep_document(doc, model.alpha, model.beta, g, nullptr, options.estep_max_iters,
                                        options.estep_rel_tol);
  }
  return total;
}

struct MarkerWord {
  WordId word;
  double beta;
  double corpus_mean;
  /// beta / corpus_mean; large values flag topic markers
  double marker_strength;
};

struct TopicMarkers {
  std::size_t topic;
  double alpha;
  std::vector<MarkerWord> words;
};

/// Topics in ascending alpha order, each with its top_k words by beta and
/// the ratio of beta to the word's corpus-wide mean frequency.
inline std::vector<TopicMarkers> rare_topic_report(const LdaModel& model, std::span<const double> corpus_mean,
                                                   std::size_t top_k) {
  if (corpus_mean.size() != model.num_words()) throw Error("rare_topic_report: corpus_mean size mismatch");
  std::vector<std::size_t> order(model.topics());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return model.alpha[static_cast<Eigen::Index>(a)] < model.alpha[static_cast<Eigen::Index>(b)];
  });
  std::vector<TopicMarkers> out;
  for (std::size_t z : order) {
    const auto zi = static_cast<Eigen::Index>(z);
    std::vector<WordId> words(model.num_words());
    std::iota(words.begin(), words.end(), WordId{0});
    const std::size_t k = std::min(top_k, words.size());
    std::partial_sort(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(k), words.end(), [&](WordId a, WordId b) {
      const double ba = model.beta(zi, a), bb = model.beta(zi, b);
      return ba != bb ? ba > bb : a < b;
    });
    TopicMarkers tm{z, model.alpha[zi], {}};
    for (std::size_t i = 0; i < k; ++i) {
      const WordId w = words[i];
      const double beta = model.beta(zi, w);
      const double mean = corpus_mean[w];
      tm.words.push_back({w, beta, mean, mean > 0 ? beta / mean : std::numeric_limits<double>::infinity()});
    }
    out.push_back(std::move(tm));
  }
  return out;
}

inline void write_rare_topic_report(const std::vector<TopicMarkers>& report, std::span<const std::string> words,
                                    const std::filesystem::path& path) {
  io::CsvWriter csv(path);
  csv.row("topic", "alpha", "word", "beta", "corpus_mean", "marker_strength");
  for (const auto& t : report)
    for (const auto& m : t.words) csv.row(t.topic + 1, t.alpha, words[m.word], m.beta, m.corpus_mean, m.marker_strength);
  csv.close();
}

inline void write_lda_model(const LdaModel& m, std::span<const std::string> words, std::span<const std::string> doc_ids,
                            const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::size_t s = m.topics();
  nlohmann::ordered_json header;
  header["model"] = "lda";
  header["topics"] = s;
  header["words"] = m.num_words();
  header["documents"] = static_cast<std::size_t>(m.gamma.rows());
  header["seed"] = m.seed;
  header["iterations"] = m.iterations;
  header["converged"] = m.converged;
  header["alpha"] = std::vector<double>(m.alpha.data(), m.alpha.data() + m.alpha.size());
  header["elbo_trace"] = m.elbo_trace;
  header["damped_newton_steps"] = m.damped_newton_steps;
  header["warnings"] = m.warnings;
  io::write_file(dir / "model.json", header.dump(2) + "\n");

  io::CsvWriter beta(dir / "beta.csv");
  beta.field("word");
  for (std::size_t z = 0; z < s; ++z) beta.field("topic_" + std::to_string(z + 1));
  beta.end_row();
  for (std::size_t w = 0; w < m.num_words(); ++w) {
    beta.field(words[w]);
    for (std::size_t z = 0; z < s; ++z) beta.field(m.beta(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(w)));
    beta.end_row();
  }
  beta.close();

  io::CsvWriter theta(dir / "doc_topics.csv");
  theta.field("doc");
  for (std::size_t z = 0; z < s; ++z) theta.field("topic_" + std::to_string(z + 1));
  theta.end_row();
  for (Eigen::Index d = 0; d < m.gamma.rows(); ++d) {
    theta.field(doc_ids[static_cast<std::size_t>(d)]);
    const Eigen::VectorXd p = m.topic_proportions(static_cast<std::size_t>(d));
    for (Eigen::Index z = 0; z < p.size(); ++z) theta.field(p[z]);
    theta.end_row();
  }
  theta.close();
}

}  // namespace lexvar
