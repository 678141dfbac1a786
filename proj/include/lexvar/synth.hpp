#pragma once

// Corpus generators for the i.i.d., pLSA and LDA generative processes, plus
// the calibration experiments built on them.

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

#include <json.hpp>

#include "lexvar/corpus.hpp"
#include "lexvar/error.hpp"
#include "lexvar/io.hpp"
#include "lexvar/lda.hpp"
#include "lexvar/lsa.hpp"
#include "lexvar/matrix.hpp"
#include "lexvar/parallel.hpp"
#include "lexvar/varstats.hpp"

namespace lexvar {

enum class GeneratorMode { iid, plsa, lda };

inline const char* to_string(GeneratorMode m) {
  switch (m) {
    case GeneratorMode::iid: return "iid";
    case GeneratorMode::plsa: return "plsa";
    case GeneratorMode::lda: return "lda";
  }
  return "?";
}

inline GeneratorMode parse_generator_mode(std::string_view s) {
  if (s == "iid") return GeneratorMode::iid;
  if (s == "plsa") return GeneratorMode::plsa;
  if (s == "lda") return GeneratorMode::lda;
  throw Error("unknown generator mode '" + std::string(s) + "'");
}

using Simplex = std::vector<double>;

struct GeneratorSpec {
  GeneratorMode mode = GeneratorMode::iid;
  std::size_t documents = 1;
  /// document lengths are uniform on [min_length, max_length]
  std::size_t min_length = 500;
  std::size_t max_length = 500;
  std::uint64_t seed = 0;
  /// iid: the shared word distribution
  Simplex word_probs;
  /// plsa and lda: s rows over the vocabulary
  std::vector<Simplex> topics;
  /// plsa: one row shared by every document, or one row per document
  std::vector<Simplex> topic_given_doc;
  /// lda: Dirichlet parameter
  std::vector<double> alpha;
  /// optional; defaults to generated alphabetic names
  std::vector<std::string> words;
  /// keep per-token topic labels in the truth record (token path only)
  bool record_assignments = false;

  std::size_t vocabulary_size() const {
    if (mode == GeneratorMode::iid) return word_probs.size();
    return topics.empty() ? 0 : topics.front().size();
  }
  std::size_t topic_count() const { return mode == GeneratorMode::iid ? 0 : topics.size(); }
};

/// Hidden variables behind a generated corpus.
struct TruthRecord {
  /// B x s topic proportions actually used per document (empty for iid)
  std::vector<Simplex> theta;
  /// B x s tokens drawn from each topic
  std::vector<std::vector<std::uint64_t>> topic_counts;
  /// per-token topic labels when requested
  std::vector<std::vector<std::uint32_t>> assignments;
  std::vector<std::size_t> doc_lengths;
};

struct GeneratedCorpus {
  Corpus corpus;
  TruthRecord truth;
};

struct GeneratedCounts {
  TermDocMatrix matrix;
  TruthRecord truth;
};

/// "wa", "wb", ..., "wz", "waa", ...: bijective base 26 behind a 'w'.
inline std::string synthetic_word(std::size_t index) {
  std::string tail;
  std::size_t n = index + 1;
  while (n > 0) {
    --n;
    tail.push_back(static_cast<char>('a' + n % 26));
    n /= 26;
  }
  std::reverse(tail.begin(), tail.end());
  return "w" + tail;
}

inline std::string synthetic_doc_id(std::size_t index, std::size_t total) {
  const std::size_t width = std::max<std::size_t>(4, std::to_string(total).size());
  std::string digits = std::to_string(index + 1);
  return "d" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

namespace detail {

inline void check_simplex(std::span<const double> p, const std::string& what) {
  if (p.empty()) throw Error(what + ": empty distribution");
  double sum = 0;
  for (double v : p) {
    if (!(v >= 0) || !std::isfinite(v)) throw Error(what + ": entries must be finite and nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-8) throw Error(what + ": entries sum to " + io::format_double(sum) + ", not 1");
}

/// One engine per document, derived from (seed, document index).
inline std::mt19937_64 document_engine(std::uint64_t seed, std::size_t doc) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(doc), static_cast<std::uint32_t>(static_cast<std::uint64_t>(doc) >> 32)};
  return std::mt19937_64(seq);
}

/// Cumulative table for inverse-CDF sampling; zero-probability entries are
/// never selected.
struct CategoricalTable {
  std::vector<double> cdf;

  explicit CategoricalTable(std::span<const double> p) : cdf(p.size()) {
    std::partial_sum(p.begin(), p.end(), cdf.begin());
  }

  template <typename Rng>
  std::uint32_t operator()(Rng& rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return static_cast<std::uint32_t>(it - cdf.begin());
  }
};

/// Multinomial(n, p) through successive conditional binomials.
template <typename Rng>
std::vector<std::uint64_t> multinomial(std::uint64_t n, std::span<const double> p, Rng& rng) {
  std::vector<std::uint64_t> out(p.size(), 0);
  double remaining = 1.0;
  for (std::size_t i = 0; i + 1 < p.size() && n > 0; ++i) {
    if (p[i] <= 0) {
      remaining -= p[i];
      continue;
    }
    const double q = remaining > 0 ? std::clamp(p[i] / remaining, 0.0, 1.0) : 1.0;
    const auto k = static_cast<std::uint64_t>(
        std::binomial_distribution<long long>(static_cast<long long>(n), q)(rng));
    out[i] = k;
    n -= k;
    remaining -= p[i];
  }
  if (n > 0) {
    // leftover goes to the last category with positive probability
    std::size_t last = p.size() - 1;
    while (last > 0 && p[last] <= 0) --last;
    out[last] += n;
  }
  return out;
}

}  // namespace detail

/// theta ~ Dirichlet(alpha) by normalized Gamma draws. Components with
/// alpha < 1 are drawn in log space, log G = log G(alpha + 1) + log(U) / alpha,
/// so tiny parameters do not underflow to exact zeros.
template <typename Rng>
Simplex sample_dirichlet(std::span<const double> alpha, Rng& rng) {
  std::vector<double> log_g(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double a = alpha[i];
    if (!(a > 0) || !std::isfinite(a)) throw Error("sample_dirichlet: alpha must be positive");
    if (a < 1.0) {
      const double g = std::gamma_distribution<double>(a + 1.0, 1.0)(rng);
      const double u = 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);  // (0, 1]
      log_g[i] = std::log(g) + std::log(u) / a;
    } else {
      log_g[i] = std::log(std::gamma_distribution<double>(a, 1.0)(rng));
    }
  }
  const double top = *std::max_element(log_g.begin(), log_g.end());
  Simplex theta(alpha.size());
  double sum = 0;
  for (std::size_t i = 0; i < theta.size(); ++i) sum += (theta[i] = std::exp(log_g[i] - top));
  for (double& t : theta) t /= sum;
  return theta;
}

inline void validate(const GeneratorSpec& spec) {
  if (spec.documents < 1) throw Error("generator spec: need at least one document");
  if (spec.min_length < 1 || spec.max_length < spec.min_length)
    throw Error("generator spec: lengths must satisfy 1 <= min_length <= max_length");
  const std::size_t n = spec.vocabulary_size();
  if (n == 0) throw Error("generator spec: empty vocabulary");
  if (!spec.words.empty() && spec.words.size() != n) throw Error("generator spec: words do not match the vocabulary size");
  switch (spec.mode) {
    case GeneratorMode::iid:
      detail::check_simplex(spec.word_probs, "word_probs");
      break;
    case GeneratorMode::plsa:
    case GeneratorMode::lda:
      for (std::size_t z = 0; z < spec.topics.size(); ++z) {
        if (spec.topics[z].size() != n) throw Error("generator spec: topic rows differ in length");
        detail::check_simplex(spec.topics[z], "topic " + std::to_string(z + 1));
      }
      if (spec.mode == GeneratorMode::plsa) {
        if (spec.topic_given_doc.size() != 1 && spec.topic_given_doc.size() != spec.documents)
          throw Error("generator spec: topic_given_doc needs one row or one row per document");
        for (const auto& row : spec.topic_given_doc) {
          if (row.size() != spec.topics.size()) throw Error("generator spec: topic_given_doc row has wrong length");
          detail::check_simplex(row, "topic_given_doc");
        }
      } else {
        if (spec.alpha.size() != spec.topics.size()) throw Error("generator spec: alpha length differs from topic count");
        for (double a : spec.alpha)
          if (!(a > 0) || !std::isfinite(a)) throw Error("generator spec: alpha must be positive");
      }
      break;
  }
}

inline std::vector<std::string> vocabulary_words(const GeneratorSpec& spec) {
  if (!spec.words.empty()) return spec.words;
  std::vector<std::string> w(spec.vocabulary_size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = synthetic_word(i);
  return w;
}

namespace detail {

template <typename Rng>
std::size_t draw_length(const GeneratorSpec& spec, Rng& rng) {
  if (spec.min_length == spec.max_length) return spec.min_length;
  return std::uniform_int_distribution<std::size_t>(spec.min_length, spec.max_length)(rng);
}

template <typename Rng>
Simplex draw_theta(const GeneratorSpec& spec, std::size_t doc, Rng& rng) {
  if (spec.mode == GeneratorMode::lda) return sample_dirichlet(spec.alpha, rng);
  if (spec.mode == GeneratorMode::plsa) return spec.topic_given_doc.size() == 1 ? spec.topic_given_doc[0] : spec.topic_given_doc[doc];
  return {};
}

}  // namespace detail

/// Token-level sampling: each token picks a topic from theta_b and then a
/// word from that topic. Deterministic in the seed for any thread count.
inline GeneratedCorpus generate(const GeneratorSpec& spec) {
  validate(spec);
  const std::size_t b = spec.documents;
  const std::size_t s = spec.topic_count();
  std::vector<detail::CategoricalTable> word_tables;
  if (spec.mode == GeneratorMode::iid) {
    word_tables.emplace_back(spec.word_probs);
  } else {
    for (const auto& row : spec.topics) word_tables.emplace_back(row);
  }

  std::vector<Document> docs(b);
  TruthRecord truth;
  truth.theta.resize(spec.mode == GeneratorMode::iid ? 0 : b);
  truth.topic_counts.resize(spec.mode == GeneratorMode::iid ? 0 : b);
  truth.doc_lengths.resize(b);
  if (spec.record_assignments && s > 0) truth.assignments.resize(b);

  parallel_for(b, [&](std::size_t d) {
    auto rng = detail::document_engine(spec.seed, d);
    const std::size_t len = detail::draw_length(spec, rng);
    Document doc{synthetic_doc_id(d, b), {}};
    doc.tokens.reserve(len);
    truth.doc_lengths[d] = len;
    if (spec.mode == GeneratorMode::iid) {
      for (std::size_t t = 0; t < len; ++t) doc.tokens.push_back(word_tables[0](rng));
    } else {
      Simplex theta = detail::draw_theta(spec, d, rng);
      const detail::CategoricalTable topic_table(theta);
      std::vector<std::uint64_t> per_topic(s, 0);
      std::vector<std::uint32_t> labels;
      if (spec.record_assignments) labels.reserve(len);
      for (std::size_t t = 0; t < len; ++t) {
        const std::uint32_t z = topic_table(rng);
        ++per_topic[z];
        if (spec.record_assignments) labels.push_back(z);
        doc.tokens.push_back(word_tables[z](rng));
      }
      truth.theta[d] = std::move(theta);
      truth.topic_counts[d] = std::move(per_topic);
      if (spec.record_assignments) truth.assignments[d] = std::move(labels);
    }
    docs[d] = std::move(doc);
  });
  return {Corpus(std::move(docs), Vocabulary(vocabulary_words(spec))), std::move(truth)};
}

/// Count-level sampling with the same distribution as generate(): per-topic
/// token counts ~ Multinomial(T_b, theta_b), then word counts per topic ~
/// Multinomial(n_z, beta_z). Cost does not grow with document length, which
/// makes very long documents affordable.
inline GeneratedCounts generate_counts(const GeneratorSpec& spec) {
  validate(spec);
  const std::size_t b = spec.documents;
  const std::size_t n = spec.vocabulary_size();
  const std::size_t s = spec.topic_count();

  TruthRecord truth;
  truth.theta.resize(spec.mode == GeneratorMode::iid ? 0 : b);
  truth.topic_counts.resize(spec.mode == GeneratorMode::iid ? 0 : b);
  truth.doc_lengths.resize(b);
  std::vector<std::vector<Triplet>> columns(b);

  parallel_for(b, [&](std::size_t d) {
    auto rng = detail::document_engine(spec.seed, d);
    const std::size_t len = detail::draw_length(spec, rng);
    truth.doc_lengths[d] = len;
    std::vector<std::uint64_t> counts(n, 0);
    if (spec.mode == GeneratorMode::iid) {
      counts = detail::multinomial(len, spec.word_probs, rng);
    } else {
      Simplex theta = detail::draw_theta(spec, d, rng);
      auto per_topic = detail::multinomial(len, theta, rng);
      for (std::size_t z = 0; z < s; ++z) {
        if (per_topic[z] == 0) continue;
        auto words = detail::multinomial(per_topic[z], spec.topics[z], rng);
        for (std::size_t w = 0; w < n; ++w) counts[w] += words[w];
      }
      truth.theta[d] = std::move(theta);
      truth.topic_counts[d] = std::move(per_topic);
    }
    for (std::size_t w = 0; w < n; ++w)
      if (counts[w] > 0) columns[d].push_back({static_cast<WordId>(w), static_cast<DocId>(d), counts[w]});
  });

  std::vector<Triplet> triplets;
  std::vector<std::string> ids(b);
  std::vector<Count> lengths(b);
  for (std::size_t d = 0; d < b; ++d) {
    triplets.insert(triplets.end(), columns[d].begin(), columns[d].end());
    ids[d] = synthetic_doc_id(d, b);
    lengths[d] = truth.doc_lengths[d];
  }
  return {TermDocMatrix(vocabulary_words(spec), std::move(ids), std::move(lengths), std::move(triplets)),
          std::move(truth)};
}

// --- JSON -----------------------------------------------------------------

inline nlohmann::ordered_json to_json(const GeneratorSpec& spec) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(spec.mode);
  j["documents"] = spec.documents;
  j["min_length"] = spec.min_length;
  j["max_length"] = spec.max_length;
  j["seed"] = spec.seed;
  if (!spec.word_probs.empty()) j["word_probs"] = spec.word_probs;
  if (!spec.topics.empty()) j["topics"] = spec.topics;
  if (!spec.topic_given_doc.empty()) j["topic_given_doc"] = spec.topic_given_doc;
  if (!spec.alpha.empty()) j["alpha"] = spec.alpha;
  if (!spec.words.empty()) j["words"] = spec.words;
  j["record_assignments"] = spec.record_assignments;
  return j;
}

/// Accepts "length" as a shorthand for equal min_length and max_length.
inline GeneratorSpec generator_spec_from_json(const nlohmann::json& j) {
  GeneratorSpec spec;
  try {
    spec.mode = parse_generator_mode(j.at("mode").get<std::string>());
    spec.documents = j.at("documents").get<std::size_t>();
    if (j.contains("length")) {
      spec.min_length = spec.max_length = j.at("length").get<std::size_t>();
    } else {
      spec.min_length = j.at("min_length").get<std::size_t>();
      spec.max_length = j.value("max_length", spec.min_length);
    }
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.word_probs = j.value("word_probs", Simplex{});
    spec.topics = j.value("topics", std::vector<Simplex>{});
    spec.topic_given_doc = j.value("topic_given_doc", std::vector<Simplex>{});
    spec.alpha = j.value("alpha", std::vector<double>{});
    spec.words = j.value("words", std::vector<std::string>{});
    spec.record_assignments = j.value("record_assignments", false);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("generator spec: ") + e.what());
  }
  validate(spec);
  return spec;
}

inline GeneratorSpec read_generator_spec(const std::filesystem::path& path) {
  try {
    return generator_spec_from_json(nlohmann::json::parse(io::read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

inline nlohmann::ordered_json to_json(const TruthRecord& truth) {
  nlohmann::ordered_json j;
  j["doc_lengths"] = truth.doc_lengths;
  if (!truth.theta.empty()) j["theta"] = truth.theta;
  if (!truth.topic_counts.empty()) j["topic_counts"] = truth.topic_counts;
  if (!truth.assignments.empty()) j["assignments"] = truth.assignments;
  return j;
}

inline TruthRecord truth_from_json(const nlohmann::json& j) {
  TruthRecord t;
  t.doc_lengths = j.at("doc_lengths").get<std::vector<std::size_t>>();
  t.theta = j.value("theta", std::vector<Simplex>{});
  t.topic_counts = j.value("topic_counts", std::vector<std::vector<std::uint64_t>>{});
  t.assignments = j.value("assignments", std::vector<std::vector<std::uint32_t>>{});
  return t;
}

// --- experiments ------------------------------------------------------------

struct NullCalibrationSummary {
  std::vector<double> values;  // V_w for scored words
  double mean = 0;
  double sd = 0;
  double q05 = 0, q25 = 0, q50 = 0, q75 = 0, q95 = 0;
  /// share of scored words with V_w in [0.8, 1.2]
  double fraction_near_one = 0;
  std::size_t scored = 0;
};

inline NullCalibrationSummary summarize_normalized_variance(std::span<const double> values) {
  NullCalibrationSummary out;
  for (double v : values)
    if (std::isfinite(v)) out.values.push_back(v);
  out.scored = out.values.size();
  if (out.values.empty()) return out;
  const double n = static_cast<double>(out.values.size());
  out.mean = std::accumulate(out.values.begin(), out.values.end(), 0.0) / n;
  double ss = 0;
  std::size_t near = 0;
  for (double v : out.values) {
    ss += (v - out.mean) * (v - out.mean);
    near += v >= 0.8 && v <= 1.2;
  }
  out.sd = out.values.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  out.fraction_near_one = static_cast<double>(near) / n;
  std::vector<double> sorted = out.values;
  std::sort(sorted.begin(), sorted.end());
  out.q05 = detail::quantile_sorted(sorted, 0.05);
  out.q25 = detail::quantile_sorted(sorted, 0.25);
  out.q50 = detail::quantile_sorted(sorted, 0.50);
  out.q75 = detail::quantile_sorted(sorted, 0.75);
  out.q95 = detail::quantile_sorted(sorted, 0.95);
  return out;
}

/// i.i.d. corpus with word distribution p, B documents of T tokens, scored
/// with the normalized variance; V_w should sit near 1.
inline NullCalibrationSummary null_calibration_experiment(const Simplex& p, std::size_t documents, std::size_t length,
                                                          std::uint64_t seed) {
  GeneratorSpec spec;
  spec.mode = GeneratorMode::iid;
  spec.documents = documents;
  spec.min_length = spec.max_length = length;
  spec.seed = seed;
  spec.word_probs = p;
  const auto gen = generate_counts(spec);
  const auto nv = normalized_variance(gen.matrix, pooled_frequency(gen.matrix));
  return summarize_normalized_variance(nv.values);
}

/// Expected mean and variance of the observed frequency x = n_w / T for a
/// document of fixed length T under LDA: Var x = V(p_w) + (E p_w - E p_w^2) / T.
struct ExpectedFrequencyMoments {
  double mean;
  double variance;
};

inline ExpectedFrequencyMoments expected_frequency_moments(const GeneratorSpec& spec, WordId w) {
  if (spec.mode != GeneratorMode::lda) throw Error("expected_frequency_moments: lda spec required");
  if (spec.min_length != spec.max_length) throw Error("expected_frequency_moments: fixed document length required");
  std::vector<double> beta_w(spec.topics.size());
  for (std::size_t z = 0; z < beta_w.size(); ++z) beta_w[z] = spec.topics[z][w];
  const auto mm = mixture_moments(spec.alpha, beta_w);
  const double t = static_cast<double>(spec.min_length);
  return {mm.mean, mm.variance + (mm.mean - mm.second) / t};
}

struct EmergenceRegime {
  std::string name;
  GeneratorSpec spec;
  /// words entering the fit
  std::vector<WordId> fit_words;
  /// optional target for the fitted exponent; NaN when only the theory is checked
  double target_kappa = std::numeric_limits<double>::quiet_NaN();
};

struct EmergenceResult {
  std::string name;
  PowerLawFit fit;
  /// slope of the exact expected moments over the same words
  double theory_kappa = 0;
  double target_kappa = std::numeric_limits<double>::quiet_NaN();
  std::vector<WordId> fit_words;
  std::vector<double> mean;
  std::vector<double> var;
  std::vector<double> expected_mean;
  std::vector<double> expected_var;
};

/// For each regime: generate counts, take cross-text moments, fit
/// var ~ mean^kappa over the regime's words, and compare with the slope of
/// the exact expected moments.
inline std::vector<EmergenceResult> powerlaw_emergence_experiment(const std::vector<EmergenceRegime>& regimes) {
  std::vector<EmergenceResult> out;
  for (const auto& r : regimes) {
    if (r.spec.mode != GeneratorMode::lda) throw Error("powerlaw_emergence_experiment: regime '" + r.name + "' is not lda");
    if (r.fit_words.size() < 3) throw Error("powerlaw_emergence_experiment: regime '" + r.name + "' needs at least 3 words");
    const auto gen = generate_counts(r.spec);
    const auto table = cross_text_moments(gen.matrix);
    EmergenceResult res;
    res.name = r.name;
    res.target_kappa = r.target_kappa;
    res.fit_words = r.fit_words;
    for (WordId w : r.fit_words) {
      res.mean.push_back(table.mean[w]);
      res.var.push_back(table.var[w]);
      const auto em = expected_frequency_moments(r.spec, w);
      res.expected_mean.push_back(em.mean);
      res.expected_var.push_back(em.variance);
    }
    res.fit = fit_power_law(res.mean, res.var);
    res.theory_kappa = fit_power_law(res.expected_mean, res.expected_var).exponent;
    out.push_back(std::move(res));
  }
  return out;
}

/// Log-spaced values from lo to hi inclusive.
inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    v[i] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
  }
  return v;
}

/// Two topic rows built from paired per-word probabilities, with one filler
/// word appended to each topic to absorb the remaining mass. The filler for
/// topic z has probability zero in the other topic.
inline std::vector<Simplex> two_topics_with_filler(std::span<const double> first, std::span<const double> second) {
  if (first.size() != second.size()) throw Error("two_topics_with_filler: size mismatch");
  const double m1 = std::accumulate(first.begin(), first.end(), 0.0);
  const double m2 = std::accumulate(second.begin(), second.end(), 0.0);
  if (m1 >= 1.0 || m2 >= 1.0) throw Error("two_topics_with_filler: band words already exhaust a topic");
  Simplex t1(first.begin(), first.end()), t2(second.begin(), second.end());
  t1.push_back(1.0 - m1);
  t1.push_back(0.0);
  t2.push_back(0.0);
  t2.push_back(1.0 - m2);
  return {t1, t2};
}

/// The three reference regimes:
///  noise:        alpha = (1000, 1000), identical topics, so only sampling noise
///  proportional: alpha = (0.01, 0.01), beta2 = 4 beta1, nearly two-point theta
///  asymmetric:   alpha = (1, 0.01), beta2 / beta1 falling from 30 to about 5 across two decades
inline std::vector<EmergenceRegime> default_emergence_sweep(std::uint64_t seed) {
  std::vector<EmergenceRegime> out;
  constexpr std::size_t band = 40;
  {
    EmergenceRegime r;
    r.name = "noise";
    r.target_kappa = 1.0;
    r.spec.mode = GeneratorMode::lda;
    r.spec.documents = 1000;
    r.spec.min_length = r.spec.max_length = 10000;
    r.spec.seed = seed;
    r.spec.alpha = {1000.0, 1000.0};
    auto b = log_spaced(1e-3, 1e-2, band);
    r.spec.topics = two_topics_with_filler(b, b);
    r.fit_words.resize(band);
    std::iota(r.fit_words.begin(), r.fit_words.end(), WordId{0});
    out.push_back(std::move(r));
  }
  {
    EmergenceRegime r;
    r.name = "proportional";
    r.target_kappa = 2.0;
    r.spec.mode = GeneratorMode::lda;
    r.spec.documents = 2000;
    r.spec.min_length = r.spec.max_length = 1000000;
    r.spec.seed = seed + 1;
    r.spec.alpha = {0.01, 0.01};
    auto b1 = log_spaced(1e-4, 1e-2, band);
    std::vector<double> b2(band);
    for (std::size_t i = 0; i < band; ++i) b2[i] = 4.0 * b1[i];
    r.spec.topics = two_topics_with_filler(b1, b2);
    r.fit_words.resize(band);
    std::iota(r.fit_words.begin(), r.fit_words.end(), WordId{0});
    out.push_back(std::move(r));
  }
  {
    EmergenceRegime r;
    r.name = "asymmetric";
    r.spec.mode = GeneratorMode::lda;
    r.spec.documents = 10000;
    r.spec.min_length = r.spec.max_length = 1000000;
    r.spec.seed = seed + 2;
    r.spec.alpha = {1.0, 0.01};
    auto b1 = log_spaced(1e-5, 1e-3, band);
    std::vector<double> b2(band);
    for (std::size_t i = 0; i < band; ++i) b2[i] = 30.0 * b1[i] * std::pow(b1[i] / b1[0], -0.375);
    r.spec.topics = two_topics_with_filler(b1, b2);
    r.fit_words.resize(band);
    std::iota(r.fit_words.begin(), r.fit_words.end(), WordId{0});
    out.push_back(std::move(r));
  }
  return out;
}

// --- persistence ------------------------------------------------------------

/// Writes the corpus in manifest form (docs/ + manifest.tsv), spec.json and
/// truth.json.
inline void write_generated(const GeneratorSpec& spec, const GeneratedCorpus& gen, const std::filesystem::path& dir) {
  write_text_corpus(gen.corpus, dir);
  io::write_file(dir / "spec.json", to_json(spec).dump(2) + "\n");
  io::write_file(dir / "truth.json", to_json(gen.truth).dump() + "\n");
}

inline void write_generated(const GeneratorSpec& spec, const GeneratedCounts& gen, const std::filesystem::path& dir) {
  write_matrix(gen.matrix, dir);
  io::write_file(dir / "spec.json", to_json(spec).dump(2) + "\n");
  io::write_file(dir / "truth.json", to_json(gen.truth).dump() + "\n");
}

}  // namespace lexvar
