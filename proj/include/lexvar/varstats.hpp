#pragma once

// Cross-text variation statistics and the variance/mean power-law fit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lexvar/error.hpp"
#include "lexvar/matrix.hpp"

namespace lexvar {

inline constexpr double kDefaultKappa = 1.25;

/// p_hat(w) = total count of w / T, pooled over the whole corpus.
inline std::vector<double> pooled_frequency(const TermDocMatrix& m) {
  const Count total = m.total_tokens();
  if (total == 0) throw Error("pooled_frequency: corpus has no tokens");
  std::vector<double> p(m.num_words());
  for (std::size_t w = 0; w < p.size(); ++w)
    p[w] = static_cast<double>(m.word_totals()[w]) / static_cast<double>(total);
  return p;
}

struct NormalizedVariance {
  /// V(w); NaN where the word was not scored.
  std::vector<double> values;
  /// false for words with p_hat in {0, 1}
  std::vector<bool> scored;
  /// nonempty documents that entered the average
  std::size_t documents_used = 0;
};

/// V(w) = (1/B) sum_b T_b (x(w,b) - p_hat(w))^2 / (p_hat(w)(1 - p_hat(w))).
///
/// Equals about 1 when tokens are i.i.d. with a document-independent rate.
/// Empty documents are left out of the average.
inline NormalizedVariance normalized_variance(const TermDocMatrix& m, std::span<const double> p_hat) {
  if (p_hat.size() != m.num_words()) throw Error("normalized_variance: p_hat size mismatch");
  const FrequencyView freq(m);
  const std::size_t docs = freq.num_nonempty_documents();
  if (docs == 0) throw Error("normalized_variance: all documents are empty");
  const Count total = m.total_tokens();

  NormalizedVariance out;
  out.documents_used = docs;
  out.values.assign(m.num_words(), std::numeric_limits<double>::quiet_NaN());
  out.scored.assign(m.num_words(), false);
  for (std::size_t w = 0; w < m.num_words(); ++w) {
    const double p = p_hat[w];
    if (!(p > 0.0 && p < 1.0)) continue;
    double sum = 0;
    Count covered = 0;
    for (const auto& e : m.row(w)) {
      const Count len = m.doc_lengths()[e.doc];
      const double x = static_cast<double>(e.count) / static_cast<double>(len);
      sum += static_cast<double>(len) * (x - p) * (x - p);
      covered += len;
    }
    // documents without w each contribute T_b * p^2
    sum += static_cast<double>(total - covered) * p * p;
    out.values[w] = sum / (static_cast<double>(docs) * p * (1.0 - p));
    out.scored[w] = true;
  }
  return out;
}

/// Per-word moments, columnar. rank is 1-based by descending mean, ties to
/// the lower word index.
struct MomentTable {
  std::vector<std::string> words;
  std::vector<double> p_hat;
  std::vector<double> mean;
  std::vector<double> var;
  std::vector<double> norm_var;
  std::vector<double> y;
  std::vector<std::size_t> rank;
  double kappa = kDefaultKappa;
  std::size_t documents_used = 0;

  std::size_t size() const noexcept { return words.size(); }

  /// Word indices in rank order.
  std::vector<WordId> by_rank() const {
    std::vector<WordId> order(size());
    for (std::size_t w = 0; w < size(); ++w) order[rank[w] - 1] = static_cast<WordId>(w);
    return order;
  }
};

/// Mean and population variance (divide by B) of x(w, .) over nonempty
/// documents, together with p_hat, V and y = var / mean^kappa.
inline MomentTable cross_text_moments(const TermDocMatrix& m, double kappa = kDefaultKappa) {
  const FrequencyView freq(m);
  const std::size_t docs = freq.num_nonempty_documents();
  if (docs == 0) throw Error("cross_text_moments: corpus has no nonempty documents");
  const std::size_t n = m.num_words();

  MomentTable t;
  t.words = m.words();
  t.kappa = kappa;
  t.documents_used = docs;
  t.p_hat = pooled_frequency(m);
  auto nv = normalized_variance(m, t.p_hat);
  t.norm_var = std::move(nv.values);
  t.mean.assign(n, 0.0);
  t.var.assign(n, 0.0);
  t.y.assign(n, 0.0);

  const double inv_docs = 1.0 / static_cast<double>(docs);
  for (std::size_t w = 0; w < n; ++w) {
    auto row = m.row(w);
    double sum = 0;
    for (const auto& e : row)
      sum += static_cast<double>(e.count) / static_cast<double>(m.doc_lengths()[e.doc]);
    const double mean = sum * inv_docs;
    double ss = 0;
    for (const auto& e : row) {
      const double x = static_cast<double>(e.count) / static_cast<double>(m.doc_lengths()[e.doc]);
      ss += (x - mean) * (x - mean);
    }
    ss += static_cast<double>(docs - row.size()) * mean * mean;
    t.mean[w] = mean;
    t.var[w] = ss * inv_docs;
    t.y[w] = mean > 0 ? t.var[w] / std::pow(mean, kappa) : std::numeric_limits<double>::quiet_NaN();
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t.mean[a] > t.mean[b]; });
  t.rank.assign(n, 0);
  for (std::size_t r = 0; r < n; ++r) t.rank[order[r]] = r + 1;
  return t;
}

/// Which words of a MomentTable enter a fit.
struct WordSelection {
  enum class Kind { all, top_by_mean, first_in_vocabulary, explicit_list };

  Kind kind = Kind::all;
  std::size_t count = 0;
  std::vector<WordId> indices;
  /// Reliability floor on the mean frequency; 0 keeps everything.
  double min_mean = 0.0;

  static WordSelection all() { return {}; }
  static WordSelection top(std::size_t m) { return {Kind::top_by_mean, m, {}, 0.0}; }
  static WordSelection first(std::size_t m) { return {Kind::first_in_vocabulary, m, {}, 0.0}; }
  static WordSelection words(std::vector<WordId> list) {
    return {Kind::explicit_list, list.size(), std::move(list), 0.0};
  }

  std::vector<WordId> resolve(const MomentTable& t) const {
    std::vector<WordId> out;
    switch (kind) {
      case Kind::all:
        out.resize(t.size());
        std::iota(out.begin(), out.end(), WordId{0});
        break;
      case Kind::top_by_mean:
        out = t.by_rank();
        out.resize(std::min(count, out.size()));
        break;
      case Kind::first_in_vocabulary:
        out.resize(std::min(count, t.size()));
        std::iota(out.begin(), out.end(), WordId{0});
        break;
      case Kind::explicit_list:
        for (WordId w : indices)
          if (w >= t.size()) throw Error("word selection index out of range");
        out = indices;
        break;
    }
    if (min_mean > 0)
      std::erase_if(out, [&](WordId w) { return !(t.mean[w] >= min_mean); });
    return out;
  }
};

struct PowerLawFit {
  double exponent = 0;  // kappa
  double amplitude = 0; // a
  double stderr_exponent = 0;
  double r_squared = 0;
  std::size_t n_points = 0;
  /// selected points dropped because x <= 0 or y <= 0
  std::size_t n_excluded = 0;
};

/// Ordinary least squares of log y on log x: y ~ amplitude * x^exponent.
/// Points with a nonpositive coordinate are skipped and counted.
inline PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("fit_power_law: size mismatch");
  std::vector<double> lx, ly;
  PowerLawFit fit;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0 && y[i] > 0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    } else {
      ++fit.n_excluded;
    }
  }
  const std::size_t n = lx.size();
  if (n < 2) throw Error("fit_power_law: fewer than 2 usable points");
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = lx[i] - mx, dy = ly[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0)) throw Error("fit_power_law: degenerate design (all x equal)");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (intercept + slope * lx[i]);
    sse += r * r;
  }
  fit.exponent = slope;
  fit.amplitude = std::exp(intercept);
  fit.n_points = n;
  fit.stderr_exponent = n > 2 ? std::sqrt(sse / static_cast<double>(n - 2) / sxx)
                              : std::numeric_limits<double>::quiet_NaN();
  fit.r_squared = syy > 0 ? 1.0 - sse / syy : std::numeric_limits<double>::quiet_NaN();
  return fit;
}

/// Fits var ~ a * mean^kappa over the selected words; zero-variance words
/// are excluded and counted in n_excluded.
inline PowerLawFit fit_power_law(const MomentTable& t, const WordSelection& selection) {
  auto words = selection.resolve(t);
  std::vector<double> x, y;
  x.reserve(words.size());
  y.reserve(words.size());
  for (WordId w : words) {
    x.push_back(t.mean[w]);
    y.push_back(t.var[w]);
  }
  return fit_power_law(x, y);
}

/// Exponents implied by var ~ mean^kappa: sd ~ mean^(kappa/2) and
/// sd/mean ~ mean^((kappa-2)/2).
struct DerivedExponents {
  double sigma_exponent;
  double ratio_exponent;
};

constexpr DerivedExponents derived_exponents(double kappa) noexcept {
  return {kappa / 2.0, (kappa - 2.0) / 2.0};
}

struct VolatilityReport {
  /// sd/mean per word; NaN where mean = 0
  std::vector<double> ratio;
  PowerLawFit fit;
  double sigma_exponent = 0;
  double ratio_exponent = 0;
};

inline VolatilityReport volatility_ratio(const MomentTable& t, const PowerLawFit& fit) {
  VolatilityReport r;
  r.fit = fit;
  r.ratio.resize(t.size());
  for (std::size_t w = 0; w < t.size(); ++w)
    r.ratio[w] = t.mean[w] > 0 ? std::sqrt(t.var[w]) / t.mean[w] : std::numeric_limits<double>::quiet_NaN();
  auto ex = derived_exponents(fit.exponent);
  r.sigma_exponent = ex.sigma_exponent;
  r.ratio_exponent = ex.ratio_exponent;
  return r;
}

inline VolatilityReport volatility_ratio(const MomentTable& t, const WordSelection& selection) {
  return volatility_ratio(t, fit_power_law(t, selection));
}

}  // namespace lexvar
