#pragma once

// Truncated SVD of the word-by-document frequency matrix and spiked
// spectrum diagnostics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "lexvar/error.hpp"
#include "lexvar/matrix.hpp"

namespace lexvar {

using SparseReal = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// X with columns x_b = n(., b) / T_b. Empty documents give zero columns.
inline SparseReal frequency_matrix(const TermDocMatrix& m) {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(m.nonzeros());
  for (std::size_t d = 0; d < m.num_documents(); ++d) {
    const double len = static_cast<double>(m.doc_lengths()[d]);
    for (const auto& e : m.column(d))
      entries.emplace_back(static_cast<int>(e.word), static_cast<int>(d), static_cast<double>(e.count) / len);
  }
  SparseReal x(static_cast<Eigen::Index>(m.num_words()), static_cast<Eigen::Index>(m.num_documents()));
  x.setFromTriplets(entries.begin(), entries.end());
  x.makeCompressed();
  return x;
}

/// Rank-s factorization X ~ sum_k theta_k f_k v_k^T.
struct FactorDecomposition {
  Eigen::VectorXd thetas;        // descending, positive
  Eigen::MatrixXd word_factors;  // m x s, orthonormal columns f_k
  Eigen::MatrixXd book_factors;  // B x s, orthonormal columns v_k
  /// All eigenvalues of X X^T (equivalently X^T X), descending, length min(m, B).
  Eigen::VectorXd gram_eigenvalues;

  std::size_t rank() const noexcept { return static_cast<std::size_t>(thetas.size()); }

  /// Coordinates of document b in factor space.
  Eigen::VectorXd book_coordinates(std::size_t b) const {
    return book_factors.row(static_cast<Eigen::Index>(b)).transpose();
  }

  Eigen::MatrixXd reconstruction() const {
    return word_factors * thetas.asDiagonal() * book_factors.transpose();
  }

  /// Z = X - sum_k theta_k f_k v_k^T
  Eigen::MatrixXd residual(const SparseReal& x) const { return Eigen::MatrixXd(x) - reconstruction(); }
};

/// v_k = X^T f_k / theta_k.
inline Eigen::MatrixXd book_factors_from_word_factors(const SparseReal& x, const Eigen::VectorXd& thetas,
                                                      const Eigen::MatrixXd& word_factors) {
  if (word_factors.rows() != x.rows() || word_factors.cols() != thetas.size())
    throw Error("book_factors_from_word_factors: dimension mismatch");
  for (Eigen::Index k = 0; k < thetas.size(); ++k)
    if (!(thetas[k] > 0)) throw Error("book_factors_from_word_factors: theta_" + std::to_string(k + 1) + " is not positive");
  Eigen::MatrixXd v = x.transpose() * word_factors;
  for (Eigen::Index k = 0; k < thetas.size(); ++k) v.col(k) /= thetas[k];
  return v;
}

namespace detail {

/// Dense lower triangle of A A^T for a column-major sparse A (rows x rows).
inline Eigen::MatrixXd gram_lower(const SparseReal& a) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(a.rows(), a.rows());
  std::vector<std::pair<Eigen::Index, double>> nz;
  for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
    nz.clear();
    for (SparseReal::InnerIterator it(a, c); it; ++it) nz.emplace_back(it.row(), it.value());
    for (std::size_t i = 0; i < nz.size(); ++i)
      for (std::size_t j = 0; j <= i; ++j) g(nz[i].first, nz[j].first) += nz[i].second * nz[j].second;
  }
  return g;
}

inline void fix_sign(Eigen::Ref<Eigen::VectorXd> f) {
  Eigen::Index arg = 0;
  f.cwiseAbs().maxCoeff(&arg);
  if (f[arg] < 0) f = -f;
}

}  // namespace detail

/// Top-s singular triples of X.
///
/// Eigen-decomposes the smaller Gram matrix (X X^T when m <= B), so the
/// large B x B product is never formed when words are the short side. Each
/// f_k is signed so its largest-magnitude entry is positive and the book
/// factors follow from v_k = X^T f_k / theta_k. A numerically zero theta_k
/// within the requested rank is an error unless `lower_rank_ok`, in which
/// case the decomposition stops at the numerical rank.
inline FactorDecomposition truncated_svd(const SparseReal& x, std::size_t s, bool lower_rank_ok = false) {
  const auto m = static_cast<std::size_t>(x.rows());
  const auto b = static_cast<std::size_t>(x.cols());
  if (s < 1 || s > std::min(m, b))
    throw Error("truncated_svd: rank " + std::to_string(s) + " outside [1, " + std::to_string(std::min(m, b)) + "]");

  const bool words_side = m <= b;
  SparseReal xt;
  if (!words_side) xt = x.transpose();
  const SparseReal& a = words_side ? x : xt;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(detail::gram_lower(a), Eigen::ComputeEigenvectors);
  if (eig.info() != Eigen::Success) throw Error("truncated_svd: eigensolver failed");

  const Eigen::Index n = eig.eigenvalues().size();
  FactorDecomposition out;
  out.gram_eigenvalues = eig.eigenvalues().reverse().cwiseMax(0.0);
  auto si = static_cast<Eigen::Index>(s);
  out.thetas = out.gram_eigenvalues.head(si).cwiseSqrt();
  const double floor = std::sqrt(std::numeric_limits<double>::epsilon() * static_cast<double>(n)) *
                       (out.thetas.size() ? out.thetas[0] : 0.0);
  for (Eigen::Index k = 0; k < si; ++k) {
    if (out.thetas[k] > floor) continue;
    if (!lower_rank_ok || k == 0)
      throw Error("truncated_svd: singular value " + std::to_string(k + 1) + " is numerically zero");
    si = k;
    out.thetas.conservativeResize(si);
    break;
  }

  Eigen::MatrixXd top = eig.eigenvectors().rowwise().reverse().leftCols(si);
  if (words_side) {
    out.word_factors = std::move(top);
  } else {
    out.word_factors.resize(x.rows(), si);
    for (Eigen::Index k = 0; k < si; ++k) {
      out.word_factors.col(k) = x * top.col(k) / out.thetas[k];
      out.word_factors.col(k).normalize();
    }
  }
  for (Eigen::Index k = 0; k < si; ++k) detail::fix_sign(out.word_factors.col(k));
  out.book_factors = book_factors_from_word_factors(x, out.thetas, out.word_factors);
  return out;
}

/// Rule for separating outlier eigenvalues from the bulk: the bulk edge is
/// median + c * IQR of the lowest `bulk_fraction` of the spectrum.
struct OutlierPolicy {
  double c = 3.0;
  double bulk_fraction = 0.9;
};

struct SpectralGap {
  std::size_t index;  // gap between eigenvalue index and index + 1 (0-based)
  double size;
};

struct OutlierReport {
  std::size_t count = 0;
  double bulk_edge = 0;
  double bulk_median = 0;
  double bulk_iqr = 0;
  OutlierPolicy policy;
  /// Largest consecutive spacings, biggest first.
  std::vector<SpectralGap> largest_gaps;
};

namespace detail {

/// Linear-interpolation quantile of sorted ascending data.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

inline OutlierReport count_outliers(std::span<const double> eigenvalues, const OutlierPolicy& policy = {},
                                    std::size_t gaps_reported = 5) {
  if (eigenvalues.size() < 10) throw Error("count_outliers: need at least 10 eigenvalues");
  if (!(policy.bulk_fraction > 0 && policy.bulk_fraction <= 1)) throw Error("count_outliers: bulk_fraction must be in (0, 1]");
  std::vector<double> desc(eigenvalues.begin(), eigenvalues.end());
  std::sort(desc.begin(), desc.end(), std::greater<>());

  const auto bulk_n = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(policy.bulk_fraction * static_cast<double>(desc.size()))));
  std::vector<double> bulk(desc.end() - static_cast<std::ptrdiff_t>(bulk_n), desc.end());
  std::sort(bulk.begin(), bulk.end());

  OutlierReport r;
  r.policy = policy;
  r.bulk_median = detail::quantile_sorted(bulk, 0.5);
  r.bulk_iqr = detail::quantile_sorted(bulk, 0.75) - detail::quantile_sorted(bulk, 0.25);
  r.bulk_edge = r.bulk_median + policy.c * r.bulk_iqr;
  r.count = static_cast<std::size_t>(std::count_if(desc.begin(), desc.end(), [&](double v) { return v > r.bulk_edge; }));

  std::vector<SpectralGap> gaps;
  for (std::size_t i = 0; i + 1 < desc.size(); ++i) gaps.push_back({i, desc[i] - desc[i + 1]});
  std::stable_sort(gaps.begin(), gaps.end(), [](const SpectralGap& a, const SpectralGap& b) { return a.size > b.size; });
  gaps.resize(std::min(gaps.size(), gaps_reported));
  r.largest_gaps = std::move(gaps);
  return r;
}

struct LeadingVectorReport {
  bool all_positive = false;
  std::size_t nonpositive_entries = 0;
  /// cos(f_1, mean frequency vector)
  double cosine_to_mean = 0;
};

inline LeadingVectorReport leading_vector_positivity(const FactorDecomposition& fd, const SparseReal& x) {
  if (fd.rank() == 0) throw Error("leading_vector_positivity: empty decomposition");
  const Eigen::VectorXd f1 = fd.word_factors.col(0);
  LeadingVectorReport r;
  r.nonpositive_entries = static_cast<std::size_t>((f1.array() <= 0.0).count());
  r.all_positive = r.nonpositive_entries == 0;
  Eigen::VectorXd mean = x * Eigen::VectorXd::Ones(x.cols());
  const double norm = mean.norm() * f1.norm();
  r.cosine_to_mean = norm > 0 ? f1.dot(mean) / norm : 0.0;
  return r;
}

}  // namespace lexvar
