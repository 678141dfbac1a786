#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's numerical code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

struct Estimate {
  double value;
  double se;
};

/// Monte Carlo E[prod theta_i^k_i], theta ~ Dir(alpha) via plain Gamma draws.
inline Estimate dirichlet_moment(const std::vector<double>& alpha, const std::vector<unsigned>& k, std::size_t n,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::gamma_distribution<double>> gam;
  for (double a : alpha) gam.emplace_back(a, 1.0);
  double sum = 0, sumsq = 0;
  std::vector<double> g(alpha.size());
  for (std::size_t i = 0; i < n; ++i) {
    double tot = 0;
    for (std::size_t j = 0; j < g.size(); ++j) tot += (g[j] = gam[j](rng));
    double v = 1;
    for (std::size_t j = 0; j < g.size(); ++j) v *= std::pow(g[j] / tot, static_cast<double>(k[j]));
    sum += v;
    sumsq += v * v;
  }
  const double m = sum / static_cast<double>(n);
  const double var = sumsq / static_cast<double>(n) - m * m;
  return {m, std::sqrt(std::max(var, 0.0) / static_cast<double>(n))};
}

struct MixtureEstimate {
  Estimate mean;
  Estimate variance;
};

/// Monte Carlo mean and variance of p = sum_z theta_z beta_z. Theta is
/// drawn by Gamma normalization in log space (log G(a+1) + log U / a), which
/// keeps tiny alphas from collapsing to 0/0.
inline MixtureEstimate mixture_moments(const std::vector<double>& alpha, const std::vector<double>& beta,
                                       std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> p(n);
  std::vector<double> lg(alpha.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      std::gamma_distribution<double> g(alpha[j] + 1.0, 1.0);
      lg[j] = std::log(g(rng)) + std::log(1.0 - unit(rng)) / alpha[j];
    }
    const double top = *std::max_element(lg.begin(), lg.end());
    double tot = 0, acc = 0;
    for (std::size_t j = 0; j < lg.size(); ++j) {
      const double t = std::exp(lg[j] - top);
      tot += t;
      acc += t * beta[j];
    }
    p[i] = acc / tot;
  }
  const double nn = static_cast<double>(n);
  const double m = std::accumulate(p.begin(), p.end(), 0.0) / nn;
  double s2 = 0, s4 = 0;
  for (double v : p) {
    const double d = (v - m) * (v - m);
    s2 += d;
    s4 += d * d;
  }
  const double var = s2 / nn;
  const double var_of_sq = s4 / nn - var * var;
  return {{m, std::sqrt(var / nn)}, {var, std::sqrt(std::max(var_of_sq, 0.0) / nn)}};
}

/// Draws theta ~ Dir(alpha) by normalizing log-space Gamma variates.
inline std::vector<double> dirichlet_draw(const std::vector<double>& alpha, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> lg(alpha.size());
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    std::gamma_distribution<double> g(alpha[j] + 1.0, 1.0);
    lg[j] = std::log(g(rng)) + std::log(1.0 - unit(rng)) / alpha[j];
  }
  const double top = *std::max_element(lg.begin(), lg.end());
  double tot = 0;
  for (auto& v : lg) tot += (v = std::exp(v - top));
  for (auto& v : lg) v /= tot;
  return lg;
}

/// Dense document-by-word counts from an LDA generator with fixed lengths.
inline std::vector<std::vector<std::uint64_t>> sample_lda(const std::vector<double>& alpha,
                                                          const std::vector<std::vector<double>>& topics,
                                                          std::size_t docs, std::size_t length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t n = topics.front().size();
  std::vector<std::vector<std::uint64_t>> out;
  std::vector<double> p(n);
  for (std::size_t d = 0; d < docs; ++d) {
    const auto theta = dirichlet_draw(alpha, rng);
    std::fill(p.begin(), p.end(), 0.0);
    for (std::size_t z = 0; z < topics.size(); ++z)
      for (std::size_t w = 0; w < n; ++w) p[w] += theta[z] * topics[z][w];
    std::discrete_distribution<std::size_t> pick(p.begin(), p.end());
    std::vector<std::uint64_t> c(n, 0);
    for (std::size_t t = 0; t < length; ++t) ++c[pick(rng)];
    out.push_back(std::move(c));
  }
  return out;
}

/// Singular values of a dense matrix, descending.
inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& x) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x);
  return svd.singularValues();
}

/// Smallest over topic permutations of the largest per-topic total-variation
/// distance between estimated and planted rows.
inline double best_permutation_tv(const Eigen::MatrixXd& estimate, const std::vector<std::vector<double>>& truth,
                                  std::vector<int>* assignment = nullptr) {
  const int s = static_cast<int>(truth.size());
  std::vector<int> perm(s);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  do {
    double worst = 0;
    for (int z = 0; z < s; ++z) {
      double tv = 0;
      for (std::size_t w = 0; w < truth[z].size(); ++w) tv += std::abs(estimate(perm[z], static_cast<Eigen::Index>(w)) - truth[z][w]);
      worst = std::max(worst, tv / 2);
    }
    if (worst < best) {
      best = worst;
      if (assignment) *assignment = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Fresh empty directory under the system temp path.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("lexvar_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace oracle
