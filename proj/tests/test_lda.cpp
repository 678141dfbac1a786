#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>
#include <json.hpp>

#include "lexvar/lda.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace lexvar;

namespace {

using Topics = std::vector<std::vector<double>>;

// Four common topics on disjoint 49-word blocks, one rare topic on three
// marker words at the front of the vocabulary.
Topics marker_topics() {
  Topics t(5, std::vector<double>(200, 0.0));
  for (int z = 0; z < 4; ++z)
    for (int w = 0; w < 49; ++w) t[z][3 + z * 49 + w] = 1.0 / 49;
  for (int w = 0; w < 3; ++w) t[4][w] = 1.0 / 3;
  return t;
}

TermDocMatrix lda_corpus(const std::vector<double>& alpha, const Topics& topics, std::size_t docs, std::size_t length,
                         std::uint64_t seed) {
  return fixture::dense_counts(oracle::sample_lda(alpha, topics, docs, length, seed));
}

Eigen::MatrixXd as_dense(const RowMatrix& m) { return m; }

}  // namespace

TEST(JointMoment, TrivialCases) {
  std::vector<double> a{0.3, 2.0, 5.0};
  std::vector<unsigned> zero{0, 0, 0};
  EXPECT_EQ(dirichlet_joint_moment(a, zero), 1.0);
  std::vector<double> flat{1.0, 1.0};
  std::vector<unsigned> first{1, 0};
  EXPECT_NEAR(dirichlet_joint_moment(flat, first), 0.5, 1e-14);
  for (unsigned k : {0u, 1u, 7u}) {
    std::vector<double> one{0.4};
    std::vector<unsigned> kk{k};
    EXPECT_NEAR(dirichlet_joint_moment(one, kk), 1.0, 1e-14);
  }
}

TEST(JointMoment, Errors) {
  std::vector<double> bad{0.5, 0.0};
  std::vector<unsigned> k{1, 1};
  EXPECT_THROW(dirichlet_joint_moment(bad, k), Error);
  std::vector<double> a{0.5, 1.0, 1.0};
  EXPECT_THROW(dirichlet_joint_moment(a, k), Error);
}

TEST(JointMoment, MatchesMonteCarlo) {
  std::vector<double> a{0.5, 1.0, 2.0};
  std::vector<unsigned> k{2, 1, 0};
  auto mc = oracle::dirichlet_moment(a, k, 1000000, 42);
  EXPECT_LT(std::abs(dirichlet_joint_moment(a, k) - mc.value), 3 * mc.se);
}

TEST(TwoTopic, EqualBetasHaveNoVariance) {
  for (auto regime : {TwoTopicRegime::symmetric, TwoTopicRegime::asymmetric}) {
    auto r = two_topic_moments(regime, 0.3, 0.07, 0.07);
    EXPECT_NEAR(r.variance, 0.0, 1e-18);
    EXPECT_NEAR(r.mean, 0.07, 1e-15);
  }
}

TEST(TwoTopic, SymmetricClosedForm) {
  auto r = two_topic_moments(TwoTopicRegime::symmetric, 0.5, 0.2, 0.1);
  EXPECT_NEAR(r.mean, 0.15, 1e-15);
  EXPECT_NEAR(r.variance, 1.25e-3, 1e-15);
  EXPECT_NEAR(r.xi, 0.05, 1e-15);
  auto mc = oracle::mixture_moments({0.5, 0.5}, {0.2, 0.1}, 1000000, 7);
  EXPECT_LT(std::abs(r.mean - mc.mean.value), 3 * mc.mean.se);
  EXPECT_LT(std::abs(r.variance - mc.variance.value), 3 * mc.variance.se);
}

TEST(TwoTopic, AsymmetricClosedForm) {
  auto r = two_topic_moments(TwoTopicRegime::asymmetric, 0.1, 0.2, 0.1);
  EXPECT_NEAR(r.mean, 0.21 / 1.1, 1e-15);
  EXPECT_NEAR(r.variance, 0.1 / (2.1 * 1.21) * 0.01, 1e-15);
  EXPECT_NEAR(r.gamma, 2.0, 1e-15);
  auto mc = oracle::mixture_moments({1.0, 0.1}, {0.2, 0.1}, 1000000, 8);
  EXPECT_LT(std::abs(r.mean - mc.mean.value), 3 * mc.mean.se);
  EXPECT_LT(std::abs(r.variance - mc.variance.value), 3 * mc.variance.se);
}

TEST(TwoTopic, ClosedFormsAgreeWithJointMoments) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double alpha = std::exp(-6 + 8 * u(rng));
    const double b1 = u(rng), b2 = u(rng);
    for (auto regime : {TwoTopicRegime::symmetric, TwoTopicRegime::asymmetric}) {
      auto r = two_topic_moments(regime, alpha, b1, b2);
      auto a = two_topic_alpha(regime, alpha);
      std::vector<double> beta{b1, b2};
      auto mm = mixture_moments(a, beta);
      EXPECT_NEAR(r.mean, mm.mean, 1e-12);
      EXPECT_NEAR(r.variance, mm.variance, 1e-12);
      EXPECT_GE(r.variance, 0.0);
      EXPECT_LE(r.variance, r.mean * (1 - r.mean) + 1e-15);
    }
  }
}

TEST(TwoTopic, SymmetricLimits) {
  EXPECT_LT(two_topic_moments(TwoTopicRegime::symmetric, 1e9, 0.3, 0.1).variance, 1e-10);
  auto r = two_topic_moments(TwoTopicRegime::symmetric, 1e-9, 0.3, 0.1);
  EXPECT_NEAR(r.variance, r.xi * r.xi, 1e-9);
}

TEST(TwoTopic, SymmetricVarianceBoundedBySquaredMean) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 1000; ++rep) {
    const double alpha = std::exp(-9 + 14 * u(rng));
    auto r = two_topic_moments(TwoTopicRegime::symmetric, alpha, u(rng), u(rng));
    EXPECT_LE(r.variance, r.mean * r.mean * (1 + 1e-12));
  }
}

TEST(TwoTopic, Errors) {
  EXPECT_THROW(two_topic_moments(TwoTopicRegime::symmetric, 0.0, 0.1, 0.2), Error);
  EXPECT_THROW(two_topic_moments(TwoTopicRegime::asymmetric, 0.5, -0.1, 0.2), Error);
  EXPECT_THROW(two_topic_moments(TwoTopicRegime::asymmetric, 0.5, 0.1, 1.5), Error);
}

TEST(Burstiness, SmallAlphaExample) {
  auto r = burstiness_regime_check(1e-3, 0.05, 0.05);
  EXPECT_NEAR(r.asymptotic_ratio, 125.0, 1e-9);
  EXPECT_NEAR(r.exact_ratio, 125.0, 125.0 * 0.01);
  EXPECT_TRUE(r.asymptotics_applicable);
  EXPECT_TRUE(r.bursty);
  EXPECT_DOUBLE_EQ(r.band_lower, 5e-5);
  EXPECT_DOUBLE_EQ(r.band_upper, 0.05);
}

TEST(Burstiness, LargeGammaKillsRatio) {
  double prev = 1e300;
  for (double g : {1.0, 1e2, 1e4, 1e5}) {
    auto r = burstiness_regime_check(1e-6, g, 0.05);
    EXPECT_LT(r.asymptotic_ratio, prev);
    prev = r.asymptotic_ratio;
  }
  auto r = burstiness_regime_check(1e-6, 1e5, 0.05);
  EXPECT_LT(r.exact_ratio, 1e-3);
  EXPECT_FALSE(r.bursty);
  EXPECT_FALSE(r.in_band);
}

TEST(Burstiness, LargeAlphaIsInapplicable) {
  EXPECT_FALSE(burstiness_regime_check(1.0, 0.05, 0.05).asymptotics_applicable);
}

TEST(LdaFit, ElboMonotoneOnRandomInput) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::poisson_distribution<int> pois(0.8);
    std::vector<std::vector<Count>> c(40, std::vector<Count>(30));
    for (auto& row : c)
      for (auto& v : row) v = static_cast<Count>(pois(rng));
    auto m = fixture::dense_counts(c);
    LdaOptions opt;
    opt.max_iters = 80;
    auto fit = lda_fit(m, 3, seed, opt);
    for (std::size_t i = 1; i < fit.elbo_trace.size(); ++i)
      EXPECT_GE(fit.elbo_trace[i], fit.elbo_trace[i - 1] - 1e-6 * std::abs(fit.elbo_trace[i - 1]));
    EXPECT_TRUE((fit.alpha.array() > 0).all());
    for (Eigen::Index z = 0; z < fit.beta.rows(); ++z) EXPECT_NEAR(fit.beta.row(z).sum(), 1.0, 1e-10);
  }
}

TEST(LdaFit, PlantedTopicsRecovered) {
  const auto topics = marker_topics();
  const std::vector<double> alpha{0.1, 0.1, 0.1, 0.1, 0.01};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto m = lda_corpus(alpha, topics, 2000, 500, seed);
    auto fit = lda_fit(m, 5, seed * 7 + 3);
    std::vector<int> perm;
    EXPECT_LT(oracle::best_permutation_tv(as_dense(fit.beta), topics, &perm), 0.1) << "seed " << seed;
    EXPECT_LT(fit.alpha[perm[4]], fit.alpha[perm[0]]);
  }
}

TEST(LdaFit, RareTopicMarkersLead) {
  const auto topics = marker_topics();
  auto m = lda_corpus({0.1, 0.1, 0.1, 0.1, 0.01}, topics, 2000, 500, 3);
  auto fit = lda_fit(m, 5, 24);
  std::vector<double> mean(m.num_words(), 0.0);
  for (std::size_t d = 0; d < m.num_documents(); ++d)
    for (const auto& e : m.column(d)) mean[e.word] += static_cast<double>(e.count) / 500.0 / 2000.0;
  auto report = rare_topic_report(fit, mean, 3);
  ASSERT_EQ(report.size(), 5u);
  std::set<WordId> top;
  for (const auto& w : report.front().words) top.insert(w.word);
  EXPECT_EQ(top, (std::set<WordId>{0, 1, 2}));
  for (std::size_t i = 1; i < report.size(); ++i) EXPECT_LE(report[i - 1].alpha, report[i].alpha);
  EXPECT_GT(report.front().words.front().marker_strength, 10.0);
}

TEST(LdaFit, SymmetricAlphaRecovered) {
  Topics topics(2, std::vector<double>(100, 0.0));
  for (int w = 0; w < 50; ++w) topics[0][w] = topics[1][50 + w] = 1.0 / 50;
  auto m = lda_corpus({0.5, 0.5}, topics, 2000, 500, 77);
  auto fit = lda_fit(m, 2, 5);
  for (int z = 0; z < 2; ++z) {
    EXPECT_GT(fit.alpha[z], 0.35);
    EXPECT_LT(fit.alpha[z], 0.65);
  }
}

TEST(LdaFit, DeterministicAndErrors) {
  std::vector<std::vector<Count>> c{{3, 0, 1, 2}, {0, 4, 1, 0}, {2, 2, 0, 1}};
  auto m = fixture::dense_counts(c);
  auto a = lda_fit(m, 2, 9), b = lda_fit(m, 2, 9);
  EXPECT_EQ(a.elbo_trace, b.elbo_trace);
  EXPECT_EQ(as_dense(a.beta), as_dense(b.beta));
  EXPECT_THROW(lda_fit(m, 1, 9), Error);
  auto empty = fixture::dense_counts({{0, 0}, {0, 0}});
  EXPECT_THROW(lda_fit(empty, 2, 1), Error);
}

TEST(LdaFit, ElboOfFittedModelMatchesTrace) {
  auto m = lda_corpus({0.2, 0.2}, {{0.5, 0.5, 0, 0}, {0, 0, 0.5, 0.5}}, 50, 40, 2);
  LdaOptions opt;
  opt.max_iters = 30;
  auto fit = lda_fit(m, 2, 3, opt);
  EXPECT_GE(lda_elbo(m, fit, opt), fit.elbo_trace.back() - 1e-6 * std::abs(fit.elbo_trace.back()));
}

TEST(RareTopicReport, IdenticalRowsHaveNoMarkers) {
  LdaModel model;
  model.alpha = Eigen::VectorXd::Constant(3, 0.2);
  model.beta = RowMatrix(3, 4);
  for (int z = 0; z < 3; ++z) model.beta.row(z) << 0.4, 0.3, 0.2, 0.1;
  std::vector<double> mean{0.4, 0.3, 0.2, 0.1};
  for (const auto& t : rare_topic_report(model, mean, 4))
    for (const auto& w : t.words) EXPECT_NEAR(w.marker_strength, 1.0, 1e-12);
}

TEST(LdaIo, WritesModelAndReport) {
  std::vector<std::vector<Count>> c{{3, 0, 1, 2}, {0, 4, 1, 0}, {2, 2, 0, 1}};
  auto m = fixture::dense_counts(c);
  auto fit = lda_fit(m, 2, 9);
  auto dir = oracle::temp_dir("lda_io");
  write_lda_model(fit, m.words(), m.doc_ids(), dir);
  auto header = nlohmann::json::parse(oracle::slurp(dir / "model.json"));
  EXPECT_EQ(header["topics"], 2);
  EXPECT_EQ(header["alpha"].size(), 2u);
  EXPECT_EQ(header["elbo_trace"].size(), fit.elbo_trace.size());
  std::vector<double> mean{0.3, 0.3, 0.2, 0.2};
  write_rare_topic_report(rare_topic_report(fit, mean, 2), m.words(), dir / "rare.csv");
  auto text = oracle::slurp(dir / "rare.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "topic,alpha,word,beta,corpus_mean,marker_strength");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  const auto beta = oracle::slurp(dir / "beta.csv");
  EXPECT_EQ(std::count(beta.begin(), beta.end(), '\n'), 5);
}
