#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "longeval/errors.hpp"
#include "longeval/rank_stats.hpp"
#include "longeval/rng.hpp"

using namespace longeval;

namespace {

WinMatrix matrix_of(std::vector<std::string> systems,
                    std::vector<std::vector<double>> w) {
  WinMatrix m;
  m.systems = std::move(systems);
  m.w = std::move(w);
  return m;
}

PairwiseJudgment decisive(const std::string& question_id,
                          const std::string& a, const std::string& b,
                          bool a_won) {
  PairwiseJudgment j;
  j.question_id = question_id;
  j.system_a = a;
  j.system_b = b;
  j.raw_verdict = a_won ? RawVerdict::A : RawVerdict::B;
  j.resolved_winner = a_won ? a : b;
  return j;
}

// Simulated tournament drawn from the win-probability model itself.
std::vector<PairwiseJudgment> simulate(const std::vector<std::string>& ids,
                                       const std::vector<double>& gamma,
                                       std::size_t per_pair,
                                       std::uint64_t seed) {
  auto gen = rng::substream(seed, "bt_sim");
  std::vector<PairwiseJudgment> judgments;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const double p = win_probability(gamma[i], gamma[j]);
      for (std::size_t k = 0; k < per_pair; ++k) {
        const bool i_wins = rng::unit_real(gen) < p;
        judgments.push_back(decisive("q" + std::to_string(k), ids[i], ids[j],
                                     i_wins));
      }
    }
  }
  return judgments;
}

}  // namespace

TEST_CASE("win_probability follows the strength ratio") {
  SUBCASE("published ratio: 3.4733 vs 0.8159 is 0.8097") {
    CHECK(std::abs(win_probability(3.4733, 0.8159) - 0.8097) < 1e-4);
  }
  SUBCASE("equal strengths are a coin flip") {
    CHECK(win_probability(2.5, 2.5) == 0.5);
  }
  SUBCASE("scale invariance") {
    const double p = win_probability(3.0, 1.0);
    CHECK(win_probability(300.0, 100.0) == doctest::Approx(p));
    CHECK(p == doctest::Approx(0.75));
  }
  SUBCASE("complement identity") {
    auto gen = rng::substream(5, "wp_pairs");
    for (int i = 0; i < 50; ++i) {
      const double gi = 0.01 + rng::unit_real(gen) * 10.0;
      const double gj = 0.01 + rng::unit_real(gen) * 10.0;
      CHECK(win_probability(gi, gj) + win_probability(gj, gi) ==
            doctest::Approx(1.0));
    }
  }
  SUBCASE("non-positive strengths are rejected") {
    CHECK_THROWS_AS(win_probability(0.0, 1.0), Error);
    CHECK_THROWS_AS(win_probability(1.0, -2.0), Error);
  }
}

TEST_CASE("log_likelihood evaluates the pairwise model") {
  SUBCASE("all strengths equal: -D ln 2") {
    const WinMatrix m = matrix_of({"a", "b", "c"}, {{0, 3, 1}, {2, 0, 4}, {5, 2, 0}});
    const double total = 3 + 1 + 2 + 4 + 5 + 2;
    CHECK(log_likelihood(m, {1.0, 1.0, 1.0}) ==
          doctest::Approx(-total * std::log(2.0)));
  }
  SUBCASE("zero matrix scores zero") {
    const WinMatrix m = matrix_of({"a", "b"}, {{0, 0}, {0, 0}});
    CHECK(log_likelihood(m, {0.3, 7.0}) == 0.0);
  }
  SUBCASE("random 3x3 case against a term-by-term hand evaluation") {
    const WinMatrix m = matrix_of({"a", "b", "c"}, {{0, 2, 1}, {1, 0, 3}, {0, 1, 0}});
    const std::vector<double> g = {2.0, 1.0, 0.5};
    // By hand: 2[ln2-ln3] + 1[ln2-ln2.5] + 1[ln1-ln3] + 3[ln1-ln1.5]
    //        + 0          + 1[ln0.5-ln1.5]
    const double expected = 2 * (std::log(2.0) - std::log(3.0)) +
                            1 * (std::log(2.0) - std::log(2.5)) +
                            1 * (0.0 - std::log(3.0)) +
                            3 * (0.0 - std::log(1.5)) +
                            1 * (std::log(0.5) - std::log(1.5));
    CHECK(log_likelihood(m, g) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("non-positive gamma is rejected") {
    const WinMatrix m = matrix_of({"a", "b"}, {{0, 1}, {1, 0}});
    CHECK_THROWS_AS(log_likelihood(m, {1.0, 0.0}), Error);
  }
}

TEST_CASE("two-player fit matches the empirical odds analytically") {
  // With w12=3 and w21=1 the likelihood peaks where gamma1/(gamma1+gamma2)
  // equals 3/4, i.e. at odds of exactly 3.
  const WinMatrix m = matrix_of({"p", "q"}, {{0, 3}, {1, 0}});
  const RankingResult fit = fit_bradley_terry(m);
  CHECK(fit.converged);
  CHECK(std::abs(fit.systems[0].gamma / fit.systems[1].gamma - 3.0) < 1e-8);
  // Normalization: betas sum to zero.
  CHECK(std::abs(fit.systems[0].beta + fit.systems[1].beta) < 1e-12);
  CHECK(fit.systems[0].n_effective == doctest::Approx(4.0));
}

TEST_CASE("fully symmetric win matrix fits to all-zero betas") {
  const WinMatrix m =
      matrix_of({"a", "b", "c"}, {{0, 5, 2}, {5, 0, 7}, {2, 7, 0}});
  const RankingResult fit = fit_bradley_terry(m);
  for (const SystemStrength& s : fit.systems) {
    CHECK(std::abs(s.beta) < 1e-9);
  }
  CHECK(fit.epsilon_used == 0.0);
}

TEST_CASE("synthetic tournament recovers the generating strengths") {
  const std::vector<std::string> ids = {"s1", "s2", "s3", "s4"};
  const std::vector<double> truth = {4.0, 2.0, 1.0, 0.5};
  const auto judgments = simulate(ids, truth, 200, 20240601);
  const WinMatrix m = build_win_matrix(ids, judgments);
  const RankingResult fit = fit_bradley_terry(m);

  // Exact rank order.
  CHECK(fit.systems[0].gamma > fit.systems[1].gamma);
  CHECK(fit.systems[1].gamma > fit.systems[2].gamma);
  CHECK(fit.systems[2].gamma > fit.systems[3].gamma);
  // Every pairwise strength ratio within 15% of the generating ratio.
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i == j) continue;
      const double fitted = fit.systems[i].gamma / fit.systems[j].gamma;
      const double expected = truth[i] / truth[j];
      CHECK(std::abs(fitted / expected - 1.0) < 0.15);
    }
  }
}

TEST_CASE("mm sweeps never decrease the log-likelihood") {
  auto gen = rng::substream(31337, "mm_monotone_unit");
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 2 + rng::bounded(gen, 5);  // up to 6 systems
    WinMatrix matrix;
    for (std::size_t i = 0; i < m; ++i) {
      matrix.systems.push_back("s" + std::to_string(i));
    }
    matrix.w.assign(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i != j) matrix.w[i][j] = static_cast<double>(rng::bounded(gen, 20));
      }
    }
    BtFitOptions options;
    options.track_likelihood = true;
    const RankingResult fit = fit_bradley_terry(matrix, options);
    REQUIRE(fit.sweep_log_likelihood.size() >= 2);
    for (std::size_t s = 1; s < fit.sweep_log_likelihood.size(); ++s) {
      CHECK(fit.sweep_log_likelihood[s] >=
            fit.sweep_log_likelihood[s - 1] - 1e-9);
    }
  }
}

TEST_CASE("fit is equivariant under system permutation") {
  const WinMatrix m =
      matrix_of({"a", "b", "c"}, {{0, 9, 4}, {3, 0, 6}, {2, 5, 0}});
  const WinMatrix permuted =
      matrix_of({"c", "a", "b"}, {{0, 2, 5}, {4, 0, 9}, {6, 3, 0}});
  const RankingResult fit = fit_bradley_terry(m);
  const RankingResult fit_p = fit_bradley_terry(permuted);
  std::map<std::string, double> beta, beta_p;
  for (const auto& s : fit.systems) beta[s.system_id] = s.beta;
  for (const auto& s : fit_p.systems) beta_p[s.system_id] = s.beta;
  for (const auto& [id, value] : beta) {
    CHECK(beta_p.at(id) == doctest::Approx(value).epsilon(1e-9));
  }
}

TEST_CASE("degenerate comparison graphs") {
  SUBCASE("zero-win system with regularization disabled raises") {
    const WinMatrix m = matrix_of({"a", "b"}, {{0, 2}, {0, 0}});
    BtFitOptions options;
    options.epsilon = 0.0;
    CHECK_THROWS_AS(fit_bradley_terry(m, options),
                    DegenerateComparisonGraphError);
  }
  SUBCASE("disconnected components with regularization disabled raise") {
    // a<->b connected, c<->d connected, but the halves never met.
    const WinMatrix m = matrix_of({"a", "b", "c", "d"},
                                  {{0, 2, 0, 0},
                                   {1, 0, 0, 0},
                                   {0, 0, 0, 3},
                                   {0, 0, 1, 0}});
    BtFitOptions options;
    options.epsilon = 0.0;
    CHECK_THROWS_AS(fit_bradley_terry(m, options),
                    DegenerateComparisonGraphError);
  }
  SUBCASE("epsilon regularization repairs and reports itself") {
    const WinMatrix m = matrix_of({"a", "b"}, {{0, 2}, {0, 0}});
    const RankingResult fit = fit_bradley_terry(m);
    CHECK(fit.epsilon_used == 0.01);
    CHECK(fit.converged);
    CHECK(fit.systems[0].beta > fit.systems[1].beta);
  }
  SUBCASE("initial-scale invariance: zero matrix fits flat") {
    const WinMatrix m = matrix_of({"a", "b", "c"},
                                  {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
    const RankingResult fit = fit_bradley_terry(m);
    for (const auto& s : fit.systems) CHECK(std::abs(s.beta) < 1e-12);
  }
}

TEST_CASE("bootstrap percentile intervals") {
  const std::vector<std::string> ids = {"a", "b"};

  SUBCASE("B = 1 degenerates to that replicate's estimate") {
    const auto judgments = simulate(ids, {4.0, 1.0}, 50, 99);
    BootstrapOptions options;
    options.replicates = 1;
    options.seed = 7;
    const RankingResult result = bootstrap_ci(ids, judgments, options);
    for (const auto& s : result.systems) {
      CHECK(s.ci_low == s.ci_high);
    }
  }

  SUBCASE("unanimous wins separate the intervals") {
    std::vector<PairwiseJudgment> judgments;
    for (int q = 0; q < 30; ++q) {
      judgments.push_back(decisive("q" + std::to_string(q), "a", "b", true));
    }
    BootstrapOptions options;
    options.replicates = 200;
    options.seed = 3;
    const RankingResult result = bootstrap_ci(ids, judgments, options);
    CHECK(result.systems[0].ci_low > result.systems[1].ci_high);
  }

  SUBCASE("matches an independent re-implementation of the resampling loop") {
    const auto judgments = simulate(ids, {4.0, 1.0}, 200, 424242);
    BootstrapOptions options;
    options.replicates = 300;
    options.seed = 17;
    const RankingResult result = bootstrap_ci(ids, judgments, options);

    // Truth lies inside the interval for this sample.
    const double true_beta = std::log(2.0);  // (4,1) normalized: (2, 1/2)
    CHECK(result.systems[0].ci_low <= true_beta);
    CHECK(true_beta <= result.systems[0].ci_high);

    // Re-run the resampling loop from scratch: same substream, own
    // group-gather / refit / percentile code.
    std::map<std::string, std::vector<PairwiseJudgment>> by_question;
    for (const auto& j : judgments) by_question[j.question_id].push_back(j);
    std::vector<const std::vector<PairwiseJudgment>*> groups;
    for (const auto& [id, group] : by_question) groups.push_back(&group);
    auto gen = rng::substream(17, "bootstrap/questions");
    std::vector<double> betas_a;
    for (std::size_t b = 0; b < 300; ++b) {
      std::vector<PairwiseJudgment> sample;
      for (std::size_t d = 0; d < groups.size(); ++d) {
        const auto* group = groups[rng::bounded(gen, groups.size())];
        sample.insert(sample.end(), group->begin(), group->end());
      }
      const RankingResult fit =
          fit_bradley_terry(build_win_matrix(ids, sample));
      betas_a.push_back(fit.systems[0].beta);
    }
    std::sort(betas_a.begin(), betas_a.end());
    auto quantile = [&](double q) {
      const double pos = q * static_cast<double>(betas_a.size() - 1);
      const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
      const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
      return betas_a[lo] + (pos - lo) * (betas_a[hi] - betas_a[lo]);
    };
    CHECK(result.systems[0].ci_low ==
          doctest::Approx(quantile(0.025)).epsilon(1e-12));
    CHECK(result.systems[0].ci_high ==
          doctest::Approx(quantile(0.975)).epsilon(1e-12));
  }

  SUBCASE("empty judgments are rejected") {
    BootstrapOptions options;
    CHECK_THROWS_AS(bootstrap_ci(ids, {}, options), Error);
  }
}

TEST_CASE("agreement rate and kappa") {
  SUBCASE("356 agreements in 500 trials is 71.2%") {
    // Any 2x2 split with trace 356 and total 500.
    const AgreementReport report =
        agreement({{200, 80}, {64, 156}}, {"A", "B"});
    CHECK(report.total == 500);
    CHECK(report.agreement_rate == 0.712);
  }
  SUBCASE("diagonal matrix is perfect agreement") {
    const AgreementReport report = agreement({{10, 0}, {0, 15}});
    CHECK(report.agreement_rate == 1.0);
    CHECK(report.kappa == 1.0);
  }
  SUBCASE("independent margins give kappa zero") {
    // Outer product of margins (50,50) x (60,40) over 100 trials.
    const AgreementReport report = agreement({{30, 20}, {30, 20}});
    CHECK(report.agreement_rate == doctest::Approx(0.5));
    CHECK(report.kappa == doctest::Approx(0.0));
  }
  SUBCASE("3x3 case against the direct formula") {
    // p_o = 60/81, p_e = (15*19 + 25*28 + 41*34)/81^2 = 2379/6561.
    const AgreementReport report =
        agreement({{10, 2, 3}, {4, 20, 1}, {5, 6, 30}});
    CHECK(report.agreement_rate == doctest::Approx(0.7407407407407407));
    CHECK(report.kappa == doctest::Approx(0.5932568149210904).epsilon(1e-12));
  }
  SUBCASE("empty and malformed matrices are rejected") {
    CHECK_THROWS_AS(agreement({}), Error);
    CHECK_THROWS_AS(agreement({{1, 2}}), Error);
    CHECK_THROWS_AS(agreement({{0, 0}, {0, 0}}), Error);
  }
  SUBCASE("all mass in one matching cell is kappa 1, not an error") {
    const AgreementReport report = agreement({{25, 0}, {0, 0}});
    CHECK(report.kappa == 1.0);
  }
}
