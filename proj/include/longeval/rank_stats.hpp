#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "longeval/raters.hpp"

namespace longeval {

struct SystemStrength {
  std::string system_id;
  double gamma = 1.0;   // strength; geometric mean over systems is 1
  double beta = 0.0;    // ln(gamma); sums to 0
  double ci_low = 0.0;  // bootstrap bounds on beta
  double ci_high = 0.0;
  double n_effective = 0.0;  // comparisons involving this system
};

struct RankingResult {
  std::vector<SystemStrength> systems;
  double epsilon_used = 0.0;  // regularization actually applied
  std::size_t iterations = 0;
  bool converged = false;
  // Log-likelihood of the (regularized) matrix before the first sweep and
  // after each one; only filled when BtFitOptions::track_likelihood is set.
  std::vector<double> sweep_log_likelihood;
};

struct BtFitOptions {
  double tol = 1e-10;   // on max |delta beta| per sweep
  std::size_t max_iter = 10000;
  // Virtual wins added to every ordered pair when some system has no wins or
  // the comparison graph is disconnected. Zero means "never regularize":
  // such inputs then raise DegenerateComparisonGraphError.
  double epsilon = 0.01;
  bool track_likelihood = false;
};

// P(i beats j) = gamma_i / (gamma_i + gamma_j).
double win_probability(double gamma_i, double gamma_j);

// sum_ij [ w_ij ln(gamma_i) - w_ij ln(gamma_i + gamma_j) ], 0*ln(.) = 0.
double log_likelihood(const WinMatrix& w, const std::vector<double>& gammas);

// Minorization-maximization fit from uniform initialization, renormalized to
// geometric mean 1 after every sweep. Confidence bounds are left equal to the
// point estimate; bootstrap_ci fills them in.
RankingResult fit_bradley_terry(const WinMatrix& w, BtFitOptions options = {});

struct BootstrapOptions {
  std::size_t replicates = 1000;
  double level = 0.95;  // percentile interval
  std::uint64_t seed = 0;
  EqualPolicy equal_policy = EqualPolicy::half_win;
  BtFitOptions fit;
};

// Resamples question ids with replacement, rebuilds the win matrix and refits
// per replicate, and takes the percentile interval of the normalized betas.
// Replicates with degenerate graphs are regularized, never dropped.
RankingResult bootstrap_ci(const std::vector<std::string>& systems,
                           const std::vector<PairwiseJudgment>& judgments,
                           const BootstrapOptions& options);

struct AgreementReport {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> confusion;  // rater1 x rater2
  std::size_t total = 0;
  double agreement_rate = 0.0;  // trace / total
  double kappa = 0.0;           // (p_o - p_e) / (1 - p_e)
};

AgreementReport agreement(const std::vector<std::vector<std::size_t>>& confusion,
                          std::vector<std::string> labels = {});

}  // namespace longeval
