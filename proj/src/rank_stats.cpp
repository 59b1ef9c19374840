#include "longeval/rank_stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "longeval/errors.hpp"
#include "longeval/rng.hpp"

namespace longeval {

double win_probability(double gamma_i, double gamma_j) {
  if (gamma_i <= 0.0 || gamma_j <= 0.0) {
    throw Error("win_probability: strengths must be positive");
  }
  return gamma_i / (gamma_i + gamma_j);
}

double log_likelihood(const WinMatrix& matrix,
                      const std::vector<double>& gammas) {
  const std::size_t m = matrix.systems.size();
  if (gammas.size() != m) {
    throw Error("log_likelihood: gamma count does not match system count");
  }
  for (double g : gammas) {
    if (g <= 0.0) throw Error("log_likelihood: strengths must be positive");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double w = matrix.w[i][j];
      if (w == 0.0) continue;
      total += w * (std::log(gammas[i]) - std::log(gammas[i] + gammas[j]));
    }
  }
  return total;
}

namespace {

// Ford's condition: in the digraph with an edge i -> j whenever w_ij > 0,
// every system must reach every other. Otherwise some strengths run away to
// 0 or infinity under maximum likelihood.
bool strongly_connected(const WinMatrix& matrix) {
  const std::size_t m = matrix.systems.size();
  if (m <= 1) return true;
  auto reachable = [&](bool forward) {
    std::vector<bool> seen(m, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < m; ++v) {
        const double w = forward ? matrix.w[u][v] : matrix.w[v][u];
        if (w > 0.0 && !seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  };
  return reachable(true) && reachable(false);
}

void normalize_geometric_mean(std::vector<double>& gammas) {
  double log_sum = 0.0;
  for (double g : gammas) log_sum += std::log(g);
  const double log_mean = log_sum / static_cast<double>(gammas.size());
  for (double& g : gammas) g = std::exp(std::log(g) - log_mean);
}

}  // namespace

RankingResult fit_bradley_terry(const WinMatrix& input, BtFitOptions options) {
  const std::size_t m = input.systems.size();
  if (m == 0) throw Error("fit_bradley_terry: no systems");

  WinMatrix matrix = input;
  double epsilon_used = 0.0;
  if (!strongly_connected(matrix)) {
    if (options.epsilon <= 0.0) {
      throw DegenerateComparisonGraphError(
          "comparison graph is not strongly connected and regularization is "
          "disabled");
    }
    epsilon_used = options.epsilon;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i != j) matrix.w[i][j] += options.epsilon;
      }
    }
  }

  std::vector<double> gamma(m, 1.0);
  RankingResult result;
  result.converged = m == 1;
  if (options.track_likelihood) {
    result.sweep_log_likelihood.push_back(log_likelihood(matrix, gamma));
  }

  for (std::size_t iter = 0; iter < options.max_iter && m > 1; ++iter) {
    std::vector<double> prev_beta(m);
    for (std::size_t i = 0; i < m; ++i) prev_beta[i] = std::log(gamma[i]);

    // One batch MM sweep: gamma_i <- W_i / sum_j (w_ij + w_ji)/(gamma_i+gamma_j)
    std::vector<double> next(m);
    for (std::size_t i = 0; i < m; ++i) {
      double wins = 0.0;
      double denom = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (j == i) continue;
        wins += matrix.w[i][j];
        const double pair_count = matrix.w[i][j] + matrix.w[j][i];
        if (pair_count > 0.0) denom += pair_count / (gamma[i] + gamma[j]);
      }
      next[i] = denom > 0.0 ? wins / denom : gamma[i];
    }
    normalize_geometric_mean(next);
    gamma = std::move(next);
    if (options.track_likelihood) {
      result.sweep_log_likelihood.push_back(log_likelihood(matrix, gamma));
    }

    double max_delta = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      max_delta = std::max(max_delta,
                           std::abs(std::log(gamma[i]) - prev_beta[i]));
    }
    result.iterations = iter + 1;
    if (max_delta < options.tol) {
      result.converged = true;
      break;
    }
  }

  result.epsilon_used = epsilon_used;
  result.systems.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    SystemStrength& s = result.systems[i];
    s.system_id = input.systems[i];
    s.gamma = gamma[i];
    s.beta = std::log(gamma[i]);
    s.ci_low = s.beta;
    s.ci_high = s.beta;
    for (std::size_t j = 0; j < m; ++j) {
      s.n_effective += input.w[i][j] + input.w[j][i];
    }
  }
  return result;
}

namespace {

double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace

RankingResult bootstrap_ci(const std::vector<std::string>& systems,
                           const std::vector<PairwiseJudgment>& judgments,
                           const BootstrapOptions& options) {
  if (options.replicates == 0) {
    throw Error("bootstrap_ci: needs at least one replicate");
  }
  if (judgments.empty()) throw Error("bootstrap_ci: no judgments");

  // Questions are the independent sampling unit: a resampled question brings
  // every judgment it participated in, across all pairs.
  std::map<std::string, std::vector<const PairwiseJudgment*>> by_question;
  for (const PairwiseJudgment& j : judgments) {
    by_question[j.question_id].push_back(&j);
  }
  std::vector<const std::vector<const PairwiseJudgment*>*> groups;
  groups.reserve(by_question.size());
  for (const auto& [id, group] : by_question) groups.push_back(&group);
  const std::size_t q = groups.size();

  WinMatrix full = build_win_matrix(systems, judgments, options.equal_policy);
  RankingResult result = fit_bradley_terry(full, options.fit);

  auto gen = rng::substream(options.seed, "bootstrap/questions");
  std::vector<std::vector<double>> betas(systems.size());
  for (auto& v : betas) v.reserve(options.replicates);

  BtFitOptions replicate_fit = options.fit;
  if (replicate_fit.epsilon <= 0.0) {
    replicate_fit.epsilon = 0.01;  // replicates must never abort
  }
  for (std::size_t b = 0; b < options.replicates; ++b) {
    std::vector<PairwiseJudgment> sample;
    sample.reserve(judgments.size());
    for (std::size_t draw = 0; draw < q; ++draw) {
      const auto* group = groups[rng::bounded(gen, q)];
      for (const PairwiseJudgment* j : *group) sample.push_back(*j);
    }
    const WinMatrix w =
        build_win_matrix(systems, sample, options.equal_policy);
    const RankingResult fit = fit_bradley_terry(w, replicate_fit);
    for (std::size_t i = 0; i < systems.size(); ++i) {
      betas[i].push_back(fit.systems[i].beta);
    }
  }

  const double alpha = (1.0 - options.level) / 2.0;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    result.systems[i].ci_low = percentile(betas[i], alpha);
    result.systems[i].ci_high = percentile(betas[i], 1.0 - alpha);
  }
  return result;
}

AgreementReport agreement(
    const std::vector<std::vector<std::size_t>>& confusion,
    std::vector<std::string> labels) {
  const std::size_t k = confusion.size();
  if (k == 0) throw Error("agreement: empty confusion matrix");
  for (const auto& row : confusion) {
    if (row.size() != k) throw Error("agreement: confusion matrix not square");
  }
  AgreementReport report;
  report.confusion = confusion;
  if (labels.empty()) {
    for (std::size_t i = 0; i < k; ++i) {
      labels.push_back("label" + std::to_string(i));
    }
  }
  if (labels.size() != k) {
    throw Error("agreement: label count does not match matrix size");
  }
  report.labels = std::move(labels);

  std::size_t total = 0, trace = 0;
  std::vector<std::size_t> row_sum(k, 0), col_sum(k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      total += confusion[i][j];
      row_sum[i] += confusion[i][j];
      col_sum[j] += confusion[i][j];
    }
    trace += confusion[i][i];
  }
  if (total == 0) throw Error("agreement: confusion matrix has no trials");
  report.total = total;

  const double t = static_cast<double>(total);
  const double p_o = static_cast<double>(trace) / t;
  double p_e = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    p_e += (static_cast<double>(row_sum[i]) / t) *
           (static_cast<double>(col_sum[i]) / t);
  }
  report.agreement_rate = p_o;
  if (1.0 - p_e <= 0.0) {
    if (p_o == 1.0) {
      report.kappa = 1.0;
      return report;
    }
    throw DegenerateMarginalsError();
  }
  report.kappa = (p_o - p_e) / (1.0 - p_e);
  return report;
}

}  // namespace longeval
