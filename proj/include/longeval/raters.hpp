#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "longeval/gateway.hpp"
#include "longeval/question_gen.hpp"

namespace longeval {

struct AbsoluteVerdict {
  std::string question_id;
  std::string system_id;
  bool entailed = false;
  std::vector<std::string> evidence;
  std::string rater_id;
};

enum class RawVerdict { A, B, None, Equal };

std::string raw_verdict_name(RawVerdict v);
RawVerdict raw_verdict_from_name(const std::string& name);

struct PairwiseJudgment {
  std::string question_id;
  std::string system_a;
  std::string system_b;
  bool swapped = false;  // answer_b was shown in the "Answer A" slot
  RawVerdict raw_verdict = RawVerdict::None;
  std::optional<std::string> resolved_winner;
  std::vector<std::string> evidence;
  std::string rater_id;

  bool excluded() const { return raw_verdict == RawVerdict::None; }
};

struct WinMatrix {
  std::vector<std::string> systems;
  std::vector<std::vector<double>> w;  // w[i][j]: wins of i over j

  std::size_t index_of(const std::string& system_id) const;
  double total() const;
};

enum class EqualPolicy { half_win, exclude };

// --- verdict payload extraction ---------------------------------------------

// Locates the first well-formed verdict object anywhere in the response.
// Accepts strict JSON and the single-quoted object shape of the rating
// payloads; also tolerates a response continuing the prompt's trailing
// "{'answer_is_entailed_by_context':" / "{'system is better':" prefill.
struct ExtractedVerdict {
  std::string value;  // the verdict field
  std::vector<std::string> evidence;
};
std::optional<ExtractedVerdict> extract_verdict_object(
    std::string_view response, const std::string& field_name);

// --- rating protocols --------------------------------------------------------

struct RaterRequestOptions {
  std::string rater_id;
  std::string model_id;
  std::size_t max_output_tokens = 1024;
  double temperature = 0.0;
  std::optional<std::int64_t> seed = 0;
};

// Absolute entailment rating against a source context. Malformed output is
// re-prompted once (bypassing the cache), then VerdictParseError.
AbsoluteVerdict rate_absolute(const std::string& context,
                              const std::string& question,
                              const std::string& answer, Gateway& gateway,
                              Backend& backend,
                              const RaterRequestOptions& options);

// p_hat and the z * sqrt(p(1-p)/n) half-width of a Bernoulli mean.
struct AccuracyCi {
  double p_hat = 0.0;
  double half_width = 0.0;
};
AccuracyCi accuracy_with_ci(std::size_t entailed_count, std::size_t total,
                            double z = 1.96);
AccuracyCi accuracy_with_ci(const std::vector<AbsoluteVerdict>& verdicts,
                            double z = 1.96);

// --- comparison scheduling ---------------------------------------------------

struct ComparisonTask {
  std::string question_id;
  std::string system_a;
  std::string system_b;
  bool swap = false;
};

// Samples c question ids once from the seeded substream and schedules every
// unordered system pair on that same sample, c * n * (n-1) / 2 tasks total.
// Each task carries an independent fair-coin presentation swap.
std::vector<ComparisonTask> schedule_comparisons(
    const std::vector<std::string>& system_ids,
    const std::vector<std::string>& question_ids, std::size_t c,
    std::uint64_t seed);

enum class PairwiseVariant {
  book_context,   // A / B / None
  narrativeqa,    // A / B / None / Equal, book-or-script wording
  ground_truth    // A / B / None / Equal, judged against a reference answer
};

// Side-by-side rating of one scheduled task. `context_or_truth` is the source
// context for the book_context/narrativeqa variants and the ground-truth
// answer for the ground_truth variant. When task.swap is set, answer_b is
// presented in the "Answer A" slot and the parsed verdict is mapped back
// through the swap before the winner is resolved.
PairwiseJudgment rate_pairwise(const ComparisonTask& task,
                               const std::string& context_or_truth,
                               const std::string& question,
                               const std::string& answer_a,
                               const std::string& answer_b, Gateway& gateway,
                               Backend& backend, PairwiseVariant variant,
                               const RaterRequestOptions& options);

// Ground-truth absolute rating: the candidate is correct if it matches either
// of the two reference answers (short-circuits after a yes).
bool rate_ground_truth(const std::string& question,
                       const std::pair<std::string, std::string>& gt_answers,
                       const std::string& answer, Gateway& gateway,
                       Backend& backend, const RaterRequestOptions& options);

// Decisive judgments add 1 to w[winner][loser]; None adds nothing; Equal adds
// 0.5 to both cells under half_win and nothing under exclude.
WinMatrix build_win_matrix(const std::vector<std::string>& systems,
                           const std::vector<PairwiseJudgment>& judgments,
                           EqualPolicy equal_policy = EqualPolicy::half_win);

}  // namespace longeval
