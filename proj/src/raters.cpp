#include "longeval/raters.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "longeval/errors.hpp"
#include "longeval/prompts.hpp"
#include "longeval/rng.hpp"
#include "longeval/strings.hpp"

namespace longeval {

using json = nlohmann::json;

std::string raw_verdict_name(RawVerdict v) {
  switch (v) {
    case RawVerdict::A:
      return "A";
    case RawVerdict::B:
      return "B";
    case RawVerdict::None:
      return "None";
    case RawVerdict::Equal:
      return "Equal";
  }
  return "None";
}

RawVerdict raw_verdict_from_name(const std::string& name) {
  if (name == "A") return RawVerdict::A;
  if (name == "B") return RawVerdict::B;
  if (name == "Equal") return RawVerdict::Equal;
  if (name == "None") return RawVerdict::None;
  throw Error("unknown raw verdict: " + name);
}

std::size_t WinMatrix::index_of(const std::string& system_id) const {
  auto it = std::find(systems.begin(), systems.end(), system_id);
  if (it == systems.end()) {
    throw Error("unknown system id in win matrix: " + system_id);
  }
  return static_cast<std::size_t>(it - systems.begin());
}

double WinMatrix::total() const {
  double sum = 0.0;
  for (const auto& row : w) {
    for (double v : row) sum += v;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Verdict payload extraction

namespace {

// The rating payloads are written with single-quoted keys and values; real
// model output may use strict JSON instead. Try strict parsing first, then a
// quote-normalized variant of the same candidate substring.
std::optional<json> parse_object_candidate(std::string_view candidate) {
  try {
    json j = json::parse(candidate);
    if (j.is_object()) return j;
  } catch (const json::exception&) {
  }
  std::string normalized(candidate);
  std::replace(normalized.begin(), normalized.end(), '\'', '"');
  try {
    json j = json::parse(normalized);
    if (j.is_object()) return j;
  } catch (const json::exception&) {
  }
  return std::nullopt;
}

// Balanced-brace substring starting at `open`, or npos.
std::size_t matching_brace(std::string_view s, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == '{') ++depth;
    if (s[i] == '}' && --depth == 0) return i;
  }
  return std::string_view::npos;
}

std::optional<ExtractedVerdict> extract_from(std::string_view response,
                                             const std::string& field_name) {
  for (std::size_t pos = response.find('{'); pos != std::string_view::npos;
       pos = response.find('{', pos + 1)) {
    const std::size_t close = matching_brace(response, pos);
    if (close == std::string_view::npos) continue;
    auto parsed = parse_object_candidate(response.substr(pos, close - pos + 1));
    if (!parsed || !parsed->contains(field_name)) continue;
    const json& value = (*parsed)[field_name];
    if (!value.is_string()) continue;
    ExtractedVerdict out;
    out.value = value.get<std::string>();
    if (parsed->contains("evidence") && (*parsed)["evidence"].is_array()) {
      for (const json& item : (*parsed)["evidence"]) {
        if (item.is_string()) out.evidence.push_back(item.get<std::string>());
      }
    }
    return out;
  }
  return std::nullopt;
}

}  // namespace

std::optional<ExtractedVerdict> extract_verdict_object(
    std::string_view response, const std::string& field_name) {
  if (auto found = extract_from(response, field_name)) return found;
  // The prompts end mid-object ("{'<field>':"); a completion may resume
  // there without repeating the opening brace.
  if (response.find(field_name) == std::string_view::npos) {
    std::string resumed = "{'" + field_name + "':" + std::string(response);
    if (auto found = extract_from(resumed, field_name)) return found;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Absolute rating

namespace {

GenerationRequest make_request(const std::string& prompt,
                               const RaterRequestOptions& options) {
  GenerationRequest request;
  request.model_id = options.model_id;
  request.prompt = prompt;
  request.max_output_tokens = options.max_output_tokens;
  request.temperature = options.temperature;
  request.seed = options.seed;
  return request;
}

// Runs the request, and re-prompts once (cache bypassed, seed nudged) when
// `parse` rejects the first response.
template <typename Parse>
auto generate_with_reparse(Gateway& gateway, Backend& backend,
                           const GenerationRequest& request, Parse parse) {
  const GenerationResponse first = gateway.generate(backend, request);
  if (auto result = parse(first.text)) return *result;
  GenerationRequest retry = request;
  retry.seed = retry.seed ? *retry.seed + 1 : 1;
  const GenerationResponse second = gateway.regenerate(backend, retry);
  if (auto result = parse(second.text)) return *result;
  throw VerdictParseError("no well-formed verdict object in rater response: " +
                          second.text.substr(0, 160));
}

}  // namespace

AbsoluteVerdict rate_absolute(const std::string& context,
                              const std::string& question,
                              const std::string& answer, Gateway& gateway,
                              Backend& backend,
                              const RaterRequestOptions& options) {
  if (context.empty()) {
    throw MissingContextError("absolute rating requires a non-empty context");
  }
  const std::string prompt =
      prompts::render_entailment_absolute(context, question, answer);
  auto parse = [](const std::string& text)
      -> std::optional<std::pair<bool, std::vector<std::string>>> {
    auto extracted =
        extract_verdict_object(text, "answer_is_entailed_by_context");
    if (!extracted) return std::nullopt;
    const std::string value = strings::lower(strings::trim(extracted->value));
    if (value != "yes" && value != "no") return std::nullopt;
    return std::make_pair(value == "yes", extracted->evidence);
  };
  auto [entailed, evidence] =
      generate_with_reparse(gateway, backend, make_request(prompt, options),
                            parse);
  AbsoluteVerdict verdict;
  verdict.entailed = entailed;
  verdict.evidence = std::move(evidence);
  verdict.rater_id = options.rater_id;
  return verdict;
}

AccuracyCi accuracy_with_ci(std::size_t entailed_count, std::size_t total,
                            double z) {
  if (total == 0) throw Error("accuracy_with_ci: no verdicts");
  AccuracyCi out;
  out.p_hat =
      static_cast<double>(entailed_count) / static_cast<double>(total);
  out.half_width =
      z * std::sqrt(out.p_hat * (1.0 - out.p_hat) /
                    static_cast<double>(total));
  return out;
}

AccuracyCi accuracy_with_ci(const std::vector<AbsoluteVerdict>& verdicts,
                            double z) {
  std::size_t entailed = 0;
  for (const AbsoluteVerdict& v : verdicts) entailed += v.entailed ? 1 : 0;
  return accuracy_with_ci(entailed, verdicts.size(), z);
}

// ---------------------------------------------------------------------------
// Comparison scheduling

std::vector<ComparisonTask> schedule_comparisons(
    const std::vector<std::string>& system_ids,
    const std::vector<std::string>& question_ids, std::size_t c,
    std::uint64_t seed) {
  if (c > question_ids.size()) {
    throw Error("schedule_comparisons: c exceeds available questions");
  }
  auto question_gen = rng::substream(seed, "sxs/question_sample");
  auto swap_gen = rng::substream(seed, "sxs/presentation_swap");

  // One sample, reused for every pair.
  const auto picks =
      rng::sample_without_replacement(question_ids.size(), c, question_gen);
  std::vector<std::string> sampled;
  sampled.reserve(c);
  for (std::size_t idx : picks) sampled.push_back(question_ids[idx]);

  std::vector<ComparisonTask> tasks;
  tasks.reserve(c * system_ids.size() * (system_ids.size() - 1) / 2);
  for (std::size_t i = 0; i < system_ids.size(); ++i) {
    for (std::size_t j = i + 1; j < system_ids.size(); ++j) {
      for (const std::string& question_id : sampled) {
        ComparisonTask task;
        task.question_id = question_id;
        task.system_a = system_ids[i];
        task.system_b = system_ids[j];
        task.swap = rng::coin(swap_gen);
        tasks.push_back(std::move(task));
      }
    }
  }
  return tasks;
}

// ---------------------------------------------------------------------------
// Pairwise rating

PairwiseJudgment rate_pairwise(const ComparisonTask& task,
                               const std::string& context_or_truth,
                               const std::string& question,
                               const std::string& answer_a,
                               const std::string& answer_b, Gateway& gateway,
                               Backend& backend, PairwiseVariant variant,
                               const RaterRequestOptions& options) {
  const bool swap = task.swap;
  const std::string& shown_a = swap ? answer_b : answer_a;
  const std::string& shown_b = swap ? answer_a : answer_b;
  std::string prompt;
  switch (variant) {
    case PairwiseVariant::book_context:
      prompt = prompts::render_side_by_side_book(context_or_truth, question,
                                                 shown_a, shown_b);
      break;
    case PairwiseVariant::narrativeqa:
      prompt = prompts::render_side_by_side_script(context_or_truth, question,
                                                   shown_a, shown_b);
      break;
    case PairwiseVariant::ground_truth:
      prompt = prompts::render_ground_truth_side_by_side(
          question, context_or_truth, shown_a, shown_b);
      break;
  }

  const bool equal_allowed = variant != PairwiseVariant::book_context;
  auto parse = [&](const std::string& text)
      -> std::optional<std::pair<RawVerdict, std::vector<std::string>>> {
    auto extracted = extract_verdict_object(text, "system is better");
    if (!extracted) return std::nullopt;
    const std::string value = strings::lower(strings::trim(extracted->value));
    RawVerdict raw;
    if (value == "a is better" || value == "a") {
      raw = RawVerdict::A;
    } else if (value == "b is better" || value == "b") {
      raw = RawVerdict::B;
    } else if (value == "none") {
      raw = RawVerdict::None;
    } else if (value == "equal" && equal_allowed) {
      raw = RawVerdict::Equal;
    } else {
      return std::nullopt;
    }
    return std::make_pair(raw, extracted->evidence);
  };
  auto [raw, evidence] = generate_with_reparse(
      gateway, backend, make_request(prompt, options), parse);

  PairwiseJudgment judgment;
  judgment.question_id = task.question_id;
  judgment.system_a = task.system_a;
  judgment.system_b = task.system_b;
  judgment.swapped = swap;
  judgment.raw_verdict = raw;
  judgment.evidence = std::move(evidence);
  judgment.rater_id = options.rater_id;
  if (raw == RawVerdict::A || raw == RawVerdict::B) {
    const bool first_slot_won = raw == RawVerdict::A;
    judgment.resolved_winner =
        (first_slot_won != swap) ? task.system_a : task.system_b;
  }
  return judgment;
}

// ---------------------------------------------------------------------------
// Ground-truth absolute rating

bool rate_ground_truth(const std::string& question,
                       const std::pair<std::string, std::string>& gt_answers,
                       const std::string& answer, Gateway& gateway,
                       Backend& backend, const RaterRequestOptions& options) {
  auto parse = [](const std::string& text) -> std::optional<bool> {
    // The prompt asks for a bare yes/no; accept it anywhere in a short reply.
    const std::string value = strings::lower(strings::trim(text));
    if (value == "yes" || strings::starts_with(value, "yes")) return true;
    if (value == "no" || strings::starts_with(value, "no")) return false;
    return std::nullopt;
  };
  for (const std::string& truth : {gt_answers.first, gt_answers.second}) {
    const std::string prompt =
        prompts::render_ground_truth_absolute(question, truth, answer);
    const bool correct = generate_with_reparse(
        gateway, backend, make_request(prompt, options), parse);
    if (correct) return true;  // matches either reference answer
  }
  return false;
}

// ---------------------------------------------------------------------------
// Win matrix

WinMatrix build_win_matrix(const std::vector<std::string>& systems,
                           const std::vector<PairwiseJudgment>& judgments,
                           EqualPolicy equal_policy) {
  WinMatrix matrix;
  matrix.systems = systems;
  matrix.w.assign(systems.size(),
                  std::vector<double>(systems.size(), 0.0));
  for (const PairwiseJudgment& judgment : judgments) {
    const std::size_t a = matrix.index_of(judgment.system_a);
    const std::size_t b = matrix.index_of(judgment.system_b);
    switch (judgment.raw_verdict) {
      case RawVerdict::None:
        break;  // non-factual pairs carry no signal
      case RawVerdict::Equal:
        if (equal_policy == EqualPolicy::half_win) {
          matrix.w[a][b] += 0.5;
          matrix.w[b][a] += 0.5;
        }
        break;
      case RawVerdict::A:
      case RawVerdict::B: {
        if (!judgment.resolved_winner) {
          throw Error("decisive judgment lacks a resolved winner");
        }
        const std::size_t winner = matrix.index_of(*judgment.resolved_winner);
        if (winner != a && winner != b) {
          throw Error("resolved winner is not a member of the pair");
        }
        const std::size_t loser = winner == a ? b : a;
        matrix.w[winner][loser] += 1.0;
        break;
      }
    }
  }
  return matrix;
}

}  // namespace longeval
