#include "longeval/prompts.hpp"

#include "longeval/errors.hpp"
#include "longeval/strings.hpp"

namespace longeval::prompts {

using strings::replace_all;

std::string render_question_gen(std::string_view context_text,
                                std::size_t num_questions,
                                std::string_view entity) {
  if (context_text.empty()) throw EmptyContextError();
  if (entity.empty()) throw Error("question generation: entity is empty");
  std::string out = replace_all(kQuestionGen, "{context_text}", context_text);
  out = replace_all(out, "{num_questions}", std::to_string(num_questions));
  out = replace_all(out, "{entity}", entity);
  return out;
}

std::string render_entailment_absolute(std::string_view context,
                                       std::string_view question,
                                       std::string_view answer) {
  std::string out = replace_all(kEntailmentAbsolute, "{context}", context);
  out = replace_all(out, "{question}", question);
  out = replace_all(out, "{answer}", answer);
  return out;
}

std::string render_side_by_side_book(std::string_view context,
                                     std::string_view question,
                                     std::string_view answer_a,
                                     std::string_view answer_b) {
  std::string out = replace_all(kSideBySideBook, "{context}", context);
  out = replace_all(out, "{question}", question);
  out = replace_all(out, "{system_answer_A}", answer_a);
  out = replace_all(out, "{system_answer_B}", answer_b);
  return out;
}

std::string render_side_by_side_script(std::string_view context,
                                       std::string_view question,
                                       std::string_view answer_a,
                                       std::string_view answer_b) {
  std::string out = replace_all(kSideBySideScript, "{context}", context);
  out = replace_all(out, "{question}", question);
  out = replace_all(out, "{system_answer_A}", answer_a);
  out = replace_all(out, "{system_answer_B}", answer_b);
  return out;
}

std::string render_ground_truth_absolute(std::string_view question,
                                         std::string_view truth_answer,
                                         std::string_view candidate_answer) {
  std::string out = replace_all(kGroundTruthAbsolute, "{q}", question);
  out = replace_all(out, "{a1}", truth_answer);
  out = replace_all(out, "{a2}", candidate_answer);
  return out;
}

std::string render_ground_truth_side_by_side(std::string_view question,
                                             std::string_view truth_answer,
                                             std::string_view answer_a,
                                             std::string_view answer_b) {
  std::string out =
      replace_all(kGroundTruthSideBySide, "{question}", question);
  out = replace_all(out, "{answer}", truth_answer);
  out = replace_all(out, "{system_answer_A}", answer_a);
  out = replace_all(out, "{system_answer_B}", answer_b);
  return out;
}

}  // namespace longeval::prompts
