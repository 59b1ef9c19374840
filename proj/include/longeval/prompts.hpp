#pragma once

#include <string>
#include <string_view>

namespace longeval::prompts {

// Raw template texts (see prompt_texts.cpp). Placeholders use {name} syntax.
extern const char* const kQuestionGen;
extern const char* const kAnswerNoContextLong;    // five-sentence style
extern const char* const kAnswerFullContextLong;
extern const char* const kAnswerRetrievedLong;
extern const char* const kAnswerNoContextShort;   // one-sentence style
extern const char* const kAnswerFullContextShort;
extern const char* const kAnswerRetrievedShort;
extern const char* const kEntailmentAbsolute;
extern const char* const kSideBySideBook;         // verdicts A/B/None
extern const char* const kSideBySideScript;       // verdicts A/B/None/Equal
extern const char* const kGroundTruthAbsolute;    // yes/no
extern const char* const kGroundTruthSideBySide;  // verdicts A/B/None/Equal

std::string render_question_gen(std::string_view context_text,
                                std::size_t num_questions,
                                std::string_view entity);

std::string render_entailment_absolute(std::string_view context,
                                       std::string_view question,
                                       std::string_view answer);

std::string render_side_by_side_book(std::string_view context,
                                     std::string_view question,
                                     std::string_view answer_a,
                                     std::string_view answer_b);

std::string render_side_by_side_script(std::string_view context,
                                       std::string_view question,
                                       std::string_view answer_a,
                                       std::string_view answer_b);

std::string render_ground_truth_absolute(std::string_view question,
                                         std::string_view truth_answer,
                                         std::string_view candidate_answer);

std::string render_ground_truth_side_by_side(std::string_view question,
                                             std::string_view truth_answer,
                                             std::string_view answer_a,
                                             std::string_view answer_b);

}  // namespace longeval::prompts
