#include "longeval/question_gen.hpp"

#include <unordered_set>

#include "longeval/digest.hpp"
#include "longeval/errors.hpp"
#include "longeval/prompts.hpp"
#include "longeval/strings.hpp"

namespace longeval {

QaParseResult parse_qa_pairs(std::string_view response_text) {
  QaParseResult result;
  enum class State { idle, in_question, in_answer };
  State state = State::idle;
  std::string question, answer;

  auto drop_pending = [&]() {
    if (state == State::in_question) ++result.unpaired_warnings;
    question.clear();
    answer.clear();
  };
  auto commit = [&]() {
    if (state == State::in_answer) {
      if (question.empty() || answer.empty()) {
        ++result.unpaired_warnings;
      } else {
        result.pairs.push_back(QaPair{question, answer});
      }
    } else if (state == State::in_question) {
      ++result.unpaired_warnings;
    }
    question.clear();
    answer.clear();
    state = State::idle;
  };
  auto append = [](std::string& target, const std::string& extra) {
    if (!target.empty()) target.push_back(' ');
    target.append(extra);
  };

  for (const std::string& raw : strings::split_lines(response_text)) {
    const std::string line = strings::trim(raw);
    if (strings::starts_with(line, "Question:")) {
      if (state == State::in_answer) {
        commit();
      } else if (state == State::in_question) {
        drop_pending();
      }
      question = strings::trim(line.substr(9));
      state = State::in_question;
    } else if (strings::starts_with(line, "Answer:")) {
      if (state == State::in_question) {
        answer = strings::trim(line.substr(7));
        state = State::in_answer;
      }
      // A stray answer without a pending question is ignored.
    } else if (line.empty()) {
      if (state == State::in_answer) commit();
      // Blank lines between a question and its answer are allowed.
    } else {
      if (state == State::in_question) append(question, line);
      if (state == State::in_answer) append(answer, line);
    }
  }
  commit();

  if (result.pairs.empty()) throw NoQuestionsParsedError();
  return result;
}

namespace {

// Concatenation of the passages containing any of the chain's mentions.
std::string entity_context(const Book& book, const EntityChain& chain,
                           std::size_t passage_target_tokens,
                           const Tokenizer& tokenizer) {
  const auto passages = segment_passages(book, passage_target_tokens, tokenizer);
  std::string context;
  for (const Passage& p : passages) {
    bool hit = false;
    for (const Mention& m : chain.mentions) {
      if (m.start < p.end && m.end > p.start) {
        hit = true;
        break;
      }
    }
    if (hit) {
      if (!context.empty()) context.append("\n\n");
      context.append(strings::trim(p.text));
    }
  }
  return context.empty() ? book.body : context;
}

}  // namespace

QuestionGenResult generate_dataset(
    const Book& book, const std::vector<EntityChain>& ranked_chains,
    Gateway& gateway, Backend& backend, const QuestionGenOptions& options,
    const Tokenizer& tokenizer) {
  if (options.target_count == 0) {
    throw Error("generate_dataset: target_count must be positive");
  }
  QuestionGenResult result;
  std::unordered_set<std::string> seen_questions;

  for (const EntityChain& chain : ranked_chains) {
    if (result.items.size() >= options.target_count) break;
    if (chain.mentions.empty()) continue;
    const std::string& surface = chain.canonical_surface();

    const std::string context =
        options.full_book_context
            ? book.body
            : entity_context(book, chain, options.passage_target_tokens,
                             tokenizer);
    const std::string prompt = prompts::render_question_gen(
        context, options.questions_per_entity, surface);

    GenerationRequest request;
    request.model_id = options.model_id;
    request.prompt = prompt;
    request.max_output_tokens = options.max_output_tokens;
    request.temperature = options.temperature;
    request.seed = options.seed;
    const GenerationResponse response = gateway.generate(backend, request);

    QaParseResult parsed;
    try {
      parsed = parse_qa_pairs(response.text);
    } catch (const NoQuestionsParsedError&) {
      ++result.unpaired_warnings;
      continue;
    }
    result.unpaired_warnings += parsed.unpaired_warnings;

    const std::string prompt_digest = digest::sha256_hex(prompt);
    for (const QaPair& pair : parsed.pairs) {
      if (result.items.size() >= options.target_count) break;
      const std::string normalized = strings::normalize_ws_lower(pair.question);
      if (!seen_questions.insert(normalized).second) {
        ++result.duplicate_dropped;
        continue;
      }
      if (strings::contains_ci(pair.question, surface)) {
        ++result.entity_mention_dropped;
        continue;
      }
      QAItem item;
      item.book_id = book.book_id;
      item.entity_id = chain.entity_id;
      item.question = pair.question;
      item.reference_answer = pair.answer;
      item.provenance.model_id = options.model_id;
      item.provenance.prompt_digest = prompt_digest;
      item.question_id =
          digest::sha256_hex(book.book_id + "/" +
                             std::to_string(chain.entity_id) + "/" + normalized)
              .substr(0, 16);
      result.items.push_back(std::move(item));
    }
  }

  result.partial = result.items.size() < options.target_count;
  return result;
}

}  // namespace longeval
