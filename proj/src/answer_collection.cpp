#include "longeval/answer_collection.hpp"

#include <algorithm>

#include "longeval/digest.hpp"
#include "longeval/errors.hpp"
#include "longeval/prompts.hpp"
#include "longeval/strings.hpp"

namespace longeval {

std::string regime_name(ContextRegime regime) {
  switch (regime) {
    case ContextRegime::no_context:
      return "no_context";
    case ContextRegime::rag:
      return "rag";
    case ContextRegime::full_context:
      return "full_context";
  }
  return "no_context";
}

ContextRegime regime_from_name(const std::string& name) {
  if (name == "no_context") return ContextRegime::no_context;
  if (name == "rag") return ContextRegime::rag;
  if (name == "full_context") return ContextRegime::full_context;
  throw ConfigError("unknown context regime: " + name);
}

std::string answer_style_name(AnswerStyle style) {
  return style == AnswerStyle::five_sentence ? "five_sentence"
                                             : "one_sentence";
}

AnswerStyle answer_style_from_name(const std::string& name) {
  if (name == "five_sentence") return AnswerStyle::five_sentence;
  if (name == "one_sentence") return AnswerStyle::one_sentence;
  throw ConfigError("unknown answer style: " + name);
}

namespace {

std::string title_and_author(const Book& book) {
  if (book.author.empty()) return book.title;
  return book.title + " by " + book.author;
}

}  // namespace

std::string build_answer_prompt(const SystemConfig& config,
                                const std::string& question, const Book& book,
                                const std::optional<ContextBundle>& bundle) {
  using strings::replace_all;
  switch (config.regime) {
    case ContextRegime::no_context: {
      if (config.answer_style == AnswerStyle::five_sentence) {
        std::string out = replace_all(prompts::kAnswerNoContextLong,
                                      "{title_and_author}",
                                      title_and_author(book));
        return replace_all(out, "{question}", question);
      }
      std::string out = replace_all(prompts::kAnswerNoContextShort,
                                    "{movie/book}", config.doc_kind);
      out = replace_all(out, "{title}", book.title);
      return replace_all(out, "{q}", question);
    }
    case ContextRegime::rag: {
      if (!bundle) {
        throw MissingContextError(
            "rag regime requires a retrieved context bundle");
      }
      const std::string context = bundle->text();
      if (config.answer_style == AnswerStyle::five_sentence) {
        std::string out =
            replace_all(prompts::kAnswerRetrievedLong, "{context}", context);
        return replace_all(out, "{question}", question);
      }
      std::string out =
          replace_all(prompts::kAnswerRetrievedShort, "{context}", context);
      return replace_all(out, "{q}", question);
    }
    case ContextRegime::full_context: {
      if (book.body.empty()) {
        throw MissingContextError("full_context regime requires a book body");
      }
      if (config.answer_style == AnswerStyle::five_sentence) {
        std::string out = replace_all(prompts::kAnswerFullContextLong,
                                      "{context}", book.body);
        return replace_all(out, "{question}", question);
      }
      std::string out =
          replace_all(prompts::kAnswerFullContextShort, "{text}", book.body);
      return replace_all(out, "{q}", question);
    }
  }
  throw Error("unreachable regime");
}

std::vector<AnswerRecord> collect_answers(
    const std::vector<SystemConfig>& systems,
    const std::vector<QAItem>& qa_items, const Book& book,
    const Bm25Index* index, Gateway& gateway,
    const std::function<Backend&(const std::string&)>& backend_for) {
  std::vector<AnswerRecord> records;
  records.reserve(systems.size() * qa_items.size());

  for (const SystemConfig& system : systems) {
    if (system.regime == ContextRegime::rag && index == nullptr) {
      throw MissingContextError("system '" + system.system_id +
                                "' uses rag but no index was provided");
    }
    Backend& backend = backend_for(system.backend);
    for (const QAItem& item : qa_items) {
      AnswerRecord record;
      record.question_id = item.question_id;
      record.system_id = system.system_id;
      try {
        std::optional<ContextBundle> bundle;
        if (system.regime == ContextRegime::rag) {
          // The retrieval query for answering is the question text alone.
          bundle = retrieve(*index, item.question, system.rag_budget);
          record.context_token_count = bundle->total_tokens;
        } else if (system.regime == ContextRegime::full_context) {
          record.context_token_count = book.token_count;
        }
        const std::string prompt =
            build_answer_prompt(system, item.question, book, bundle);
        record.prompt_digest = digest::sha256_hex(prompt);

        GenerationRequest request;
        request.model_id = system.model_id;
        request.prompt = prompt;
        request.max_output_tokens = system.max_output_tokens;
        request.temperature = system.temperature;
        request.seed = system.seed;
        const GenerationResponse response = gateway.generate(backend, request);
        record.answer_text = response.text;
        if (response.text.empty()) record.status = "error: empty answer";
      } catch (const std::exception& e) {
        record.status = std::string("error: ") + e.what();
      }
      records.push_back(std::move(record));
    }
  }

  std::sort(records.begin(), records.end(),
            [](const AnswerRecord& a, const AnswerRecord& b) {
              if (a.question_id != b.question_id) {
                return a.question_id < b.question_id;
              }
              return a.system_id < b.system_id;
            });
  return records;
}

}  // namespace longeval
