#pragma once

// Line-delimited record schemas shared by the pipeline stages. Field names
// are part of the on-disk contract; change them and recorded runs break.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "longeval/answer_collection.hpp"
#include "longeval/corpus.hpp"
#include "longeval/question_gen.hpp"
#include "longeval/raters.hpp"
#include "longeval/rank_stats.hpp"

namespace longeval {

struct AbsoluteVerdictRecord {
  std::string question_id;
  std::string system_id;
  std::string rater_id;
  std::optional<bool> entailed;  // absent when the verdict was unparseable
  std::vector<std::string> evidence;
  std::string status = "ok";
};

nlohmann::json to_json(const Book& book);
Book book_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EntityChain& chain, const std::string& book_id);
// Returns (book_id, chain).
std::pair<std::string, EntityChain> chain_from_json(const nlohmann::json& j);

nlohmann::json to_json(const QAItem& item);
QAItem qa_item_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AnswerRecord& record);
AnswerRecord answer_record_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AbsoluteVerdictRecord& record);
AbsoluteVerdictRecord absolute_verdict_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PairwiseJudgment& judgment);
PairwiseJudgment judgment_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RankingResult& result);

// Line-delimited JSON files (one object per line, sorted keys).
void write_jsonl(const std::string& path,
                 const std::vector<nlohmann::json>& rows);
std::vector<nlohmann::json> read_jsonl(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace longeval
