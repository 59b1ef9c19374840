#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "longeval/errors.hpp"
#include "longeval/gateway.hpp"
#include "longeval/strings.hpp"

namespace longeval {

using json = nlohmann::json;

namespace {

std::string default_auth_env(const std::string& backend_name) {
  std::string env = "LONGEVAL_API_KEY_";
  for (char c : backend_name) {
    env.push_back(c == '-' ? '_'
                           : static_cast<char>(
                                 std::toupper(static_cast<unsigned char>(c))));
  }
  return env;
}

json build_payload(const HttpBackendProfile& profile,
                   const GenerationRequest& request) {
  json payload;
  payload["model"] =
      profile.model_id.empty() ? request.model_id : profile.model_id;
  payload["max_tokens"] = request.max_output_tokens;
  payload["temperature"] = request.temperature;
  if (request.seed) payload["seed"] = *request.seed;
  if (profile.payload_style == "prompt") {
    payload["prompt"] = request.prompt;
  } else {
    payload["messages"] =
        json::array({{{"role", "user"}, {"content", request.prompt}}});
  }
  return payload;
}

std::optional<json> lookup(const json& doc, const std::string& pointer) {
  if (pointer.empty()) return std::nullopt;
  try {
    json value = doc.at(json::json_pointer(pointer));
    return std::optional<json>(std::move(value));
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

FinishReason map_finish(const std::optional<json>& value) {
  if (!value || !value->is_string()) return FinishReason::complete;
  const std::string name = value->get<std::string>();
  if (name == "length" || name == "max_tokens") return FinishReason::length;
  if (name == "stop" || name == "complete" || name == "end_turn") {
    return FinishReason::complete;
  }
  return FinishReason::error;
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendProfile profile)
    : profile_(std::move(profile)) {
  if (profile_.auth_env.empty()) {
    profile_.auth_env = default_auth_env(profile_.name);
  }
}

GenerationResponse HttpBackend::complete(const GenerationRequest& request) {
  httplib::Client client(profile_.base_url);
  client.set_connection_timeout(profile_.timeout_seconds, 0);
  client.set_read_timeout(profile_.timeout_seconds, 0);

  httplib::Headers headers;
  if (const char* key = std::getenv(profile_.auth_env.c_str());
      key != nullptr && *key != '\0') {
    headers.emplace(profile_.auth_header, profile_.auth_prefix + key);
  }

  const std::string body = build_payload(profile_, request).dump();
  auto result = client.Post(profile_.path, headers, body, "application/json");
  if (!result) {
    throw BackendUnavailableError("backend '" + profile_.name + "' at " +
                                  profile_.base_url + ": " +
                                  httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300) {
    throw BackendHttpError(result->status, result->body);
  }

  json doc;
  try {
    doc = json::parse(result->body);
  } catch (const json::exception& e) {
    throw BackendHttpError(result->status,
                           std::string("unparseable response body: ") +
                               e.what());
  }
  auto text = lookup(doc, profile_.text_pointer);
  if (!text || !text->is_string()) {
    throw BackendHttpError(result->status,
                           "response lacks text at pointer " +
                               profile_.text_pointer);
  }
  GenerationResponse response;
  response.text = text->get<std::string>();
  response.finish_reason = map_finish(lookup(doc, profile_.finish_pointer));
  if (auto v = lookup(doc, profile_.input_tokens_pointer);
      v && v->is_number()) {
    response.usage.input_tokens = v->get<std::size_t>();
  }
  if (auto v = lookup(doc, profile_.output_tokens_pointer);
      v && v->is_number()) {
    response.usage.output_tokens = v->get<std::size_t>();
  }
  if (response.finish_reason == FinishReason::complete &&
      response.text.empty()) {
    response.finish_reason = FinishReason::error;
  }
  return response;
}

}  // namespace longeval
