#include "analogy/client.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "analogy/error.hpp"

namespace analogy {

std::string FunctionClient::complete(const ModelRequest& request) {
  count_call();
  return fn_(request);
}

std::unique_ptr<FunctionClient> make_lookup_client(std::string id, std::map<std::string, std::string> by_hash,
                                                   std::string fallback) {
  auto table = std::make_shared<const std::map<std::string, std::string>>(std::move(by_hash));
  return std::make_unique<FunctionClient>(std::move(id), [table, fallback](const ModelRequest& r) {
    auto it = table->find(prompt_hash(r.messages));
    return it == table->end() ? fallback : it->second;
  });
}

std::unique_ptr<FunctionClient> make_scripted_client(std::string id, std::vector<std::string> responses) {
  if (responses.empty()) throw Error(ErrorCode::ConfigInvalid, "scripted client needs at least one response");
  struct State {
    std::mutex mu;
    std::vector<std::string> responses;
    std::size_t next = 0;
  };
  auto state = std::make_shared<State>();
  state->responses = std::move(responses);
  return std::make_unique<FunctionClient>(std::move(id), [state](const ModelRequest&) {
    std::lock_guard lock(state->mu);
    const auto i = std::min(state->next, state->responses.size() - 1);
    ++state->next;
    return state->responses[i];
  });
}

HttpModelClient::HttpModelClient(HttpClientConfig config) : config_(std::move(config)) {
  if (config_.model.empty()) throw Error(ErrorCode::ConfigInvalid, "model name required");
  if (config_.api_key.empty()) {
    if (const char* key = std::getenv("MODEL_API_KEY")) config_.api_key = key;
  }
}

std::string HttpModelClient::model_id() const {
  return config_.mode == EndpointMode::Chat ? config_.model : config_.model + ":completion";
}

std::string HttpModelClient::complete(const ModelRequest& request) {
  count_call();
  nlohmann::json body = {{"model", config_.model}, {"temperature", 0}, {"max_tokens", request.max_tokens}};
  std::string path;
  if (config_.mode == EndpointMode::Chat) {
    body["messages"] = messages_to_json(request.messages);
    path = "/v1/chat/completions";
  } else {
    body["prompt"] = completion_text(request.messages);
    path = "/v1/completions";
  }

  httplib::Client http(config_.base_url);
  http.set_connection_timeout(config_.timeout);
  http.set_read_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto res = http.Post(path, headers, body.dump(), "application/json");
  if (!res) throw Error(ErrorCode::TransportError, "request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw Error(ErrorCode::TransportError, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  }
  try {
    const auto j = nlohmann::json::parse(res->body);
    const auto& choice = j.at("choices").at(0);
    if (config_.mode == EndpointMode::Chat) return choice.at("message").at("content").get<std::string>();
    return choice.at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::TransportError, std::string("unexpected response body: ") + e.what());
  }
}

}  // namespace analogy
