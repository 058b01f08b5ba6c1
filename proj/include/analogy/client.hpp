#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "analogy/prompt.hpp"

namespace analogy {

enum class EndpointMode { Chat, Completion };

struct ModelRequest {
  Messages messages;
  int max_tokens = 64;
};

/// Temperature is always 0. Implementations must be safe to call from
/// several threads at once. Failures throw Error(TransportError).
class ModelClient {
 public:
  virtual ~ModelClient() = default;
  virtual std::string model_id() const = 0;
  virtual std::string complete(const ModelRequest& request) = 0;
  long calls() const { return calls_.load(); }

 protected:
  void count_call() { ++calls_; }

 private:
  std::atomic<long> calls_{0};
};

/// Deterministic client backed by a function of the request.
class FunctionClient : public ModelClient {
 public:
  using Fn = std::function<std::string(const ModelRequest&)>;
  FunctionClient(std::string id, Fn fn) : id_(std::move(id)), fn_(std::move(fn)) {}

  std::string model_id() const override { return id_; }
  std::string complete(const ModelRequest& request) override;

 private:
  std::string id_;
  Fn fn_;
};

/// Answers from a table keyed by prompt_hash; unknown prompts get `fallback`.
std::unique_ptr<FunctionClient> make_lookup_client(std::string id, std::map<std::string, std::string> by_hash,
                                                   std::string fallback = "");

/// Replays responses in call order, then repeats the last one. Serial use only
/// gives a meaningful order.
std::unique_ptr<FunctionClient> make_scripted_client(std::string id, std::vector<std::string> responses);

struct HttpClientConfig {
  std::string base_url = "https://api.openai.com";
  std::string model;
  EndpointMode mode = EndpointMode::Chat;
  std::string api_key;  // defaults to $MODEL_API_KEY
  std::chrono::seconds timeout{60};
};

/// OpenAI-compatible /v1/chat/completions or /v1/completions endpoint.
class HttpModelClient : public ModelClient {
 public:
  explicit HttpModelClient(HttpClientConfig config);

  std::string model_id() const override;
  std::string complete(const ModelRequest& request) override;

 private:
  HttpClientConfig config_;
};

}  // namespace analogy
