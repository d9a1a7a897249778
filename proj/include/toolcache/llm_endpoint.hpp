// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdlib>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "toolcache/llm.hpp"

namespace toolcache {

struct EndpointConfig {
  std::string base_url;             // e.g. http://localhost:8000 (env TOOLCACHE_ENDPOINT_URL)
  std::string api_key;              // env TOOLCACHE_API_KEY / OPENAI_API_KEY
  std::string model = "gpt-4-turbo";
  std::string path = "/v1/chat/completions";
  double temperature = 0.0;         // decoding defaults are not pinned anywhere; keep greedy
  int max_attempts = 3;             // bounded retry so latency stays measurable
  double backoff_seconds = 0.5;     // doubles per attempt; tests shrink it
  int timeout_seconds = 60;
  int max_in_flight = 8;            // endpoint isolation: cap concurrent requests

  static EndpointConfig from_env() {
    EndpointConfig c;
    if (const char* url = std::getenv("TOOLCACHE_ENDPOINT_URL")) c.base_url = url;
    if (const char* key = std::getenv("TOOLCACHE_API_KEY")) {
      c.api_key = key;
    } else if (const char* key2 = std::getenv("OPENAI_API_KEY")) {
      c.api_key = key2;
    }
    if (const char* model = std::getenv("TOOLCACHE_MODEL")) c.model = model;
    return c;
  }
};

// Builds the chat-completions request body for one completion call.
inline json build_chat_request(const std::string& model, double temperature,
                               const std::vector<ChatMessage>& messages,
                               const std::vector<ToolSpec>& tools) {
  json body = {{"model", model}, {"temperature", temperature}};
  json msgs = json::array();
  for (const auto& m : messages) msgs.push_back(m.to_wire());
  body["messages"] = msgs;
  if (!tools.empty()) {
    json tool_array = json::array();
    for (const auto& t : tools) tool_array.push_back(t.to_wire());
    body["tools"] = tool_array;
    body["tool_choice"] = "auto";
  }
  return body;
}

// Parses one chat-completions response body; throws ProtocolError when the
// payload is not a valid completion.
inline ChatResponse parse_chat_response(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed response JSON: ") + e.what());
  }
  try {
    ChatResponse resp;
    resp.message = ChatMessage::from_wire(j.at("choices").at(0).at("message"));
    if (j.contains("usage")) {
      resp.prompt_tokens = j["usage"].value("prompt_tokens", 0);
      resp.completion_tokens = j["usage"].value("completion_tokens", 0);
    }
    return resp;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("unexpected completion shape: ") + e.what());
  }
}

// OpenAI-compatible remote driver. One POST per completion, bounded retry
// with exponential backoff on transport errors, shared in-flight limit.
class EndpointDriver : public ChatDriver {
 public:
  explicit EndpointDriver(EndpointConfig config)
      : config_(std::move(config)), in_flight_(config_.max_in_flight) {
    if (config_.base_url.empty()) {
      throw ConfigError("endpoint driver requires a base URL (TOOLCACHE_ENDPOINT_URL)");
    }
  }

  ChatResponse complete(const std::vector<ChatMessage>& messages,
                        const std::vector<ToolSpec>& tools) override {
    if (messages.empty()) throw Error("complete(): empty conversation");
    const json body = build_chat_request(config_.model, config_.temperature, messages, tools);
    const std::string payload = body.dump();

    in_flight_.acquire();
    struct Release {
      std::counting_semaphore<>* s;
      ~Release() { s->release(); }
    } release{&in_flight_};

    std::string last_error;
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
      if (attempt > 0) {
        const double delay = config_.backoff_seconds * static_cast<double>(1 << (attempt - 1));
        std::this_thread::sleep_for(std::chrono::duration<double>(delay));
      }
      httplib::Client client(config_.base_url);
      client.set_connection_timeout(config_.timeout_seconds);
      client.set_read_timeout(config_.timeout_seconds);
      httplib::Headers headers = {{"Content-Type", "application/json"}};
      if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

      const auto started = std::chrono::steady_clock::now();
      auto res = client.Post(config_.path, headers, payload, "application/json");
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500 || res->status == 429) {
        last_error = "server status " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw EndpointError("endpoint returned status " + std::to_string(res->status) + ": " +
                            res->body);
      }
      ChatResponse resp = parse_chat_response(res->body);
      resp.round_trip = elapsed;
      return resp;
    }
    throw EndpointError("endpoint unreachable after " + std::to_string(config_.max_attempts) +
                        " attempts: " + last_error);
  }

 private:
  EndpointConfig config_;
  std::counting_semaphore<> in_flight_;
};

}  // namespace toolcache
