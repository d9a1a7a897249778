// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "toolcache/common.hpp"
#include "toolcache/tools.hpp"

namespace toolcache {

enum class Role { System, User, Assistant, Tool };

inline std::string_view role_name(Role r) {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    case Role::Tool: return "tool";
  }
  return "user";
}

inline Role parse_role(std::string_view name) {
  if (name == "system") return Role::System;
  if (name == "user") return Role::User;
  if (name == "assistant") return Role::Assistant;
  if (name == "tool") return Role::Tool;
  throw ProtocolError("unknown chat role: '" + std::string(name) + "'");
}

struct ChatMessage {
  Role role = Role::User;
  std::string content;
  std::vector<ToolCall> tool_calls;  // assistant messages only
  std::string tool_call_id;          // tool messages only

  static ChatMessage system(std::string text) { return {Role::System, std::move(text), {}, {}}; }
  static ChatMessage user(std::string text) { return {Role::User, std::move(text), {}, {}}; }
  static ChatMessage assistant(std::string text, std::vector<ToolCall> calls = {}) {
    return {Role::Assistant, std::move(text), std::move(calls), {}};
  }
  static ChatMessage tool_reply(std::string call_id, std::string text) {
    return {Role::Tool, std::move(text), {}, std::move(call_id)};
  }

  bool has_tool_calls() const { return !tool_calls.empty(); }

  // Chat-completions message layout. Tool-call arguments travel as a
  // string-encoded JSON object, as the wire format requires.
  json to_wire() const {
    json msg = {{"role", std::string(role_name(role))}};
    if (role == Role::Tool) {
      msg["tool_call_id"] = tool_call_id;
      msg["content"] = content;
      return msg;
    }
    msg["content"] = content;
    if (!tool_calls.empty()) {
      json calls = json::array();
      for (const auto& c : tool_calls) {
        calls.push_back({{"id", c.id},
                         {"type", "function"},
                         {"function", {{"name", c.name}, {"arguments", c.arguments.dump()}}}});
      }
      msg["tool_calls"] = calls;
    }
    return msg;
  }

  static ChatMessage from_wire(const json& msg) {
    ChatMessage out;
    out.role = parse_role(msg.at("role").get<std::string>());
    if (msg.contains("content") && msg.at("content").is_string()) {
      out.content = msg.at("content").get<std::string>();
    }
    if (msg.contains("tool_call_id")) out.tool_call_id = msg.at("tool_call_id").get<std::string>();
    if (msg.contains("tool_calls")) {
      for (const auto& c : msg.at("tool_calls")) {
        ToolCall call;
        call.id = c.value("id", "");
        call.name = c.at("function").at("name").get<std::string>();
        const auto& args = c.at("function").at("arguments");
        call.arguments = args.is_string() ? json::parse(args.get<std::string>()) : args;
        out.tool_calls.push_back(std::move(call));
      }
    }
    return out;
  }
};

struct ChatResponse {
  ChatMessage message;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  double round_trip = 0.0;  // seconds; simulated for the mock, measured for endpoints

  std::int64_t total_tokens() const { return prompt_tokens + completion_tokens; }
};

inline std::size_t message_chars(const ChatMessage& m) {
  std::size_t n = m.content.size();
  for (const auto& c : m.tool_calls) n += c.name.size() + c.arguments.dump().size();
  return n;
}

inline std::size_t conversation_chars(const std::vector<ChatMessage>& messages) {
  std::size_t n = 0;
  for (const auto& m : messages) n += message_chars(m);
  return n;
}

// Mock-side token estimate: ceil(total characters / 4). The endpoint driver
// reports the usage fields the service returns instead.
inline std::int64_t count_tokens(const std::vector<ChatMessage>& messages) {
  return static_cast<std::int64_t>((conversation_chars(messages) + 3) / 4);
}

class ChatDriver {
 public:
  virtual ~ChatDriver() = default;
  virtual ChatResponse complete(const std::vector<ChatMessage>& messages,
                                const std::vector<ToolSpec>& tools) = 0;
};

// First-match scripted behavior for the offline mock driver. Responders see
// the full conversation, so a single rule can drive a whole agent loop.
struct ScriptedBehavior {
  using Matcher = std::function<bool(const std::vector<ChatMessage>&)>;
  using Responder = std::function<ChatMessage(const std::vector<ChatMessage>&)>;

  struct Rule {
    Matcher matches;
    Responder respond;
  };

  std::vector<Rule> rules;
  ChatMessage fallback = ChatMessage::assistant("I cannot help with that.");

  ScriptedBehavior& when(Matcher m, Responder r) {
    rules.push_back({std::move(m), std::move(r)});
    return *this;
  }

  // Convenience: trigger when any message content contains `needle`.
  ScriptedBehavior& when_contains(std::string needle, ChatMessage reply) {
    return when(
        [needle = std::move(needle)](const std::vector<ChatMessage>& msgs) {
          for (const auto& m : msgs) {
            if (m.content.find(needle) != std::string::npos) return true;
          }
          return false;
        },
        [reply = std::move(reply)](const std::vector<ChatMessage>&) { return reply; });
  }

  ChatMessage respond(const std::vector<ChatMessage>& messages) const {
    for (const auto& rule : rules) {
      if (rule.matches(messages)) return rule.respond(messages);
    }
    return fallback;
  }
};

class MockDriver : public ChatDriver {
 public:
  explicit MockDriver(ScriptedBehavior behavior, double round_trip = 0.35)
      : behavior_(std::move(behavior)), round_trip_(round_trip) {}

  ChatResponse complete(const std::vector<ChatMessage>& messages,
                        const std::vector<ToolSpec>& /*tools*/) override {
    if (messages.empty()) throw Error("complete(): empty conversation");
    ChatResponse resp;
    resp.message = behavior_.respond(messages);
    resp.prompt_tokens = count_tokens(messages);
    resp.completion_tokens = count_tokens({resp.message});
    resp.round_trip = round_trip_;
    return resp;
  }

 private:
  ScriptedBehavior behavior_;
  double round_trip_;
};

}  // namespace toolcache
