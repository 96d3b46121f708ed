#include "discovery/http_backend.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "discovery/error.hpp"

namespace discovery {

namespace {

void split_url(const std::string& url, std::string& origin, std::string& path) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "endpoint URL lacks a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  origin = url.substr(0, path_start);
  path = path_start == std::string::npos ? "/" : url.substr(path_start);
}

bool is_transient(int status) { return status == 429 || status >= 500; }

}  // namespace

EndpointConfig endpoint_from_environment(std::string url) {
  EndpointConfig config;
  config.url = std::move(url);
  const char* key = std::getenv("DISCOVERY_API_KEY");
  if (key == nullptr || *key == '\0') key = std::getenv("OPENAI_API_KEY");
  if (key == nullptr || *key == '\0') {
    throw Error(ErrorCode::InvalidArgument,
                "no credential: set DISCOVERY_API_KEY or OPENAI_API_KEY");
  }
  config.api_key = key;
  const char* model = std::getenv("DISCOVERY_MODEL");
  config.model = (model != nullptr && *model != '\0') ? model : "gpt-3.5-turbo";
  return config;
}

std::string build_request_body(const Conversation& conversation, const GenerationParams& params,
                               std::string_view model) {
  nlohmann::ordered_json body;
  body["model"] = model;
  auto messages = nlohmann::ordered_json::array();
  for (const auto& turn : conversation.turns()) {
    nlohmann::ordered_json message;
    message["role"] = to_string(turn.role);
    message["content"] = turn.text;
    messages.push_back(std::move(message));
  }
  body["messages"] = std::move(messages);
  body["temperature"] = params.temperature;
  body["max_tokens"] = params.max_tokens;
  return body.dump();
}

Completion parse_response_body(std::string_view body, const PriceTable& prices,
                               std::chrono::nanoseconds wall_time) {
  nlohmann::json payload;
  try {
    payload = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedResponse, std::string("response is not JSON: ") + e.what());
  }
  const auto choices = payload.find("choices");
  if (choices == payload.end() || !choices->is_array() || choices->empty()) {
    throw Error(ErrorCode::MalformedResponse, "response has no choices");
  }
  const auto& first = (*choices)[0];
  if (!first.is_object() || !first.contains("message") || !first["message"].is_object() ||
      !first["message"].contains("content") || !first["message"]["content"].is_string()) {
    throw Error(ErrorCode::MalformedResponse, "choices[0].message.content missing");
  }
  Completion out;
  out.text = first["message"]["content"].get<std::string>();
  if (const auto usage = payload.find("usage"); usage != payload.end() && usage->is_object()) {
    out.usage.prompt_tokens = usage->value("prompt_tokens", std::uint64_t{0});
    out.usage.completion_tokens = usage->value("completion_tokens", std::uint64_t{0});
  }
  out.usage.wall_time = wall_time;
  out.usage.cost = prices.cost(out.usage.prompt_tokens, out.usage.completion_tokens);
  return out;
}

HttpBackend::HttpBackend(EndpointConfig config, Sleeper sleeper, std::uint64_t jitter_seed)
    : config_(std::move(config)), sleeper_(std::move(sleeper)), rng_(jitter_seed) {
  split_url(config_.url, origin_, path_);
  if (config_.retry.max_attempts < 1) {
    throw Error(ErrorCode::InvalidArgument, "max_attempts must be at least 1");
  }
  if (!sleeper_) {
    sleeper_ = [](std::chrono::nanoseconds delay) { std::this_thread::sleep_for(delay); };
  }
}

std::chrono::nanoseconds HttpBackend::next_delay(int failed_attempts) {
  const double cap = static_cast<double>(std::chrono::nanoseconds(config_.retry.base_delay).count()) *
                     std::pow(config_.retry.factor, failed_attempts - 1);
  std::lock_guard lock(rng_mutex_);
  const double unit = std::generate_canonical<double, 53>(rng_);
  return std::chrono::nanoseconds(static_cast<std::int64_t>(unit * cap));
}

Completion HttpBackend::complete(const Conversation& conversation,
                                 const GenerationParams& params) {
  params.validate();
  if (conversation.empty() || conversation.back().role != Role::User) {
    throw Error(ErrorCode::InvalidState, "conversation must end with a user turn");
  }
  const auto body = build_request_body(conversation, params, config_.model);

  httplib::Client client(origin_);
  const auto timeout = config_.retry.request_timeout;
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  if (!config_.api_key.empty()) client.set_bearer_token_auth(config_.api_key);

  std::string last_failure;
  bool rate_limited = false;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    const auto started = std::chrono::steady_clock::now();
    auto result = client.Post(path_, body, "application/json");
    const auto elapsed = std::chrono::steady_clock::now() - started;

    if (result && result->status == 200) {
      return parse_response_body(result->body, config_.prices,
                                 std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed));
    }
    if (!result) {
      last_failure = "transport failure: " + httplib::to_string(result.error());
      rate_limited = false;
    } else {
      last_failure = "HTTP " + std::to_string(result->status);
      rate_limited = result->status == 429;
      if (!is_transient(result->status)) {
        throw Error(ErrorCode::TransportError, last_failure + ": " + result->body);
      }
    }
    if (attempt < config_.retry.max_attempts) sleeper_(next_delay(attempt));
  }
  const auto attempts = std::to_string(config_.retry.max_attempts);
  if (rate_limited) {
    throw Error(ErrorCode::RateLimited, "still rate limited after " + attempts + " attempts");
  }
  throw Error(ErrorCode::TransportError, last_failure + " after " + attempts + " attempts");
}

}  // namespace discovery
