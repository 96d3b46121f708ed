#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <string_view>

#include "discovery/backend.hpp"

namespace discovery {

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
  std::chrono::seconds request_timeout{60};
};

struct EndpointConfig {
  std::string url;  // full chat-completions URL, e.g. https://host/v1/chat/completions
  std::string model;
  std::string api_key;
  PriceTable prices;
  RetryPolicy retry;
};

/// Reads the credential from DISCOVERY_API_KEY (falling back to
/// OPENAI_API_KEY) and the model from DISCOVERY_MODEL (default
/// "gpt-3.5-turbo"). Throws InvalidArgument if no credential is set.
EndpointConfig endpoint_from_environment(std::string url);

/// Chat-completions request JSON. Keys are emitted in a fixed order so a
/// given conversation always produces identical bytes.
std::string build_request_body(const Conversation& conversation, const GenerationParams& params,
                               std::string_view model);

/// Extracts choices[0].message.content and usage token counts. Throws
/// MalformedResponse.
Completion parse_response_body(std::string_view body, const PriceTable& prices,
                               std::chrono::nanoseconds wall_time);

// Talks to any chat-completions-compatible endpoint. Transient failures
// (transport errors, 429, 5xx) are retried with exponential backoff and full
// jitter; the final failure surfaces as RateLimited (429) or TransportError.
class HttpBackend final : public ChatBackend {
 public:
  using Sleeper = std::function<void(std::chrono::nanoseconds)>;

  explicit HttpBackend(EndpointConfig config, Sleeper sleeper = {},
                       std::uint64_t jitter_seed = std::random_device{}());

  Completion complete(const Conversation& conversation, const GenerationParams& params) override;

 private:
  std::chrono::nanoseconds next_delay(int failed_attempts);

  EndpointConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
  Sleeper sleeper_;
  std::mutex rng_mutex_;
  std::mt19937_64 rng_;
};

}  // namespace discovery
