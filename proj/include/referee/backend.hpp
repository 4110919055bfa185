#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "referee/types.hpp"

namespace referee {

struct GenerationParams {
  std::string model_name;
  double temperature = 0.0;
  int max_output_tokens = 1024;
  std::chrono::milliseconds timeout{60'000};

  bool operator==(const GenerationParams&) const = default;
};

struct ChatRequest {
  std::string system_prompt;  // may be empty: no system message is sent
  std::string user_prompt;
  GenerationParams params;
};

/// A chat-completion endpoint. Implementations must be safe to call from
/// several threads at once.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string chat(const ChatRequest& request) = 0;
};

/// Deterministic scripted backend. Each call takes the first rule, in script
/// order, whose matcher accepts the prompt pair; consume-once rules are then
/// spent.
class MockBackend final : public Backend {
 public:
  struct Matcher {
    enum class Kind { Always, Contains, Regex };
    Kind kind = Kind::Always;
    std::string pattern;

    static Matcher always() { return {}; }
    static Matcher contains(std::string s) { return {Kind::Contains, std::move(s)}; }
    static Matcher regex(std::string s) { return {Kind::Regex, std::move(s)}; }
    bool accepts(const std::string& system_prompt, const std::string& user_prompt) const;
  };

  struct Rule {
    Matcher matcher;
    std::string reply;
    bool consume_once = true;
  };

  /// Throws Error{InvalidConfig} on an empty script.
  explicit MockBackend(std::vector<Rule> script);

  /// Replies with the queued strings in order; an exhausted queue answers
  /// with ResponseEmpty.
  static std::shared_ptr<MockBackend> queue(std::vector<std::string> replies);

  std::string chat(const ChatRequest& request) override;

  std::vector<ChatRequest> calls() const;
  std::size_t call_count() const;

 private:
  MockBackend() = default;

  mutable std::mutex mutex_;
  std::vector<Rule> script_;
  std::vector<bool> consumed_;
  bool queue_mode_ = false;
  std::vector<ChatRequest> calls_;
};

/// Hex SHA-256 over the canonical encoding of everything that determines a reply.
std::string cache_key(const std::string& backend_id, const ChatRequest& request);

/// Serves repeated requests from memory and an optional append-only file of
/// {"key", "reply"} records.
class CachedBackend final : public Backend {
 public:
  CachedBackend(std::shared_ptr<Backend> inner, std::string backend_id,
                std::optional<std::filesystem::path> cache_file = std::nullopt);

  std::string chat(const ChatRequest& request) override;

  std::size_t hits() const;
  std::size_t misses() const;

 private:
  std::shared_ptr<Backend> inner_;
  std::string backend_id_;
  std::optional<std::filesystem::path> cache_file_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
  std::unordered_map<std::string, std::shared_future<std::string>> in_flight_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

/// Token bucket limiting requests per minute.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  explicit RateLimiter(double requests_per_minute, double burst = 1.0);

  /// Takes a token if one is available at `now`; otherwise returns how long
  /// until one will be.
  std::optional<Clock::duration> try_acquire(Clock::time_point now);
  void acquire();

 private:
  std::mutex mutex_;
  double rate_per_sec_;
  double capacity_;
  double tokens_;
  std::optional<Clock::time_point> last_;
};

struct RetryPolicy {
  std::vector<std::chrono::milliseconds> backoff{std::chrono::seconds(1), std::chrono::seconds(4),
                                                 std::chrono::seconds(16)};
  double jitter = 0.2;
};

struct OpenAiOptions {
  std::string endpoint;  // full chat-completions URL, http:// or https://
  std::string api_key;
  RetryPolicy retry;
  std::optional<double> requests_per_minute;
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
};

/// Client for OpenAI-compatible chat-completions endpoints.
class OpenAiBackend final : public Backend {
 public:
  explicit OpenAiBackend(OpenAiOptions options);

  std::string chat(const ChatRequest& request) override;

  /// The JSON body sent for a request.
  static Json request_body(const ChatRequest& request);

 private:
  std::chrono::milliseconds jittered(std::chrono::milliseconds base);

  OpenAiOptions options_;
  std::string base_url_;
  std::string path_;
  std::unique_ptr<RateLimiter> limiter_;
  std::mutex rng_mutex_;
  std::mt19937 rng_;
};

class BackendRegistry {
 public:
  void add(const std::string& backend_id, std::shared_ptr<Backend> backend,
           GenerationParams params = {});
  bool contains(const std::string& backend_id) const;
  const GenerationParams& params(const std::string& backend_id) const;
  Backend& backend(const std::string& backend_id) const;

  /// Throws UnknownBackend, EmptyContent for a blank user prompt, and
  /// ResponseEmpty for a blank reply, besides whatever the backend raises.
  std::string chat(const std::string& backend_id, const std::string& system_prompt,
                   const std::string& user_prompt, const GenerationParams& params) const;
  std::string chat(const std::string& backend_id, const std::string& system_prompt,
                   const std::string& user_prompt) const;

 private:
  struct Entry {
    std::shared_ptr<Backend> backend;
    GenerationParams params;
  };
  std::map<std::string, Entry> entries_;
};

}  // namespace referee
