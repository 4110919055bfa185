#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cmath>
#include <thread>

#include "referee/backend.hpp"
#include "referee/error.hpp"

namespace referee {

RateLimiter::RateLimiter(double requests_per_minute, double burst)
    : rate_per_sec_(requests_per_minute / 60.0), capacity_(std::max(1.0, burst)), tokens_(capacity_) {
  if (!(requests_per_minute > 0)) {
    throw Error(ErrorCode::InvalidConfig, "requests_per_minute must be positive");
  }
}

std::optional<RateLimiter::Clock::duration> RateLimiter::try_acquire(Clock::time_point now) {
  std::lock_guard lock(mutex_);
  if (last_) {
    const double elapsed = std::chrono::duration<double>(now - *last_).count();
    if (elapsed > 0) tokens_ = std::min(capacity_, tokens_ + elapsed * rate_per_sec_);
  }
  if (!last_ || now > *last_) last_ = now;
  if (tokens_ >= 1.0) {
    tokens_ -= 1.0;
    return std::nullopt;
  }
  const double wait_s = (1.0 - tokens_) / rate_per_sec_;
  return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(wait_s));
}

void RateLimiter::acquire() {
  while (auto wait = try_acquire(Clock::now())) std::this_thread::sleep_for(*wait);
}

namespace {

// Splits "https://host:port/v1/chat/completions" into scheme-host-port and path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidConfig, "endpoint '" + url + "' has no scheme");
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::InvalidConfig, "endpoint scheme must be http or https");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool is_transient(int status) { return status == 408 || status == 409 || status == 429 || status >= 500; }

}  // namespace

OpenAiBackend::OpenAiBackend(OpenAiOptions options)
    : options_(std::move(options)), rng_(std::random_device{}()) {
  std::tie(base_url_, path_) = split_url(options_.endpoint);
  if (options_.requests_per_minute) {
    limiter_ = std::make_unique<RateLimiter>(*options_.requests_per_minute);
  }
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

Json OpenAiBackend::request_body(const ChatRequest& request) {
  Json messages = Json::array();
  if (!request.system_prompt.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user_prompt}});
  return Json{{"model", request.params.model_name},
              {"messages", messages},
              {"temperature", request.params.temperature},
              {"max_tokens", request.params.max_output_tokens}};
}

std::chrono::milliseconds OpenAiBackend::jittered(std::chrono::milliseconds base) {
  std::lock_guard lock(rng_mutex_);
  std::uniform_real_distribution<double> dist(1.0 - options_.retry.jitter, 1.0 + options_.retry.jitter);
  return std::chrono::milliseconds(static_cast<long long>(std::llround(base.count() * dist(rng_))));
}

std::string OpenAiBackend::chat(const ChatRequest& request) {
  const auto body = request_body(request).dump();
  const auto& backoff = options_.retry.backoff;
  ErrorCode last_code = ErrorCode::BackendUnavailable;
  std::string last_message;

  for (std::size_t attempt = 0; attempt <= backoff.size(); ++attempt) {
    if (attempt > 0) options_.sleep(jittered(backoff[attempt - 1]));
    if (limiter_) limiter_->acquire();

    httplib::Client client(base_url_);
    const auto timeout_s = std::chrono::duration_cast<std::chrono::seconds>(request.params.timeout);
    const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(
        request.params.timeout - timeout_s);
    client.set_connection_timeout(timeout_s.count(), timeout_us.count());
    client.set_read_timeout(timeout_s.count(), timeout_us.count());
    client.set_write_timeout(timeout_s.count(), timeout_us.count());
    httplib::Headers headers;
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

    auto result = client.Post(path_, headers, body, "application/json");
    if (!result) {
      const auto err = result.error();
      last_code = (err == httplib::Error::Read || err == httplib::Error::Write ||
                   err == httplib::Error::ConnectionTimeout)
                      ? ErrorCode::Timeout
                      : ErrorCode::BackendUnavailable;
      last_message = "request to " + options_.endpoint + " failed: " + httplib::to_string(err);
      continue;
    }
    if (result->status == 401 || result->status == 403) {
      throw Error(ErrorCode::BackendUnavailable,
                  "endpoint rejected credentials (HTTP " + std::to_string(result->status) + ")");
    }
    if (is_transient(result->status)) {
      last_code = ErrorCode::BackendUnavailable;
      last_message = "HTTP " + std::to_string(result->status) + " from " + options_.endpoint;
      continue;
    }
    if (result->status != 200) {
      throw Error(ErrorCode::BackendUnavailable,
                  "HTTP " + std::to_string(result->status) + ": " + result->body);
    }
    try {
      const auto reply = Json::parse(result->body);
      const auto& content = reply.at("choices").at(0).at("message").at("content");
      if (content.is_null()) throw Error(ErrorCode::ResponseEmpty, "reply has null content");
      return content.get<std::string>();
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::BackendUnavailable, std::string("malformed completion: ") + e.what());
    }
  }
  throw Error(last_code, last_message + " (after " + std::to_string(backoff.size()) + " retries)");
}

}  // namespace referee
