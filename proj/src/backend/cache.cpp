#include <openssl/evp.h>

#include <cstdio>

#include "referee/backend.hpp"
#include "referee/error.hpp"

namespace referee {
namespace {

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Io, "sha256 failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

}  // namespace

std::string cache_key(const std::string& backend_id, const ChatRequest& request) {
  // Array encoding keeps field boundaries unambiguous.
  const Json canonical = Json::array({backend_id, request.params.model_name,
                                      request.system_prompt, request.user_prompt,
                                      request.params.temperature,
                                      request.params.max_output_tokens});
  return sha256_hex(canonical.dump());
}

CachedBackend::CachedBackend(std::shared_ptr<Backend> inner, std::string backend_id,
                             std::optional<std::filesystem::path> cache_file)
    : inner_(std::move(inner)), backend_id_(std::move(backend_id)), cache_file_(std::move(cache_file)) {
  if (!cache_file_ || !std::filesystem::exists(*cache_file_)) return;
  std::ifstream in(*cache_file_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = Json::parse(line);
      entries_.insert_or_assign(j.at("key").get<std::string>(), j.at("reply").get<std::string>());
    } catch (const Json::exception&) {
      // A torn final line from an interrupted run; the entry is simply refetched.
    }
  }
}

std::string CachedBackend::chat(const ChatRequest& request) {
  const auto key = cache_key(backend_id_, request);
  std::promise<std::string> promise;
  {
    std::unique_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      ++hits_;
      return it->second;
    }
    if (auto it = in_flight_.find(key); it != in_flight_.end()) {
      auto pending = it->second;
      ++hits_;
      lock.unlock();
      return pending.get();
    }
    in_flight_.emplace(key, promise.get_future().share());
    ++misses_;
  }
  std::string reply;
  try {
    reply = inner_->chat(request);
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard lock(mutex_);
    in_flight_.erase(key);
    throw;
  }
  promise.set_value(reply);
  std::lock_guard lock(mutex_);
  in_flight_.erase(key);
  if (trim(reply).empty()) return reply;  // never cache a failure
  entries_.emplace(key, reply);
  if (cache_file_) {
    std::ofstream out(*cache_file_, std::ios::app);
    out << Json{{"key", key}, {"reply", reply}}.dump() << '\n';
  }
  return reply;
}

std::size_t CachedBackend::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::size_t CachedBackend::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

}  // namespace referee
