#include <regex>

#include "referee/backend.hpp"
#include "referee/error.hpp"

namespace referee {

bool MockBackend::Matcher::accepts(const std::string& system_prompt,
                                   const std::string& user_prompt) const {
  switch (kind) {
    case Kind::Always:
      return true;
    case Kind::Contains:
      return system_prompt.find(pattern) != std::string::npos ||
             user_prompt.find(pattern) != std::string::npos;
    case Kind::Regex: {
      const std::regex re(pattern);
      return std::regex_search(system_prompt, re) || std::regex_search(user_prompt, re);
    }
  }
  return false;
}

MockBackend::MockBackend(std::vector<Rule> script)
    : script_(std::move(script)), consumed_(script_.size(), false) {
  if (script_.empty()) throw Error(ErrorCode::InvalidConfig, "mock script is empty");
  for (const auto& rule : script_) {
    if (rule.matcher.kind == Matcher::Kind::Regex) {
      try {
        std::regex check(rule.matcher.pattern);
      } catch (const std::regex_error& e) {
        throw Error(ErrorCode::InvalidConfig,
                    "bad mock regex '" + rule.matcher.pattern + "': " + e.what());
      }
    }
  }
}

std::shared_ptr<MockBackend> MockBackend::queue(std::vector<std::string> replies) {
  std::shared_ptr<MockBackend> mock(new MockBackend());
  mock->queue_mode_ = true;
  for (auto& reply : replies) mock->script_.push_back({Matcher::always(), std::move(reply), true});
  mock->consumed_.assign(mock->script_.size(), false);
  return mock;
}

std::string MockBackend::chat(const ChatRequest& request) {
  std::lock_guard lock(mutex_);
  calls_.push_back(request);
  for (std::size_t i = 0; i < script_.size(); ++i) {
    if (consumed_[i]) continue;
    const auto& rule = script_[i];
    if (!rule.matcher.accepts(request.system_prompt, request.user_prompt)) continue;
    if (rule.consume_once) consumed_[i] = true;
    return rule.reply;
  }
  if (queue_mode_) throw Error(ErrorCode::ResponseEmpty, "mock reply queue is empty");
  throw Error(ErrorCode::NoMatchingScript, "no remaining mock rule accepts the prompt");
}

std::vector<ChatRequest> MockBackend::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

std::size_t MockBackend::call_count() const {
  std::lock_guard lock(mutex_);
  return calls_.size();
}

}  // namespace referee
