#include "referee/backend.hpp"
#include "referee/error.hpp"

namespace referee {

void BackendRegistry::add(const std::string& backend_id, std::shared_ptr<Backend> backend,
                          GenerationParams params) {
  if (backend_id.empty()) throw Error(ErrorCode::InvalidConfig, "backend id is empty");
  if (params.temperature < 0) throw Error(ErrorCode::InvalidConfig, "temperature must be >= 0");
  if (params.max_output_tokens < 1) {
    throw Error(ErrorCode::InvalidConfig, "max_output_tokens must be positive");
  }
  entries_.insert_or_assign(backend_id, Entry{std::move(backend), std::move(params)});
}

bool BackendRegistry::contains(const std::string& backend_id) const {
  return entries_.count(backend_id) != 0;
}

const GenerationParams& BackendRegistry::params(const std::string& backend_id) const {
  auto it = entries_.find(backend_id);
  if (it == entries_.end()) throw Error(ErrorCode::UnknownBackend, "no backend '" + backend_id + "'");
  return it->second.params;
}

Backend& BackendRegistry::backend(const std::string& backend_id) const {
  auto it = entries_.find(backend_id);
  if (it == entries_.end()) throw Error(ErrorCode::UnknownBackend, "no backend '" + backend_id + "'");
  return *it->second.backend;
}

std::string BackendRegistry::chat(const std::string& backend_id, const std::string& system_prompt,
                                  const std::string& user_prompt,
                                  const GenerationParams& params) const {
  auto& target = backend(backend_id);
  if (trim(user_prompt).empty()) throw Error(ErrorCode::EmptyContent, "user prompt is blank");
  auto reply = target.chat(ChatRequest{system_prompt, user_prompt, params});
  if (trim(reply).empty()) {
    throw Error(ErrorCode::ResponseEmpty, "backend '" + backend_id + "' returned an empty reply");
  }
  return reply;
}

std::string BackendRegistry::chat(const std::string& backend_id, const std::string& system_prompt,
                                  const std::string& user_prompt) const {
  return chat(backend_id, system_prompt, user_prompt, params(backend_id));
}

}  // namespace referee
