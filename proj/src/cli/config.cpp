#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>

#include "referee/cli.hpp"
#include "referee/error.hpp"

namespace referee {
namespace {

const char* const kDisplayNames[] = {"Alice", "Bob", "Carol", "Dave", "Eve",
                                     "Frank", "Grace", "Heidi", "Ivan", "Judy"};

void reject_unknown_keys(const Json& j, std::initializer_list<std::string_view> allowed,
                         std::string_view where) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) j.at(key).get_to(out);
}

template <typename T>
void read_opt(const Json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

MockBackend::Rule parse_rule(const Json& j) {
  reject_unknown_keys(j, {"match", "pattern", "reply", "once"}, "mock rule");
  MockBackend::Rule rule;
  const auto match = j.value("match", std::string("always"));
  const auto pattern = j.value("pattern", std::string());
  if (match == "always") {
    rule.matcher = MockBackend::Matcher::always();
  } else if (match == "contains") {
    rule.matcher = MockBackend::Matcher::contains(pattern);
  } else if (match == "regex") {
    rule.matcher = MockBackend::Matcher::regex(pattern);
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown mock matcher '" + match + "'");
  }
  rule.reply = j.at("reply").get<std::string>();
  rule.consume_once = j.value("once", false);
  return rule;
}

Json rule_json(const MockBackend::Rule& rule) {
  using Kind = MockBackend::Matcher::Kind;
  const char* match = rule.matcher.kind == Kind::Always     ? "always"
                      : rule.matcher.kind == Kind::Contains ? "contains"
                                                            : "regex";
  Json j{{"match", match}, {"reply", rule.reply}, {"once", rule.consume_once}};
  if (rule.matcher.kind != Kind::Always) j["pattern"] = rule.matcher.pattern;
  return j;
}

BackendDef parse_backend(const Json& j) {
  reject_unknown_keys(j,
                      {"id", "kind", "endpoint", "model", "api_key_env", "requests_per_minute",
                       "temperature", "max_output_tokens", "timeout_seconds", "cache_file", "rules"},
                      "backend");
  BackendDef def;
  def.id = j.at("id").get<std::string>();
  def.kind = j.at("kind").get<std::string>();
  read_opt(j, "endpoint", def.endpoint);
  read_opt(j, "model", def.model);
  read_opt(j, "api_key_env", def.api_key_env);
  read_opt(j, "requests_per_minute", def.requests_per_minute);
  read_opt(j, "temperature", def.temperature);
  read_opt(j, "max_output_tokens", def.max_output_tokens);
  read_opt(j, "timeout_seconds", def.timeout_seconds);
  read_opt(j, "cache_file", def.cache_file);
  if (j.contains("rules")) {
    for (const auto& r : j.at("rules")) def.rules.push_back(parse_rule(r));
  }
  return def;
}

Json backend_json(const BackendDef& def) {
  Json j{{"id", def.id}, {"kind", def.kind}};
  if (def.kind == "mock") {
    Json rules = Json::array();
    for (const auto& r : def.rules) rules.push_back(rule_json(r));
    j["rules"] = rules;
  } else {
    j["endpoint"] = def.endpoint;
    j["api_key_env"] = def.api_key_env;
    j["requests_per_minute"] = def.requests_per_minute ? Json(*def.requests_per_minute) : Json();
    j["timeout_seconds"] = def.timeout_seconds;
  }
  j["model"] = def.model;
  j["temperature"] = def.temperature;
  j["max_output_tokens"] = def.max_output_tokens;
  j["cache_file"] = def.cache_file ? Json(*def.cache_file) : Json();
  return j;
}

GenerationParams params_of(const BackendDef& def) {
  GenerationParams params;
  params.model_name = def.model.empty() ? def.id : def.model;
  params.temperature = def.temperature;
  params.max_output_tokens = def.max_output_tokens;
  params.timeout = std::chrono::milliseconds(static_cast<long long>(def.timeout_seconds * 1000));
  return params;
}

}  // namespace

std::filesystem::path RunConfig::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  try {
    reject_unknown_keys(j, {"dataset", "seed", "debate", "backends", "templates", "personas_file",
                            "output_dir", "parallelism"},
                        "config");
    const auto& ds = j.at("dataset");
    reject_unknown_keys(ds, {"path", "kind", "dimensions", "sample"}, "dataset");
    c.dataset_path = ds.at("path").get<std::string>();
    c.dataset_kind = parse_dataset_kind(ds.at("kind").get<std::string>());
    read_opt(ds, "dimensions", c.dimensions);
    read_opt(ds, "sample", c.sample);
    read_opt(j, "seed", c.seed);

    const auto& d = j.at("debate");
    reject_unknown_keys(d, {"strategy", "agents", "backend", "turns", "position_calibration",
                            "diverse_roles", "summarizer_backend", "literal_one_by_one",
                            "max_prompt_chars"},
                        "debate");
    if (d.contains("strategy")) c.strategy = parse_strategy(d.at("strategy").get<std::string>());
    if (d.contains("agents")) {
      const auto& agents = d.at("agents");
      if (agents.is_number_integer()) {
        c.num_agents = agents.get<int>();
      } else {
        agents.get_to(c.agents);
        c.num_agents = static_cast<int>(c.agents.size());
      }
    }
    read_opt(d, "backend", c.agent_backend);
    read_opt(d, "turns", c.turns);
    read_opt(d, "position_calibration", c.position_calibration);
    read_opt(d, "diverse_roles", c.diverse_roles);
    read_opt(d, "summarizer_backend", c.summarizer_backend);
    read_opt(d, "literal_one_by_one", c.literal_one_by_one);
    read_opt(d, "max_prompt_chars", c.max_prompt_chars);

    for (const auto& b : j.at("backends")) c.backends.push_back(parse_backend(b));
    if (j.contains("templates")) {
      const auto& t = j.at("templates");
      reject_unknown_keys(t, {"pairwise", "dimension", "summarizer"}, "templates");
      read_opt(t, "pairwise", c.pairwise_template);
      read_opt(t, "dimension", c.dimension_template);
      read_opt(t, "summarizer", c.summarizer_template);
    }
    read_opt(j, "personas_file", c.personas_file);
    read_opt(j, "output_dir", c.output_dir);
    read_opt(j, "parallelism", c.parallelism);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read config " + path.string());
  Json j;
  try {
    j = Json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  auto base = path.parent_path();
  return parse_run_config(j, base.empty() ? std::filesystem::path(".") : base);
}

Json to_json(const RunConfig& c) {
  Json dataset{{"path", c.dataset_path}, {"kind", to_string(c.dataset_kind)}};
  if (!c.dimensions.empty()) dataset["dimensions"] = c.dimensions;
  if (c.sample) dataset["sample"] = *c.sample;

  Json debate{{"strategy", to_string(c.strategy)},
              {"backend", c.agent_backend},
              {"turns", c.turns},
              {"position_calibration", c.position_calibration},
              {"diverse_roles", c.diverse_roles},
              {"summarizer_backend", c.summarizer_backend ? Json(*c.summarizer_backend) : Json()},
              {"literal_one_by_one", c.literal_one_by_one},
              {"max_prompt_chars", c.max_prompt_chars}};
  debate["agents"] = c.agents.empty() ? Json(c.num_agents) : Json(c.agents);

  Json backends = Json::array();
  for (const auto& b : c.backends) backends.push_back(backend_json(b));

  Json templates = Json::object();
  if (c.pairwise_template) templates["pairwise"] = *c.pairwise_template;
  if (c.dimension_template) templates["dimension"] = *c.dimension_template;
  if (c.summarizer_template) templates["summarizer"] = *c.summarizer_template;

  Json j{{"dataset", dataset},   {"seed", c.seed},         {"debate", debate},
         {"backends", backends}, {"templates", templates}, {"output_dir", c.output_dir},
         {"parallelism", c.parallelism}};
  if (c.personas_file) j["personas_file"] = *c.personas_file;
  return j;
}

void apply(RunConfig& c, const Overrides& o) {
  if (o.strategy) c.strategy = *o.strategy;
  if (o.agents) {
    c.num_agents = *o.agents;
    c.agents.clear();
  }
  if (o.turns) c.turns = *o.turns;
  if (o.no_calibration) c.position_calibration = false;
  if (o.dataset) {
    // Command-line paths are relative to the working directory.
    c.dataset_path = std::filesystem::absolute(*o.dataset).string();
  }
  if (o.out) c.output_dir = std::filesystem::absolute(*o.out).string();
}

std::vector<AgentSpec> default_roster(int count, const std::string& backend_id) {
  const auto& roles = PersonaLibrary::debater_order();
  if (count < 1) throw Error(ErrorCode::EmptyRoster, "agent count must be >= 1");
  if (static_cast<std::size_t>(count) > roles.size()) {
    throw Error(ErrorCode::InvalidConfig, "at most " + std::to_string(roles.size()) +
                                              " agents have built-in roles; list the roster explicitly");
  }
  std::vector<AgentSpec> roster;
  for (int i = 0; i < count; ++i) {
    roster.push_back({"agent_" + std::to_string(i + 1), kDisplayNames[i],
                      roles[static_cast<std::size_t>(i)], backend_id});
  }
  return roster;
}

DebateConfig make_debate_config(const RunConfig& c, const EvalMode& mode) {
  DebateConfig d;
  d.strategy = c.strategy;
  d.agents = c.agents.empty() ? default_roster(c.num_agents, c.agent_backend) : c.agents;
  d.turns = c.turns;
  d.mode = mode;
  d.aggregation = mode.is_pairwise() ? Aggregation::MajorityVote : Aggregation::AverageScore;
  d.position_calibration = c.position_calibration && mode.is_pairwise();
  d.diverse_roles = c.diverse_roles;
  d.summarizer_backend_id = c.summarizer_backend;
  d.literal_one_by_one = c.literal_one_by_one;
  d.max_prompt_chars = c.max_prompt_chars;
  return d;
}

PromptSet build_prompts(const RunConfig& c) {
  PromptSet prompts;
  if (c.pairwise_template) prompts.pairwise = PromptTemplate::from_file(c.resolve(*c.pairwise_template));
  if (c.dimension_template) prompts.dimension = PromptTemplate::from_file(c.resolve(*c.dimension_template));
  if (c.summarizer_template) {
    prompts.summarizer = PromptTemplate::from_file(c.resolve(*c.summarizer_template));
  }
  if (c.personas_file) prompts.personas.load_file(c.resolve(*c.personas_file));
  return prompts;
}

BackendRegistry build_registry(const RunConfig& c) {
  BackendRegistry registry;
  for (const auto& def : c.backends) {
    std::shared_ptr<Backend> backend;
    if (def.kind == "mock") {
      backend = std::make_shared<MockBackend>(def.rules);
    } else if (def.kind == "openai") {
      OpenAiOptions options;
      options.endpoint = def.endpoint;
      if (!def.api_key_env.empty()) {
        const char* key = std::getenv(def.api_key_env.c_str());
        if (!key || !*key) {
          throw Error(ErrorCode::InvalidConfig,
                      "backend " + def.id + ": environment variable " + def.api_key_env + " is not set");
        }
        options.api_key = key;
      }
      options.requests_per_minute = def.requests_per_minute;
      backend = std::make_shared<OpenAiBackend>(std::move(options));
    } else {
      throw Error(ErrorCode::InvalidConfig, "backend " + def.id + " has unknown kind '" + def.kind + "'");
    }
    if (def.cache_file) {
      backend = std::make_shared<CachedBackend>(std::move(backend), def.id, c.resolve(*def.cache_file));
    }
    registry.add(def.id, std::move(backend), params_of(def));
  }
  return registry;
}

void validate(const RunConfig& c) {
  if (c.parallelism < 1) throw Error(ErrorCode::InvalidConfig, "parallelism must be >= 1");
  if (c.dataset_path.empty()) throw Error(ErrorCode::InvalidConfig, "dataset.path is empty");
  if (!std::filesystem::exists(c.resolve(c.dataset_path))) {
    throw Error(ErrorCode::InvalidConfig, "dataset " + c.resolve(c.dataset_path).string() + " not found");
  }
  std::set<std::string> ids;
  for (const auto& b : c.backends) {
    if (!ids.insert(b.id).second) throw Error(ErrorCode::InvalidConfig, "duplicate backend id " + b.id);
    if (b.kind == "openai" && b.endpoint.empty()) {
      throw Error(ErrorCode::InvalidConfig, "backend " + b.id + " has no endpoint");
    }
    if (b.kind == "openai" && b.model.empty()) {
      throw Error(ErrorCode::InvalidConfig, "backend " + b.id + " has no model");
    }
    if (b.kind == "mock" && b.rules.empty()) {
      throw Error(ErrorCode::InvalidConfig, "mock backend " + b.id + " has no rules");
    }
  }
  for (const auto& d : c.dimensions) {
    const auto& known = scoring_dimensions();
    if (std::find(known.begin(), known.end(), d) == known.end()) {
      throw Error(ErrorCode::InvalidConfig, "unknown dimension '" + d + "'");
    }
  }
  // Constructing the registry and prompt set checks keys, endpoints,
  // regexes, template slots and persona files, all offline.
  const auto registry = build_registry(c);
  const auto prompts = build_prompts(c);
  const DebateRunner runner(registry, prompts);
  const auto mode = c.dataset_kind == DatasetKind::Pairwise
                        ? EvalMode::pairwise()
                        : EvalMode::dimension_score(scoring_dimensions().front(), {1, 3});
  runner.check(make_debate_config(c, mode));
}

}  // namespace referee
