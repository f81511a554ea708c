#include "distdom/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace distdom {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw std::invalid_argument(std::string("json: missing field '") + key + "'");
  }
  return j.at(key);
}

template <typename T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("json: bad field '") + key + "': " + e.what());
  }
}

template <typename T>
void maybe(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = get<T>(j, key);
}

Json range_json(const IntRange& r) { return Json::array({r.lo, r.hi}); }

IntRange range_from(const Json& j, const char* key) {
  const auto v = get<std::vector<std::int64_t>>(j, key);
  if (v.size() != 2) throw std::invalid_argument(std::string("json: '") + key + "' needs [lo, hi]");
  return {v[0], v[1]};
}

}  // namespace

Json to_json(const ReturnDistribution& dist) {
  Json atoms = Json::array();
  for (std::size_t i = 0; i < dist.size(); ++i) {
    auto v = dist.value(i);
    atoms.push_back(Json{{"v", Vector(v.begin(), v.end())}, {"p", dist.prob(i)}});
  }
  return Json{{"dim", dist.dim()}, {"atoms", std::move(atoms)}};
}

ReturnDistribution distribution_from_json(const Json& j) {
  const auto dim = get<std::size_t>(j, "dim");
  std::vector<Atom> atoms;
  for (const auto& a : field(j, "atoms")) atoms.push_back({get<Vector>(a, "v"), get<double>(a, "p")});
  return ReturnDistribution(dim, std::move(atoms));
}

Json to_json(const SolutionSet& set) {
  Json entries = Json::array();
  for (const auto& e : set.entries()) entries.push_back(Json{{"id", e.id}, {"dist", to_json(e.dist)}});
  return Json{{"dim", set.dim()}, {"entries", std::move(entries)}};
}

SolutionSet solution_set_from_json(const Json& j) {
  const auto dim = get<std::size_t>(j, "dim");
  std::vector<PolicyEntry> entries;
  for (const auto& e : field(j, "entries")) {
    entries.push_back({get<std::string>(e, "id"), distribution_from_json(field(e, "dist"))});
    if (entries.back().dist.dim() != dim) {
      throw std::invalid_argument("json: entry '" + entries.back().id + "' has wrong dimension");
    }
  }
  return SolutionSet(std::move(entries));
}

Json to_json(const Momdp& m) {
  Json transitions = Json::array();
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
      Json next = Json::array();
      for (const auto& succ : m.successors(s, a)) {
        next.push_back(Json{{"s", succ.state}, {"p", succ.prob}, {"reward", to_json(succ.reward)}});
      }
      transitions.push_back(Json{{"s", s}, {"a", a}, {"next", std::move(next)}});
    }
  }
  return Json{{"num_states", m.num_states()},     {"num_actions", m.num_actions()},
              {"num_objectives", m.num_objectives()}, {"gamma", m.gamma()},
              {"horizon", m.horizon()},           {"transitions", std::move(transitions)}};
}

Momdp momdp_from_json(const Json& j) {
  Momdp m(get<std::size_t>(j, "num_states"), get<std::size_t>(j, "num_actions"),
          get<std::size_t>(j, "num_objectives"), get<double>(j, "gamma"),
          get<std::size_t>(j, "horizon"));
  for (const auto& t : field(j, "transitions")) {
    std::vector<Successor> succ;
    for (const auto& n : field(t, "next")) {
      succ.push_back({get<std::size_t>(n, "s"), get<double>(n, "p"),
                      distribution_from_json(field(n, "reward"))});
    }
    m.set_transitions(get<std::size_t>(t, "s"), get<std::size_t>(t, "a"), std::move(succ));
  }
  m.validate();
  return m;
}

Json to_json(const GeneratorConfig& c) {
  Json j{{"name", c.name},
         {"num_states", c.num_states},
         {"num_actions", c.num_actions},
         {"next_states", range_json(c.next_states)},
         {"horizon", c.horizon},
         {"set_limit", c.set_limit},
         {"num_objectives", c.num_objectives},
         {"reward_values", range_json(c.reward_values)},
         {"seed", c.seed}};
  if (c.categorical_reward_atoms) j["categorical_reward_atoms"] = range_json(*c.categorical_reward_atoms);
  return j;
}

GeneratorConfig generator_config_from_json(const Json& j, GeneratorConfig c) {
  if (j.contains("preset")) {
    const auto seed = c.seed;
    c = preset_config(get<std::string>(j, "preset"));
    c.seed = seed;
  }
  maybe(j, "name", c.name);
  maybe(j, "num_states", c.num_states);
  maybe(j, "num_actions", c.num_actions);
  if (j.contains("next_states")) c.next_states = range_from(j, "next_states");
  maybe(j, "horizon", c.horizon);
  maybe(j, "set_limit", c.set_limit);
  maybe(j, "num_objectives", c.num_objectives);
  if (j.contains("reward_values")) c.reward_values = range_from(j, "reward_values");
  if (j.contains("categorical_reward_atoms")) {
    c.categorical_reward_atoms = range_from(j, "categorical_reward_atoms");
  }
  maybe(j, "seed", c.seed);
  c.validate();
  return c;
}

Json to_json(const LearnerConfig& c) {
  return Json{{"episodes", c.episodes},
              {"random_walks", c.random_walks},
              {"set_limit", c.set_limit == kUnlimitedSetSize ? Json(nullptr) : Json(c.set_limit)},
              {"precision", c.precision},
              {"epsilon", Json{{"start", c.epsilon.start},
                               {"end", c.epsilon.end},
                               {"decay_fraction", c.epsilon.decay_fraction}}},
              {"weights", c.weights},
              {"representative", c.representative == Representative::mixture ? "mixture" : "medoid"},
              {"seed", c.seed}};
}

LearnerConfig learner_config_from_json(const Json& j, LearnerConfig c) {
  maybe(j, "episodes", c.episodes);
  maybe(j, "random_walks", c.random_walks);
  if (j.contains("set_limit")) {
    c.set_limit = j.at("set_limit").is_null() ? kUnlimitedSetSize : get<std::size_t>(j, "set_limit");
  }
  maybe(j, "precision", c.precision);
  if (j.contains("epsilon")) {
    const auto& e = j.at("epsilon");
    maybe(e, "start", c.epsilon.start);
    maybe(e, "end", c.epsilon.end);
    maybe(e, "decay_fraction", c.epsilon.decay_fraction);
  }
  maybe(j, "weights", c.weights);
  if (j.contains("representative")) {
    const auto rep = get<std::string>(j, "representative");
    if (rep == "mixture") {
      c.representative = Representative::mixture;
    } else if (rep == "medoid") {
      c.representative = Representative::medoid;
    } else {
      throw std::invalid_argument("json: representative must be 'mixture' or 'medoid'");
    }
  }
  maybe(j, "seed", c.seed);
  return c;
}

Json to_json(const TransitionEstimate& est) {
  Json entries = Json::array();
  for (const auto& e : est.entries) {
    entries.push_back(Json{{"next", e.next_states}, {"p", e.probs}, {"visits", e.visits}});
  }
  return Json{{"num_states", est.num_states},
              {"num_actions", est.num_actions},
              {"unvisited", est.unvisited},
              {"entries", std::move(entries)}};
}

TransitionEstimate transition_estimate_from_json(const Json& j) {
  TransitionEstimate est;
  est.num_states = get<std::size_t>(j, "num_states");
  est.num_actions = get<std::size_t>(j, "num_actions");
  est.unvisited = get<std::size_t>(j, "unvisited");
  for (const auto& e : field(j, "entries")) {
    est.entries.push_back({get<std::vector<std::size_t>>(e, "next"), get<std::vector<double>>(e, "p"),
                           get<std::uint64_t>(e, "visits")});
  }
  if (est.entries.size() != est.num_states * est.num_actions) {
    throw std::invalid_argument("json: transition estimate has wrong entry count");
  }
  return est;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("'" + path.string() + "': " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace distdom
