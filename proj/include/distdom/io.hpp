#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "distdom/dimoq.hpp"
#include "distdom/distribution.hpp"
#include "distdom/momdp.hpp"
#include "distdom/pruning.hpp"

namespace distdom {

using Json = nlohmann::ordered_json;

// {"dim": d, "atoms": [{"v": [...], "p": x}, ...]}, atoms in lexicographic order.
Json to_json(const ReturnDistribution& dist);
ReturnDistribution distribution_from_json(const Json& j);

// {"dim": d, "entries": [{"id": "...", "dist": {...}}, ...]}
Json to_json(const SolutionSet& set);
SolutionSet solution_set_from_json(const Json& j);

// {"num_states", "num_actions", "num_objectives", "gamma", "horizon",
//  "transitions": [{"s", "a", "next": [{"s", "p", "reward"}]}]}
Json to_json(const Momdp& momdp);
Momdp momdp_from_json(const Json& j);

Json to_json(const GeneratorConfig& config);
/// Missing keys keep the defaults of `base`.
GeneratorConfig generator_config_from_json(const Json& j, GeneratorConfig base = {});

Json to_json(const LearnerConfig& config);
LearnerConfig learner_config_from_json(const Json& j, LearnerConfig base = {});

Json to_json(const TransitionEstimate& est);
TransitionEstimate transition_estimate_from_json(const Json& j);

/// Serialised text with a trailing newline; stable for equal inputs.
std::string dump(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace distdom
