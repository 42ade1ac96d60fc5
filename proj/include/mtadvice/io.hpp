#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mtadvice/advice.hpp"
#include "mtadvice/domains.hpp"
#include "mtadvice/estimation.hpp"
#include "mtadvice/mdp.hpp"

namespace mtadvice {

using Json = nlohmann::json;

/// {num_states, actions_per_state, transitions (dense [s][a][s']), rewards ([s][a])}.
Json mdp_to_json(const TabularMDP& mdp);
/// Throws std::invalid_argument on a malformed document.
TabularMDP mdp_from_json(const Json& doc);

/// Same envelope with integer "counts" in place of transitions and rewards.
Json counts_to_json(const TransitionCounts& counts);
TransitionCounts counts_from_json(const Json& doc);

Json policy_to_json(const DeterministicPolicy& policy);
DeterministicPolicy policy_from_json(const Json& doc);

/// {name, budget, spent, advise}.
Json teacher_to_json(const TeacherPolicy& teacher);
TeacherPolicy teacher_from_json(const Json& doc);

/// {construction, policy, queries_used}.
Json grand_teacher_to_json(const GrandTeacher& teacher);
GrandTeacher grand_teacher_from_json(const Json& doc);

Json block_dude_spec_to_json(const BlockDudeSpec& spec);
BlockDudeSpec block_dude_spec_from_json(const Json& doc);

/// Throws std::runtime_error if the file cannot be read or parsed.
Json read_json_file(const std::filesystem::path& path);
/// Throws std::runtime_error if the file cannot be written.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace mtadvice
