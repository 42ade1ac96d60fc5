#include "mtadvice/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mtadvice {

namespace {

template <class T>
T field(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw std::invalid_argument(std::string("json: missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("json: bad field '") + key + "': " + e.what());
  }
}

StateActionLayout layout_from(const Json& doc) {
  const auto n = field<std::size_t>(doc, "num_states");
  auto actions = field<std::vector<std::size_t>>(doc, "actions_per_state");
  if (actions.size() != n) throw std::invalid_argument("json: actions_per_state length differs from num_states");
  return StateActionLayout(std::move(actions));
}

}  // namespace

Json mdp_to_json(const TabularMDP& mdp) {
  return Json{{"num_states", mdp.num_states()},
              {"actions_per_state", mdp.layout().actions_per_state()},
              {"transitions", mdp.dense_transitions()},
              {"rewards", mdp.dense_rewards()}};
}

TabularMDP mdp_from_json(const Json& doc) {
  const StateActionLayout layout = layout_from(doc);
  auto transitions = field<std::vector<std::vector<std::vector<double>>>>(doc, "transitions");
  auto rewards = field<std::vector<std::vector<double>>>(doc, "rewards");
  TabularMDP mdp = TabularMDP::from_dense(transitions, rewards);
  if (!(mdp.layout() == layout)) throw std::invalid_argument("json: tables disagree with actions_per_state");
  return mdp;
}

Json counts_to_json(const TransitionCounts& counts) {
  return Json{{"num_states", counts.num_states()},
              {"actions_per_state", counts.layout().actions_per_state()},
              {"counts", counts.dense_triples()}};
}

TransitionCounts counts_from_json(const Json& doc) {
  return TransitionCounts::from_triples(layout_from(doc),
                                        field<std::vector<std::vector<std::vector<std::uint64_t>>>>(doc, "counts"));
}

Json policy_to_json(const DeterministicPolicy& policy) { return Json(policy.action_of); }

DeterministicPolicy policy_from_json(const Json& doc) {
  if (!doc.is_array()) throw std::invalid_argument("json: policy must be an array of actions");
  return {doc.get<std::vector<Action>>()};
}

Json teacher_to_json(const TeacherPolicy& teacher) {
  return Json{{"name", teacher.name},
              {"budget", teacher.budget},
              {"spent", teacher.spent},
              {"advise", policy_to_json(teacher.advise)}};
}

TeacherPolicy teacher_from_json(const Json& doc) {
  TeacherPolicy t;
  t.name = doc.value("name", std::string{});
  t.budget = field<std::size_t>(doc, "budget");
  t.spent = doc.value("spent", std::size_t{0});
  t.advise = policy_from_json(doc.at("advise"));
  if (t.spent > t.budget) throw std::invalid_argument("json: teacher spent more than its budget");
  return t;
}

Json grand_teacher_to_json(const GrandTeacher& teacher) {
  return Json{{"construction", teacher.construction == Construction::online ? "online" : "offline"},
              {"policy", policy_to_json(teacher.policy)},
              {"queries_used", teacher.queries_used}};
}

GrandTeacher grand_teacher_from_json(const Json& doc) {
  GrandTeacher g;
  const auto kind = field<std::string>(doc, "construction");
  if (kind == "online")
    g.construction = Construction::online;
  else if (kind == "offline")
    g.construction = Construction::offline;
  else
    throw std::invalid_argument("json: construction must be 'online' or 'offline'");
  g.policy = policy_from_json(doc.at("policy"));
  g.queries_used = field<std::vector<std::size_t>>(doc, "queries_used");
  return g;
}

Json block_dude_spec_to_json(const BlockDudeSpec& spec) {
  return Json{{"width", spec.width},
              {"rows", spec.rows},
              {"terrain", spec.terrain},
              {"blocks", spec.blocks},
              {"start_column", spec.start_column},
              {"start_facing", spec.start_facing},
              {"goal_column", spec.goal_column},
              {"state_cap", spec.state_cap}};
}

BlockDudeSpec block_dude_spec_from_json(const Json& doc) {
  BlockDudeSpec spec;
  spec.width = field<int>(doc, "width");
  spec.rows = field<int>(doc, "rows");
  spec.terrain = field<std::vector<int>>(doc, "terrain");
  spec.blocks = field<std::vector<int>>(doc, "blocks");
  spec.start_column = field<int>(doc, "start_column");
  spec.start_facing = field<int>(doc, "start_facing");
  spec.goal_column = field<int>(doc, "goal_column");
  spec.state_cap = doc.value("state_cap", spec.state_cap);
  return spec;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("cannot parse " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace mtadvice
