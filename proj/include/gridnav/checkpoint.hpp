#pragma once

#include <json.hpp>

#include "gridnav/dqn.hpp"
#include "gridnav/nn.hpp"
#include "gridnav/ppo.hpp"
#include "gridnav/tabular.hpp"

namespace gridnav::harness {

using json = nlohmann::ordered_json;

inline constexpr int kCheckpointVersion = 1;

/// Network blob: layer list with row-major flattened weights. Layout is
/// stable; see README "Checkpoint format".
json network_to_json(const nn::MlpNetwork& net);
nn::MlpNetwork network_from_json(const json& j);

json adam_to_json(const nn::AdamState& s);
nn::AdamState adam_from_json(const json& j);

json qtable_to_json(const tabular::QTable& q);
tabular::QTable qtable_from_json(const json& j);

json dqn_agent_to_json(const deep::DqnAgent& agent);
void dqn_agent_restore(deep::DqnAgent& agent, const json& j);

json ppo_agent_to_json(const deep::PpoAgent& agent);
void ppo_agent_restore(deep::PpoAgent& agent, const json& j);

}  // namespace gridnav::harness
