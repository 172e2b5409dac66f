#include "gridnav/checkpoint.hpp"

namespace gridnav::harness {

namespace {

json matrix_to_json(const nn::Matrix& m) {
    std::vector<double> flat(m.data(), m.data() + m.size());  // row-major storage
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

nn::Matrix matrix_from_json(const json& j) {
    nn::Matrix m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
    auto flat = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(flat.size()) != m.size())
        throw ConfigError("checkpoint matrix size mismatch");
    std::copy(flat.begin(), flat.end(), m.data());
    return m;
}

json vector_to_json(const nn::Vector& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

nn::Vector vector_from_json(const json& j) {
    auto flat = j.get<std::vector<double>>();
    return Eigen::Map<const nn::Vector>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

const char* activation_name(nn::Activation a) {
    return a == nn::Activation::ReLU ? "relu" : "identity";
}

nn::Activation activation_from_name(const std::string& s) {
    if (s == "relu") return nn::Activation::ReLU;
    if (s == "identity") return nn::Activation::Identity;
    throw ConfigError("unknown activation in checkpoint: " + s);
}

}  // namespace

json network_to_json(const nn::MlpNetwork& net) {
    json layers = json::array();
    for (const auto& l : net.layers) {
        layers.push_back(json{{"activation", activation_name(l.activation)},
                              {"weights", matrix_to_json(l.weights)},
                              {"biases", vector_to_json(l.biases)}});
    }
    return json{{"layers", layers}};
}

nn::MlpNetwork network_from_json(const json& j) {
    nn::MlpNetwork net;
    for (const auto& lj : j.at("layers")) {
        nn::Layer l;
        l.activation = activation_from_name(lj.at("activation").get<std::string>());
        l.weights = matrix_from_json(lj.at("weights"));
        l.biases = vector_from_json(lj.at("biases"));
        if (l.weights.rows() != l.biases.size())
            throw ConfigError("checkpoint layer weight/bias mismatch");
        net.layers.push_back(std::move(l));
    }
    if (net.layers.empty()) throw ConfigError("checkpoint network has no layers");
    return net;
}

json adam_to_json(const nn::AdamState& s) {
    json mw = json::array(), vw = json::array(), mb = json::array(), vb = json::array();
    for (const auto& m : s.m_weights) mw.push_back(matrix_to_json(m));
    for (const auto& v : s.v_weights) vw.push_back(matrix_to_json(v));
    for (const auto& m : s.m_biases) mb.push_back(vector_to_json(m));
    for (const auto& v : s.v_biases) vb.push_back(vector_to_json(v));
    return json{{"beta1", s.beta1}, {"beta2", s.beta2}, {"eps", s.eps},       {"step", s.step},
                {"m_weights", mw},  {"v_weights", vw},  {"m_biases", mb},     {"v_biases", vb}};
}

nn::AdamState adam_from_json(const json& j) {
    nn::AdamState s;
    s.beta1 = j.at("beta1").get<double>();
    s.beta2 = j.at("beta2").get<double>();
    s.eps = j.at("eps").get<double>();
    s.step = j.at("step").get<long>();
    for (const auto& m : j.at("m_weights")) s.m_weights.push_back(matrix_from_json(m));
    for (const auto& v : j.at("v_weights")) s.v_weights.push_back(matrix_from_json(v));
    for (const auto& m : j.at("m_biases")) s.m_biases.push_back(vector_from_json(m));
    for (const auto& v : j.at("v_biases")) s.v_biases.push_back(vector_from_json(v));
    return s;
}

json qtable_to_json(const tabular::QTable& q) {
    return json{{"state_count", q.state_count},
                {"action_count", q.action_count},
                {"values", q.values}};
}

tabular::QTable qtable_from_json(const json& j) {
    tabular::QTable q;
    q.state_count = j.at("state_count").get<int>();
    q.action_count = j.at("action_count").get<int>();
    q.values = j.at("values").get<std::vector<double>>();
    if (q.values.size() !=
        static_cast<std::size_t>(q.state_count) * static_cast<std::size_t>(q.action_count))
        throw ConfigError("checkpoint Q-table size mismatch");
    return q;
}

json dqn_agent_to_json(const deep::DqnAgent& agent) {
    return json{{"online", network_to_json(agent.online())},
                {"target", network_to_json(agent.target())},
                {"adam", adam_to_json(agent.adam())},
                {"epsilon", agent.epsilon().epsilon},
                {"learn_steps", agent.learn_steps()}};
}

void dqn_agent_restore(deep::DqnAgent& agent, const json& j) {
    agent.online_mutable() = network_from_json(j.at("online"));
    agent.target_mutable() = network_from_json(j.at("target"));
    agent.adam_mutable() = adam_from_json(j.at("adam"));
    agent.epsilon().epsilon = j.at("epsilon").get<double>();
    agent.set_learn_steps(j.at("learn_steps").get<long>());
}

json ppo_agent_to_json(const deep::PpoAgent& agent) {
    return json{{"trunk", network_to_json(agent.trunk())},
                {"actor", network_to_json(agent.actor())},
                {"critic", network_to_json(agent.critic())},
                {"trunk_adam", adam_to_json(agent.trunk_adam())},
                {"actor_adam", adam_to_json(agent.actor_adam())},
                {"critic_adam", adam_to_json(agent.critic_adam())}};
}

void ppo_agent_restore(deep::PpoAgent& agent, const json& j) {
    agent.trunk_mutable() = network_from_json(j.at("trunk"));
    agent.actor_mutable() = network_from_json(j.at("actor"));
    agent.critic_mutable() = network_from_json(j.at("critic"));
    agent.trunk_adam_mutable() = adam_from_json(j.at("trunk_adam"));
    agent.actor_adam_mutable() = adam_from_json(j.at("actor_adam"));
    agent.critic_adam_mutable() = adam_from_json(j.at("critic_adam"));
}

}  // namespace gridnav::harness
