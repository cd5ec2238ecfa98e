#include "gridflow/flow/serialize.hpp"

#include <cmath>

namespace gridflow::flow {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json network_to_json(const FlowNetwork& fn) {
    ordered_json nodes = ordered_json::array();
    for (const auto& [id, node] : fn.nodes()) {
        ordered_json n;
        n["id"] = node.id;
        n["kind"] = to_string(node.kind);
        n["role"] = to_string(node.role);
        if (node.agent) n["agent"] = *node.agent;
        nodes.push_back(std::move(n));
    }
    ordered_json edges = ordered_json::array();
    for (const auto& [key, edge] : fn.edges()) {
        ordered_json e;
        e["from"] = edge.from;
        e["to"] = edge.to;
        if (std::isfinite(edge.capacity)) e["capacity"] = edge.capacity;
        e["flow"] = edge.flow;
        edges.push_back(std::move(e));
    }
    return ordered_json{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

void network_from_json(const json& doc, FlowNetwork& fn) {
    for (const auto& n : doc.value("nodes", json::array())) {
        FlowNode node;
        node.id = n.at("id").get<std::string>();
        node.kind = fn.kind();
        if (n.contains("kind") && flow_kind_from_string(n["kind"]) != fn.kind())
            throw Error("node " + node.id + " kind does not match its network");
        node.role = node_role_from_string(n.value("role", "transmission"));
        if (n.contains("agent")) node.agent = n["agent"].get<std::string>();
        fn.add_node(std::move(node));
    }
    for (const auto& e : doc.value("edges", json::array())) {
        FlowEdge edge;
        edge.from = e.at("from").get<std::string>();
        edge.to = e.at("to").get<std::string>();
        if (e.contains("capacity")) edge.capacity = e["capacity"].get<double>();
        edge.flow = e.value("flow", 0.0);
        fn.add_edge(std::move(edge));
    }
}

}  // namespace

ordered_json to_json(const MultiNetwork& net) {
    ordered_json networks;
    networks["energy"] = network_to_json(net.network(FlowKind::Energy));
    networks["information"] = network_to_json(net.network(FlowKind::Information));
    networks["payment"] = network_to_json(net.network(FlowKind::Payment));

    ordered_json agents = ordered_json::array();
    for (const Agent& agent : net.agents()) {
        ordered_json controlled = ordered_json::array();
        for (const auto& [kind, node] : agent.controlled)
            controlled.push_back({{"kind", to_string(kind)}, {"node", node}});
        agents.push_back({{"id", agent.id}, {"controlled", std::move(controlled)}});
    }
    return ordered_json{{"networks", std::move(networks)}, {"agents", std::move(agents)}};
}

MultiNetwork multinetwork_from_json(const json& doc) {
    MultiNetwork net;
    const json& networks = doc.at("networks");
    for (FlowKind kind : {FlowKind::Energy, FlowKind::Information, FlowKind::Payment}) {
        const char* key = to_string(kind);
        if (networks.contains(key))
            network_from_json(networks[key], net.network(kind));
    }
    for (const auto& a : doc.value("agents", json::array())) {
        Agent agent;
        agent.id = a.at("id").get<std::string>();
        for (const auto& c : a.value("controlled", json::array()))
            agent.controlled.emplace(flow_kind_from_string(c.at("kind")),
                                     c.at("node").get<std::string>());
        net.agents().push_back(std::move(agent));
    }
    return net;
}

}  // namespace gridflow::flow
