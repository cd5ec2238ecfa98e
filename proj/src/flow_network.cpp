#include "gridflow/flow/network.hpp"

#include <cmath>
#include <sstream>

namespace gridflow::flow {

const char* to_string(FlowKind kind) {
    switch (kind) {
        case FlowKind::Energy: return "energy";
        case FlowKind::Information: return "information";
        case FlowKind::Payment: return "payment";
    }
    return "?";
}

const char* to_string(NodeRole role) {
    switch (role) {
        case NodeRole::Source: return "source";
        case NodeRole::Sink: return "sink";
        case NodeRole::Transmission: return "transmission";
        case NodeRole::Storage: return "storage";
    }
    return "?";
}

FlowKind flow_kind_from_string(const std::string& s) {
    if (s == "energy") return FlowKind::Energy;
    if (s == "information") return FlowKind::Information;
    if (s == "payment") return FlowKind::Payment;
    throw Error("unknown flow kind: " + s);
}

NodeRole node_role_from_string(const std::string& s) {
    if (s == "source") return NodeRole::Source;
    if (s == "sink") return NodeRole::Sink;
    if (s == "transmission") return NodeRole::Transmission;
    if (s == "storage") return NodeRole::Storage;
    throw Error("unknown node role: " + s);
}

const char* to_string(Rule rule) {
    switch (rule) {
        case Rule::Eq1Capacity: return "Eq1";
        case Rule::Eq2Antisymmetry: return "Eq2";
        case Rule::Eq3Balance: return "Eq3";
        case Rule::AgentDisjoint: return "AgentDisjoint";
        case Rule::DanglingReference: return "DanglingReference";
    }
    return "?";
}

namespace {

std::string edge_label(const std::string& from, const std::string& to) {
    return from + "->" + to;
}

}  // namespace

void FlowNetwork::add_node(FlowNode node) {
    if (node.kind != kind_)
        throw Error("node " + node.id + " has kind " + to_string(node.kind) +
                    ", network is " + to_string(kind_));
    if (nodes_.count(node.id))
        throw Error("duplicate node id: " + node.id);
    nodes_.emplace(node.id, std::move(node));
}

void FlowNetwork::add_edge(FlowEdge edge) {
    if (edge.from == edge.to)
        throw Error("self-loop edge on " + edge.from);
    if (!has_node(edge.from))
        throw UnknownNode("edge endpoint not in network: " + edge.from);
    if (!has_node(edge.to))
        throw UnknownNode("edge endpoint not in network: " + edge.to);
    if (std::isnan(edge.capacity) || edge.capacity < 0.0)
        throw Error("edge capacity must be nonnegative: " + edge_label(edge.from, edge.to));
    EdgeKey key{edge.from, edge.to};
    if (edges_.count(key))
        throw Error("duplicate edge: " + edge_label(edge.from, edge.to));
    edges_.emplace(std::move(key), std::move(edge));
}

FlowNode* FlowNetwork::find_node(const std::string& id) {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

const FlowNode* FlowNetwork::find_node(const std::string& id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

FlowEdge* FlowNetwork::find_edge(const std::string& from, const std::string& to) {
    auto it = edges_.find({from, to});
    return it == edges_.end() ? nullptr : &it->second;
}

const FlowEdge* FlowNetwork::find_edge(const std::string& from, const std::string& to) const {
    auto it = edges_.find({from, to});
    return it == edges_.end() ? nullptr : &it->second;
}

double FlowNetwork::get_flow(const std::string& from, const std::string& to) const {
    if (const FlowEdge* e = find_edge(from, to))
        return e->flow;
    if (is_antisymmetric(kind_)) {
        if (const FlowEdge* r = find_edge(to, from))
            return -r->flow;
    }
    throw UnknownEdge("no " + std::string(to_string(kind_)) + " edge " + edge_label(from, to));
}

void FlowNetwork::set_flow(const std::string& from, const std::string& to, double value) {
    FlowEdge* e = find_edge(from, to);
    FlowEdge* r = is_antisymmetric(kind_) ? find_edge(to, from) : nullptr;
    if (!e && !r)
        throw UnknownEdge("no " + std::string(to_string(kind_)) + " edge " + edge_label(from, to));
    double cap = e ? e->capacity : r->capacity;
    if (std::abs(value) > cap) {
        std::ostringstream msg;
        msg << "flow " << value << " exceeds capacity " << cap << " on "
            << edge_label(from, to);
        throw CapacityExceeded(msg.str());
    }
    if (e) e->flow = value;
    if (r) r->flow = -value;
}

double FlowNetwork::node_balance(const std::string& id) const {
    if (!has_node(id))
        throw UnknownNode("no such node: " + id);
    double sum = 0.0;
    for (const auto& [key, edge] : edges_) {
        if (key.first == id) sum += edge.flow;
        if (key.second == id) sum -= edge.flow;
    }
    return sum;
}

FlowNetwork& MultiNetwork::network(FlowKind kind) {
    switch (kind) {
        case FlowKind::Energy: return energy_;
        case FlowKind::Information: return information_;
        case FlowKind::Payment: return payment_;
    }
    throw Error("bad flow kind");
}

const FlowNetwork& MultiNetwork::network(FlowKind kind) const {
    return const_cast<MultiNetwork*>(this)->network(kind);
}

NodeRole classify_node(double balance, double tolerance) {
    if (tolerance < 0.0)
        throw Error("tolerance must be nonnegative");
    if (balance < -tolerance) return NodeRole::Sink;
    if (balance > tolerance) return NodeRole::Source;
    return NodeRole::Transmission;
}

std::vector<Violation> validate(const MultiNetwork& net, double balance_tolerance) {
    std::vector<Violation> out;
    for (FlowKind kind : {FlowKind::Energy, FlowKind::Information, FlowKind::Payment}) {
        const FlowNetwork& fn = net.network(kind);
        for (const auto& [key, edge] : fn.edges()) {
            const std::string label = edge_label(key.first, key.second);
            if (!fn.has_node(key.first) || !fn.has_node(key.second))
                out.push_back({Rule::DanglingReference, kind, label, "edge endpoint missing"});
            if (std::abs(edge.flow) > edge.capacity)
                out.push_back({Rule::Eq1Capacity, kind, label,
                               "flow " + std::to_string(edge.flow) + " exceeds capacity " +
                                   std::to_string(edge.capacity)});
            if (is_antisymmetric(kind) && key.first < key.second) {
                if (const FlowEdge* rev = fn.find_edge(key.second, key.first)) {
                    if (edge.flow != -rev->flow)
                        out.push_back({Rule::Eq2Antisymmetry, kind, label,
                                       "f(A,B) != -f(B,A) across stored pair"});
                }
            }
        }
        for (const auto& [id, node] : fn.nodes()) {
            if (node.role != NodeRole::Transmission) continue;
            double balance = fn.node_balance(id);
            if (std::abs(balance) > balance_tolerance)
                out.push_back({Rule::Eq3Balance, kind, id,
                               "transmission node balance " + std::to_string(balance)});
        }
    }
    std::map<std::pair<FlowKind, std::string>, std::string> owner;
    for (const Agent& agent : net.agents()) {
        for (const auto& ctrl : agent.controlled) {
            if (!net.network(ctrl.first).has_node(ctrl.second))
                out.push_back({Rule::DanglingReference, ctrl.first, ctrl.second,
                               "agent " + agent.id + " controls unknown node"});
            auto [it, inserted] = owner.emplace(ctrl, agent.id);
            if (!inserted && it->second != agent.id)
                out.push_back({Rule::AgentDisjoint, ctrl.first, ctrl.second,
                               "controlled by both " + it->second + " and " + agent.id});
        }
    }
    return out;
}

}  // namespace gridflow::flow
