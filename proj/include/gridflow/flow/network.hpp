#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gridflow/errors.hpp"

namespace gridflow::flow {

enum class FlowKind { Energy, Information, Payment };

enum class NodeRole { Source, Sink, Transmission, Storage };

constexpr double kDefaultBalanceTolerance = 1e-9;

const char* to_string(FlowKind kind);
const char* to_string(NodeRole role);
FlowKind flow_kind_from_string(const std::string& s);
NodeRole node_role_from_string(const std::string& s);

/// Antisymmetry (flow out one end equals minus the flow in the other) is a
/// property of energy and payment flow; information is replicable and its
/// edges are plain directed records.
inline bool is_antisymmetric(FlowKind kind) {
    return kind != FlowKind::Information;
}

struct FlowNode {
    std::string id;
    FlowKind kind = FlowKind::Energy;
    NodeRole role = NodeRole::Transmission;
    std::optional<std::string> agent;  // controlling agent, if any
};

/// Directed edge carrying a rate-valued flow. Units by kind: W (energy),
/// bit/s (information), currency per step (payment). Payment capacity
/// defaults to unbounded.
struct FlowEdge {
    std::string from;
    std::string to;
    double capacity = std::numeric_limits<double>::infinity();
    double flow = 0.0;
};

/// A single-kind flow graph. Construction is permissive beyond basic shape
/// checks so that ill-formed states remain representable; validate() reports
/// them as data.
class FlowNetwork {
public:
    using EdgeKey = std::pair<std::string, std::string>;

    explicit FlowNetwork(FlowKind kind) : kind_(kind) {}

    FlowKind kind() const { return kind_; }

    void add_node(FlowNode node);
    void add_edge(FlowEdge edge);

    bool has_node(const std::string& id) const { return nodes_.count(id) > 0; }
    bool has_edge(const std::string& from, const std::string& to) const {
        return edges_.count({from, to}) > 0;
    }

    const std::map<std::string, FlowNode>& nodes() const { return nodes_; }
    const std::map<EdgeKey, FlowEdge>& edges() const { return edges_; }

    FlowNode* find_node(const std::string& id);
    const FlowNode* find_node(const std::string& id) const;
    FlowEdge* find_edge(const std::string& from, const std::string& to);
    const FlowEdge* find_edge(const std::string& from, const std::string& to) const;

    /// Signed flow from -> to. For antisymmetric kinds a stored reverse edge
    /// answers with its negated flow; for information the reverse direction
    /// is a distinct edge.
    double get_flow(const std::string& from, const std::string& to) const;

    /// Sets the flow, enforcing |value| <= capacity. For antisymmetric kinds
    /// a stored reverse edge is kept consistent at -value.
    void set_flow(const std::string& from, const std::string& to, double value);

    /// Sum of f(node, B) over all neighbors B.
    double node_balance(const std::string& id) const;

private:
    FlowKind kind_;
    std::map<std::string, FlowNode> nodes_;
    std::map<EdgeKey, FlowEdge> edges_;
};

class MultiNetwork;

/// Super node: controls nodes across networks, evaluated by a utility.
/// The utility functional is runtime-only state and is not serialized.
struct Agent {
    std::string id;
    std::set<std::pair<FlowKind, std::string>> controlled;
    std::function<double(const MultiNetwork&)> utility;
};

class MultiNetwork {
public:
    MultiNetwork()
        : energy_(FlowKind::Energy),
          information_(FlowKind::Information),
          payment_(FlowKind::Payment) {}

    FlowNetwork& network(FlowKind kind);
    const FlowNetwork& network(FlowKind kind) const;

    std::vector<Agent>& agents() { return agents_; }
    const std::vector<Agent>& agents() const { return agents_; }

    double get_flow(FlowKind kind, const std::string& from, const std::string& to) const {
        return network(kind).get_flow(from, to);
    }
    void set_flow(FlowKind kind, const std::string& from, const std::string& to, double value) {
        network(kind).set_flow(from, to, value);
    }
    double node_balance(FlowKind kind, const std::string& id) const {
        return network(kind).node_balance(id);
    }

private:
    FlowNetwork energy_;
    FlowNetwork information_;
    FlowNetwork payment_;
    std::vector<Agent> agents_;
};

/// Sign convention: net outflow positive. balance < -tol is a sink,
/// |balance| <= tol transmission, balance > tol a source.
NodeRole classify_node(double balance, double tolerance = kDefaultBalanceTolerance);

enum class Rule {
    Eq1Capacity,       // |f| <= c violated
    Eq2Antisymmetry,   // stored reverse pair disagrees (energy/payment)
    Eq3Balance,        // transmission node with nonzero balance
    AgentDisjoint,     // node controlled by more than one agent
    DanglingReference, // edge endpoint or controlled node missing
};

const char* to_string(Rule rule);

struct Violation {
    Rule rule;
    FlowKind kind;
    std::string element;  // offending node id or "from->to" edge label
    std::string detail;
};

/// Aggregated invariant check; empty result means well-formed. Pure: repeated
/// calls on the same value return identical lists.
std::vector<Violation> validate(const MultiNetwork& net,
                                double balance_tolerance = kDefaultBalanceTolerance);

}  // namespace gridflow::flow
