#pragma once

#include "json.hpp"

#include "gridflow/flow/network.hpp"

namespace gridflow::flow {

/// Canonical document shape:
///   {networks: {energy|information|payment: {nodes: [...], edges: [...]}},
///    agents: [{id, controlled: [{kind, node}]}]}
/// Unbounded capacities are omitted on write and default to unbounded on read.
nlohmann::ordered_json to_json(const MultiNetwork& net);

/// Permissive inverse of to_json: shape errors throw, invariant breaches do
/// not (validate() reports those).
MultiNetwork multinetwork_from_json(const nlohmann::json& doc);

}  // namespace gridflow::flow
