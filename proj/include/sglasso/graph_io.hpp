#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sglasso/metrics.hpp"

namespace sglasso {

enum class GraphFormat { dot, json_adjacency, edge_csv };

GraphFormat parse_graph_format(const std::string& s);
/// File extension without the dot.
std::string graph_format_extension(GraphFormat f);

/// Nodes are numbered from 1. `labels` may be empty or hold one name per node.
std::string graph_to_dot(const GraphModel& g, const std::vector<std::string>& labels = {});
nlohmann::json graph_to_json(const GraphModel& g, const std::vector<std::string>& labels = {});
/// i,j rows with i < j.
std::string graph_to_edge_csv(const GraphModel& g);

GraphModel graph_from_dot(const std::string& text);
GraphModel graph_from_json(const nlohmann::json& j);
/// The edge list does not carry isolated nodes, so p is passed in.
GraphModel graph_from_edge_csv(const std::string& text, std::size_t p);

std::string render_graph(const GraphModel& g, GraphFormat f, const std::vector<std::string>& labels = {});
void export_graph(const GraphModel& g, const std::string& path, GraphFormat f,
                  const std::vector<std::string>& labels = {});

}  // namespace sglasso
