#include "sglasso/graph_io.hpp"

#include <regex>
#include <sstream>

#include "sglasso/matrix_io.hpp"

namespace sglasso {

namespace {

std::string escape_label(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

void check_labels(const GraphModel& g, const std::vector<std::string>& labels) {
  if (!labels.empty() && labels.size() != g.p())
    throw std::invalid_argument("graph export: expected " + std::to_string(g.p()) + " labels");
}

std::size_t node_index(long v, std::size_t p, const std::string& where) {
  if (v < 1 || static_cast<std::size_t>(v) > p)
    throw ParseError(where + ": node " + std::to_string(v) + " out of range 1.." + std::to_string(p));
  return static_cast<std::size_t>(v - 1);
}

}  // namespace

GraphFormat parse_graph_format(const std::string& s) {
  if (s == "dot") return GraphFormat::dot;
  if (s == "json" || s == "json-adjacency") return GraphFormat::json_adjacency;
  if (s == "csv" || s == "edge-csv") return GraphFormat::edge_csv;
  throw std::invalid_argument("unknown graph format: " + s);
}

std::string graph_format_extension(GraphFormat f) {
  switch (f) {
    case GraphFormat::dot: return "dot";
    case GraphFormat::json_adjacency: return "json";
    case GraphFormat::edge_csv: return "csv";
  }
  return "";
}

std::string graph_to_dot(const GraphModel& g, const std::vector<std::string>& labels) {
  check_labels(g, labels);
  std::string out = "graph G {\n";
  for (std::size_t i = 0; i < g.p(); ++i) {
    out += "  " + std::to_string(i + 1);
    if (!labels.empty()) out += " [label=\"" + escape_label(labels[i]) + "\"]";
    out += ";\n";
  }
  for (auto [i, j] : g.edges()) out += "  " + std::to_string(i + 1) + " -- " + std::to_string(j + 1) + ";\n";
  return out + "}\n";
}

nlohmann::json graph_to_json(const GraphModel& g, const std::vector<std::string>& labels) {
  check_labels(g, labels);
  nlohmann::json adj = nlohmann::json::array();
  for (std::size_t i = 0; i < g.p(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < g.p(); ++j) row.push_back(g.has_edge(i, j) ? 1 : 0);
    adj.push_back(std::move(row));
  }
  nlohmann::json out{{"p", g.p()}, {"adjacency", std::move(adj)}};
  if (!labels.empty()) out["labels"] = labels;
  return out;
}

std::string graph_to_edge_csv(const GraphModel& g) {
  std::string out = "i,j\n";
  for (auto [i, j] : g.edges()) out += std::to_string(i + 1) + ',' + std::to_string(j + 1) + '\n';
  return out;
}

GraphModel graph_from_dot(const std::string& text) {
  static const std::regex node_re(R"(^\s*(\d+)\s*(\[.*\])?\s*;\s*$)");
  static const std::regex edge_re(R"(^\s*(\d+)\s*--\s*(\d+)\s*;\s*$)");
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<long, long>> edges;
  std::size_t p = 0;
  std::size_t lineno = 0;
  bool opened = false, closed = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::smatch m;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!opened) {
      if (line.rfind("graph", 0) != 0) throw ParseError("DOT parse error at line 1: expected 'graph'");
      opened = true;
    } else if (std::regex_match(line, m, edge_re)) {
      edges.emplace_back(std::stol(m[1]), std::stol(m[2]));
    } else if (std::regex_match(line, m, node_re)) {
      if (std::stol(m[1]) != static_cast<long>(p + 1))
        throw ParseError("DOT parse error at line " + std::to_string(lineno) + ": nodes must be numbered 1..p in order");
      ++p;
    } else if (line.find('}') != std::string::npos) {
      closed = true;
      break;
    } else {
      throw ParseError("DOT parse error at line " + std::to_string(lineno));
    }
  }
  if (!closed) throw ParseError("DOT parse error: missing closing brace");
  GraphModel g(p);
  for (auto [a, b] : edges) g.add_edge(node_index(a, p, "DOT"), node_index(b, p, "DOT"));
  return g;
}

GraphModel graph_from_json(const nlohmann::json& j) {
  try {
    const std::size_t p = j.at("p").get<std::size_t>();
    const auto& adj = j.at("adjacency");
    if (adj.size() != p) throw ParseError("graph JSON: adjacency has wrong row count");
    BoolMatrix a(p);
    for (std::size_t r = 0; r < p; ++r) {
      if (adj[r].size() != p) throw ParseError("graph JSON: row " + std::to_string(r + 1) + " has wrong length");
      for (std::size_t c = 0; c < p; ++c) a.set(r, c, adj[r][c].get<int>() != 0);
    }
    return GraphModel(std::move(a));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("graph JSON: ") + e.what());
  }
}

GraphModel graph_from_edge_csv(const std::string& text, std::size_t p) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || (line != "i,j" && line != "i,j\r"))
    throw ParseError("CSV parse error at row 1, column 1: expected header i,j");
  GraphModel g(p);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("CSV parse error at row " + std::to_string(row) + ", column 2");
    long a = 0, b = 0;
    try {
      a = std::stol(line.substr(0, comma));
      b = std::stol(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ParseError("CSV parse error at row " + std::to_string(row) + ", column 1");
    }
    g.add_edge(node_index(a, p, "edge CSV"), node_index(b, p, "edge CSV"));
  }
  return g;
}

std::string render_graph(const GraphModel& g, GraphFormat f, const std::vector<std::string>& labels) {
  switch (f) {
    case GraphFormat::dot: return graph_to_dot(g, labels);
    case GraphFormat::json_adjacency: return graph_to_json(g, labels).dump(2) + '\n';
    case GraphFormat::edge_csv: return graph_to_edge_csv(g);
  }
  return "";
}

void export_graph(const GraphModel& g, const std::string& path, GraphFormat f,
                  const std::vector<std::string>& labels) {
  write_text_file(path, render_graph(g, f, labels));
}

}  // namespace sglasso
