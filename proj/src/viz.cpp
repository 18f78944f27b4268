#include "tbcnn/viz.hpp"

#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "tbcnn/error.hpp"

namespace tbcnn {

namespace {

using nlohmann::json;

void yield(const ParseTree& tree, std::size_t node, std::vector<std::string>& words) {
  const auto& n = tree.nodes[node];
  if (n.word) words.push_back(*n.word);
  for (const std::size_t c : n.children) yield(tree, c, words);
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (const char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    if (ch == '\n') {
      out += "\\n";
      continue;
    }
    out += ch;
  }
  out += '"';
  return out;
}

json node_json(const ParseTree& tree, const NodeFractionMap& f, std::size_t i) {
  const auto& n = tree.nodes[i];
  json j;
  j["id"] = i;
  j["text"] = node_text(tree, i);
  j["word"] = n.word ? json(*n.word) : json(nullptr);
  j["category"] = n.category;
  j["relation"] = n.relation ? json(*n.relation) : json(nullptr);
  j["wins"] = f.wins[i];
  j["fraction"] = f.fraction(i);
  json kids = json::array();
  for (const std::size_t c : n.children) kids.push_back(node_json(tree, f, c));
  j["children"] = std::move(kids);
  return j;
}

void check_cover(const ParseTree& tree, const NodeFractionMap& f) {
  if (f.size() != tree.size()) {
    throw ShapeError("fraction map covers " + std::to_string(f.size()) + " nodes, tree has " +
                     std::to_string(tree.size()));
  }
}

}  // namespace

double NodeFractionMap::fraction(std::size_t node) const {
  if (total == 0) return 0.0;
  return static_cast<double>(wins.at(node)) / static_cast<double>(total);
}

std::vector<double> NodeFractionMap::fractions() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < wins.size(); ++i) out.push_back(fraction(i));
  return out;
}

NodeFractionMap fractions(const PoolProvenance& provenance, const ParseTree& tree) {
  NodeFractionMap f;
  f.wins.assign(tree.size(), 0);
  for (const auto& slot : provenance) {
    for (const auto& winner : slot) {
      if (!winner) continue;
      if (*winner >= tree.size()) {
        throw ContractError("provenance names node " + std::to_string(*winner) +
                            " outside the tree");
      }
      ++f.wins[*winner];
      ++f.total;
    }
  }
  return f;
}

std::string node_text(const ParseTree& tree, std::size_t node) {
  if (tree.kind == TreeKind::kDependency) return *tree.nodes[node].word;
  std::vector<std::string> words;
  yield(tree, node, words);
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::string emit_dot(const ParseTree& tree, const NodeFractionMap& fractions) {
  check_cover(tree, fractions);
  std::ostringstream out;
  out << "digraph tree {\n";
  out << "  node [shape=box, style=filled, fontname=\"Helvetica\"];\n";
  char buf[64];
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const double f = fractions.fraction(i);
    std::snprintf(buf, sizeof buf, " (%.2f)", f);
    const std::string label = node_text(tree, i) + buf;
    std::snprintf(buf, sizeof buf, "0.000 %.4f 1.000", f);
    out << "  n" << i << " [label=" << quote(label) << ", fillcolor=" << quote(buf) << "];\n";
  }
  for (std::size_t i = 0; i < tree.size(); ++i) {
    for (const std::size_t c : tree.nodes[i].children) {
      out << "  n" << i << " -> n" << c;
      if (const auto& rel = tree.nodes[c].relation) out << " [label=" << quote(*rel) << ']';
      out << ";\n";
    }
  }
  out << "}\n";
  return out.str();
}

std::string emit_json(const ParseTree& tree, const NodeFractionMap& fractions) {
  check_cover(tree, fractions);
  json j;
  j["kind"] = tree.kind == TreeKind::kConstituency ? "constituency" : "dependency";
  j["total"] = fractions.total;
  j["root"] = node_json(tree, fractions, tree.root);
  return j.dump(2) + "\n";
}

NodeFractionMap read_fraction_json(std::string_view text) {
  NodeFractionMap f;
  try {
    const json j = json::parse(text);
    f.total = j.at("total").get<std::size_t>();
    std::vector<const json*> stack{&j.at("root")};
    while (!stack.empty()) {
      const json& n = *stack.back();
      stack.pop_back();
      const auto id = n.at("id").get<std::size_t>();
      if (id >= f.wins.size()) f.wins.resize(id + 1, 0);
      f.wins[id] = n.at("wins").get<std::size_t>();
      for (const auto& c : n.at("children")) stack.push_back(&c);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed fraction document: ") + e.what());
  }
  return f;
}

}  // namespace tbcnn
