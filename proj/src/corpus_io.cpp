#include "tbcnn/corpus_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "tbcnn/error.hpp"

namespace tbcnn {

namespace {

constexpr std::string_view kAuxCategory = "@";

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::optional<std::size_t> parse_index(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::size_t value = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || end != s.data() + s.size()) return std::nullopt;
  return value;
}

// Unbinarized constituent as read from the text.
struct RawNode {
  std::string label;
  std::optional<std::string> word;
  std::vector<RawNode> kids;
};

class BracketReader {
 public:
  explicit BracketReader(std::string_view text) : text_(text) {}

  RawNode read_tree() {
    skip_space();
    if (pos_ == text_.size()) throw ParseError("empty tree", pos_);
    if (text_[pos_] != '(') throw ParseError("expected '('", pos_);
    RawNode root = read_node();
    skip_space();
    if (pos_ != text_.size()) {
      throw ParseError(text_[pos_] == ')' ? "unbalanced brackets: extra ')'"
                                          : "trailing text after tree",
                       pos_);
    }
    return root;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  std::string read_token() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '(' &&
           text_[pos_] != ')') {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  RawNode read_node() {
    const std::size_t open = pos_;
    ++pos_;  // '('
    skip_space();
    RawNode node;
    if (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')') {
      node.label = read_token();
    }
    std::vector<RawNode> kids;
    std::size_t bare_tokens = 0;
    while (true) {
      skip_space();
      if (pos_ == text_.size()) {
        throw ParseError("unbalanced brackets: '(' opened at offset " +
                             std::to_string(open) + " is never closed",
                         pos_);
      }
      const char c = text_[pos_];
      if (c == ')') {
        ++pos_;
        break;
      }
      if (c == '(') {
        kids.push_back(read_node());
      } else {
        RawNode leaf;
        leaf.word = read_token();
        kids.push_back(std::move(leaf));
        ++bare_tokens;
      }
    }
    if (kids.empty()) throw ParseError("constituent without children", open);
    if (kids.size() == 1 && bare_tokens == 1) {
      node.word = std::move(kids.front().word);
    } else {
      node.kids = std::move(kids);
    }
    return node;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

class TreeBuilder {
 public:
  explicit TreeBuilder(ParseTree& tree) : tree_(tree) {}

  std::size_t emit(const RawNode& raw) {
    const std::size_t index = allocate();
    {
      TreeNode& node = tree_.nodes[index];
      node.word = raw.word;
      node.category = raw.label;
      node.label = parse_index(raw.label);
      node.auxiliary = raw.label == kAuxCategory;
    }
    std::vector<std::size_t> children;
    if (raw.kids.size() <= 2) {
      for (const auto& k : raw.kids) children.push_back(emit(k));
    } else {
      children.push_back(emit(raw.kids.front()));
      children.push_back(emit_aux(std::span(raw.kids).subspan(1)));
    }
    tree_.nodes[index].children = std::move(children);
    return index;
  }

 private:
  std::size_t allocate() {
    tree_.nodes.emplace_back();
    return tree_.nodes.size() - 1;
  }

  // Right-branching: (c1 c2 ... cm) -> (c1 (@ c2 ... cm)).
  std::size_t emit_aux(std::span<const RawNode> kids) {
    if (kids.size() == 1) return emit(kids.front());
    const std::size_t index = allocate();
    tree_.nodes[index].category = std::string(kAuxCategory);
    tree_.nodes[index].auxiliary = true;
    std::vector<std::size_t> children;
    children.push_back(emit(kids.front()));
    children.push_back(emit_aux(kids.subspan(1)));
    tree_.nodes[index].children = std::move(children);
    return index;
  }

  ParseTree& tree_;
};

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = s.find(sep, start);
    out.push_back(s.substr(start, end == std::string_view::npos ? end : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::string_view trim_cr(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
    line.remove_suffix(1);
  }
  return line;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), is_space);
}

std::string join_ids(const std::vector<std::size_t>& ids) {
  std::string out;
  for (const std::size_t id : ids) {
    if (!out.empty()) out += ", ";
    out += std::to_string(id);
  }
  return out;
}

void write_bracketed(const ParseTree& tree, std::size_t i, std::string& out) {
  const TreeNode& node = tree.nodes[i];
  std::string tag;
  if (node.label) {
    tag = std::to_string(*node.label);
  } else if (node.auxiliary) {
    tag = std::string(kAuxCategory);
  } else {
    tag = node.category;
  }
  if (node.is_leaf()) {
    if (tag.empty()) {
      out += *node.word;
    } else {
      out += '(' + tag + ' ' + *node.word + ')';
    }
    return;
  }
  out += '(';
  out += tag.empty() ? "X" : tag;
  for (const std::size_t c : node.children) {
    out += ' ';
    write_bracketed(tree, c, out);
  }
  out += ')';
}

template <typename Fn>
auto with_context(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const DataError& e) {
    throw DataError(where + ": " + e.what());
  }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open file");
  return in;
}

}  // namespace

ParseTree parse_constituency(std::string_view text) {
  const RawNode raw = BracketReader(text).read_tree();
  ParseTree tree;
  tree.kind = TreeKind::kConstituency;
  tree.root = TreeBuilder(tree).emit(raw);
  recompute_structure(tree);
  tree.sentence_label = tree.nodes[tree.root].label;
  validate(tree);
  return tree;
}

ParseTree parse_dependency(std::string_view block) {
  struct Row {
    std::string form;
    std::size_t head;
    std::string relation;
  };
  std::vector<Row> rows;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  for (const std::string_view raw_line : split(block, '\n')) {
    ++line_no;
    const std::size_t line_offset = offset;
    offset += raw_line.size() + 1;
    const std::string_view line = trim_cr(raw_line);
    if (is_blank(line) || line.front() == '#') continue;
    const auto cols = split(line, '\t');
    if (cols.size() < 8) {
      throw FormatError("expected at least 8 tab-separated columns, found " +
                            std::to_string(cols.size()),
                        line_no);
    }
    const auto id = parse_index(cols[0]);
    if (!id || *id != rows.size() + 1) {
      throw ParseError("non-contiguous token id '" + std::string(cols[0]) +
                           "', expected " + std::to_string(rows.size() + 1),
                       line_offset);
    }
    const auto head = parse_index(cols[6]);
    if (!head) {
      throw FormatError("head '" + std::string(cols[6]) + "' is not a token id",
                        line_no);
    }
    rows.push_back({std::string(cols[1]), *head, std::string(cols[7])});
  }
  const std::size_t n = rows.size();
  if (n == 0) throw ParseError("empty dependency block", 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].head > n) {
      throw StructureError("token " + std::to_string(i + 1) + " has head " +
                           std::to_string(rows[i].head) + " beyond sentence length " +
                           std::to_string(n));
    }
  }
  // Follow head links; revisiting a token on the current walk is a cycle.
  std::vector<int> state(n + 1, 0);  // 0 new, 1 on walk, 2 reaches root
  for (std::size_t start = 1; start <= n; ++start) {
    std::vector<std::size_t> walk;
    std::size_t cur = start;
    while (cur != 0 && state[cur] == 0) {
      state[cur] = 1;
      walk.push_back(cur);
      cur = rows[cur - 1].head;
    }
    if (cur != 0 && state[cur] == 1) {
      std::vector<std::size_t> cycle(
          std::find(walk.begin(), walk.end(), cur), walk.end());
      std::sort(cycle.begin(), cycle.end());
      throw StructureError("head cycle among tokens " + join_ids(cycle));
    }
    for (const std::size_t w : walk) state[w] = 2;
  }
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].head == 0) roots.push_back(i + 1);
  }
  if (roots.size() != 1) {
    throw StructureError(roots.empty() ? "no root token"
                                       : "multiple roots: tokens " + join_ids(roots));
  }

  ParseTree tree;
  tree.kind = TreeKind::kDependency;
  tree.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    TreeNode& node = tree.nodes[i];
    node.word = rows[i].form;
    node.position = i + 1;
    if (rows[i].head == 0) {
      tree.root = i;
    } else {
      node.relation = rows[i].relation;
      tree.nodes[rows[i].head - 1].children.push_back(i);
    }
  }
  recompute_structure(tree);
  validate(tree);
  return tree;
}

std::string to_bracketed(const ParseTree& tree) {
  if (tree.kind != TreeKind::kConstituency) {
    throw ContractError("to_bracketed needs a constituency tree");
  }
  std::string out;
  write_bracketed(tree, tree.root, out);
  return out;
}

std::string to_conll(const ParseTree& tree) {
  if (tree.kind != TreeKind::kDependency) {
    throw ContractError("to_conll needs a dependency tree");
  }
  std::string out;
  for (const std::size_t i : tree.words_in_order()) {
    const TreeNode& node = tree.nodes[i];
    const std::size_t head = node.parent ? tree.nodes[*node.parent].position : 0;
    out += std::to_string(node.position) + '\t' + *node.word + "\t_\t_\t_\t_\t" +
           std::to_string(head) + '\t' + node.relation.value_or("root") + "\t_\t_\n";
  }
  return out;
}

std::vector<ParseTree> subsentence_samples(const ParseTree& tree) {
  std::vector<ParseTree> out;
  for (std::size_t top = 0; top < tree.nodes.size(); ++top) {
    if (!tree.nodes[top].label) continue;
    ParseTree sub;
    sub.kind = tree.kind;
    std::vector<std::pair<std::size_t, std::size_t>> queue{{top, 0}};
    sub.nodes.push_back(tree.nodes[top]);
    // Breadth-first copy with re-indexed child links.
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const auto [src, dst] = queue[q];
      std::vector<std::size_t> kids;
      for (const std::size_t c : tree.nodes[src].children) {
        kids.push_back(sub.nodes.size());
        queue.emplace_back(c, sub.nodes.size());
        sub.nodes.push_back(tree.nodes[c]);
      }
      sub.nodes[dst].children = std::move(kids);
    }
    sub.root = 0;
    if (sub.kind == TreeKind::kDependency) {
      // Renumber positions densely and drop the new root's relation.
      std::vector<std::size_t> order(sub.nodes.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return sub.nodes[a].position < sub.nodes[b].position;
      });
      for (std::size_t r = 0; r < order.size(); ++r) sub.nodes[order[r]].position = r + 1;
      sub.nodes[0].relation.reset();
    }
    recompute_structure(sub);
    sub.sentence_label = tree.nodes[top].label;
    out.push_back(std::move(sub));
  }
  return out;
}

std::vector<ParseTree> read_constituency(std::istream& in) {
  std::vector<ParseTree> trees;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    trees.push_back(with_context("line " + std::to_string(line_no),
                                 [&] { return parse_constituency(line); }));
  }
  return trees;
}

std::vector<ParseTree> read_dependency(std::istream& in) {
  std::vector<ParseTree> trees;
  std::string line;
  std::string block;
  std::size_t line_no = 0;
  std::size_t block_start = 0;
  const auto flush = [&] {
    if (block.empty()) return;
    trees.push_back(with_context(
        "sentence " + std::to_string(trees.size() + 1) + " starting at line " +
            std::to_string(block_start),
        [&] { return parse_dependency(block); }));
    block.clear();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(trim_cr(line))) {
      flush();
      continue;
    }
    if (block.empty()) block_start = line_no;
    block += line;
    block += '\n';
  }
  flush();
  return trees;
}

std::vector<ParseTree> read_constituency_file(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return with_context(path.string(), [&] { return read_constituency(in); });
}

std::vector<ParseTree> read_dependency_file(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return with_context(path.string(), [&] { return read_dependency(in); });
}

std::vector<LabelRecord> read_labels(std::istream& in) {
  std::vector<LabelRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim_cr(line);
    if (is_blank(view)) continue;
    const auto cols = split(view, '\t');
    if (cols.size() != 2 || cols[0].empty()) {
      throw FormatError("expected LABEL<TAB>sentence-id", line_no);
    }
    const auto id = parse_index(cols[1]);
    if (!id || *id == 0) {
      throw FormatError("sentence-id '" + std::string(cols[1]) +
                            "' is not a positive integer",
                        line_no);
    }
    out.push_back({std::string(cols[0]), *id});
  }
  return out;
}

std::vector<LabelRecord> read_labels_file(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return with_context(path.string(), [&] { return read_labels(in); });
}

LabelSet::LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) {
      throw ConfigError("duplicate label name '" + names_[i] + "'");
    }
  }
}

LabelSet LabelSet::numeric(std::size_t count) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < count; ++i) names.push_back(std::to_string(i));
  return LabelSet(std::move(names));
}

LabelSet LabelSet::from_labels(std::span<const std::string> labels) {
  std::vector<std::string> unique(labels.begin(), labels.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::size_t max_value = 0;
  bool numeric_labels = !unique.empty();
  for (const auto& name : unique) {
    const auto v = parse_index(name);
    if (!v || std::to_string(*v) != name) {
      numeric_labels = false;
      break;
    }
    max_value = std::max(max_value, *v);
  }
  if (numeric_labels) return numeric(max_value + 1);
  return LabelSet(std::move(unique));
}

std::optional<std::size_t> LabelSet::index_of(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void apply_labels(std::span<ParseTree> trees, std::span<const LabelRecord> labels,
                  const LabelSet& set) {
  std::vector<bool> seen(trees.size(), false);
  for (const auto& rec : labels) {
    if (rec.sentence_id == 0 || rec.sentence_id > trees.size()) {
      throw DataError("label for sentence " + std::to_string(rec.sentence_id) +
                      " but the corpus has " + std::to_string(trees.size()) +
                      " sentences");
    }
    if (seen[rec.sentence_id - 1]) {
      throw DataError("sentence " + std::to_string(rec.sentence_id) +
                      " is labelled twice");
    }
    const auto index = set.index_of(rec.label);
    if (!index) {
      throw DataError("unknown label '" + rec.label + "' for sentence " +
                      std::to_string(rec.sentence_id));
    }
    seen[rec.sentence_id - 1] = true;
    trees[rec.sentence_id - 1].sentence_label = *index;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw DataError("sentence " + std::to_string(i + 1) + " has no label");
  }
}

DepTypeInventory::DepTypeInventory(std::vector<std::string> dedicated)
    : dedicated_(std::move(dedicated)) {
  if (dedicated_.size() > kMaxDedicated) {
    throw ContractError("at most " + std::to_string(kMaxDedicated) +
                        " dedicated relation slots");
  }
  for (std::size_t i = 0; i < dedicated_.size(); ++i) {
    if (!slots_.emplace(dedicated_[i], i).second) {
      throw ContractError("duplicate relation '" + dedicated_[i] + "'");
    }
  }
}

std::size_t DepTypeInventory::slot_of(std::string_view relation) const {
  const auto it = slots_.find(std::string(relation));
  return it == slots_.end() ? shared_slot() : it->second;
}

DepTypeInventory build_dep_inventory(std::span<const ParseTree> corpus) {
  std::map<std::string, std::size_t> counts;
  for (const auto& tree : corpus) {
    if (tree.kind != TreeKind::kDependency) {
      throw ContractError("dependency inventory needs dependency trees");
    }
    for (const auto& node : tree.nodes) {
      if (node.relation) ++counts[*node.relation];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  // map order is lexicographic, so a stable sort on count keeps the tie rule.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> dedicated;
  for (std::size_t i = 0; i < ranked.size() && i < DepTypeInventory::kMaxDedicated; ++i) {
    dedicated.push_back(ranked[i].first);
  }
  return DepTypeInventory(std::move(dedicated));
}

}  // namespace tbcnn
