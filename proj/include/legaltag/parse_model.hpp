#pragma once

// Token / dependency-graph / constituency-tree data model and the CoNLL-U and
// bracketed-tree readers that populate it.

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <istream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "legaltag/error.hpp"
#include "legaltag/text.hpp"

namespace legaltag {

struct Token {
  std::size_t index = 0;  // 1-based
  std::string form;
  std::string pos;  // PTB XPOS

  friend bool operator==(const Token&, const Token&) = default;
};

struct DepEdge {
  std::size_t head = 0;  // 0 is the artificial root
  std::size_t dependent = 0;
  std::string relation;

  // "nmod" for "nmod:of".
  std::string_view base() const {
    std::string_view r = relation;
    return r.substr(0, r.find(':'));
  }
  // "of" for "nmod:of", empty when the relation carries no subtype.
  std::string_view suffix() const {
    std::string_view r = relation;
    auto pos = r.find(':');
    return pos == std::string_view::npos ? std::string_view{} : r.substr(pos + 1);
  }

  friend bool operator==(const DepEdge&, const DepEdge&) = default;
};

inline bool edge_order(const DepEdge& a, const DepEdge& b) {
  return std::tie(a.dependent, a.head, a.relation) < std::tie(b.dependent, b.head, b.relation);
}

// Enhanced dependency graph: a token may have several heads. Edges are kept
// sorted by (dependent, head, relation) so equality is order-free.
class DependencyGraph {
 public:
  DependencyGraph() = default;

  explicit DependencyGraph(std::vector<DepEdge> edges) : edges_(std::move(edges)) {
    for (const auto& e : edges_) {
      if (e.dependent == 0) throw std::invalid_argument("dependency edge with dependent 0");
      if (e.head == e.dependent)
        throw std::invalid_argument("self-loop on token " + std::to_string(e.dependent));
      if (e.relation.empty()) throw std::invalid_argument("empty dependency relation");
    }
    std::sort(edges_.begin(), edges_.end(), edge_order);
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  }

  const std::vector<DepEdge>& edges() const noexcept { return edges_; }
  bool empty() const noexcept { return edges_.empty(); }
  std::size_t size() const noexcept { return edges_.size(); }

  // All edges whose dependent is `token`, ordered by head index.
  std::vector<DepEdge> heads_of(std::size_t token) const {
    auto lo = std::lower_bound(edges_.begin(), edges_.end(), token,
                               [](const DepEdge& e, std::size_t t) { return e.dependent < t; });
    std::vector<DepEdge> out;
    for (auto it = lo; it != edges_.end() && it->dependent == token; ++it) out.push_back(*it);
    return out;
  }

  friend bool operator==(const DependencyGraph&, const DependencyGraph&) = default;

 private:
  std::vector<DepEdge> edges_;
};

struct TokenSpan {
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive

  std::size_t length() const noexcept { return last - first + 1; }
  bool contains(std::size_t i) const noexcept { return first <= i && i <= last; }
  bool contains(const TokenSpan& o) const noexcept { return first <= o.first && o.last <= last; }

  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

// A constituent. Leaves are preterminals: `label` is the POS tag and `word`
// the token; internal nodes have children and an empty word.
struct ConstituencyNode {
  std::string label;
  std::string word;
  std::vector<ConstituencyNode> children;
  TokenSpan span;

  bool is_leaf() const noexcept { return children.empty(); }

  friend bool operator==(const ConstituencyNode&, const ConstituencyNode&) = default;
};

inline void write_bracketed(std::ostream& os, const ConstituencyNode& node) {
  os << '(' << node.label;
  if (node.is_leaf()) {
    os << ' ' << node.word;
  } else {
    for (const auto& c : node.children) {
      os << ' ';
      write_bracketed(os, c);
    }
  }
  os << ')';
}

inline std::string to_bracketed(const ConstituencyNode& node) {
  std::ostringstream os;
  write_bracketed(os, node);
  return os.str();
}

inline void collect_leaves(const ConstituencyNode& node, std::vector<const ConstituencyNode*>& out) {
  if (node.is_leaf()) {
    out.push_back(&node);
    return;
  }
  for (const auto& c : node.children) collect_leaves(c, out);
}

struct ParsedSentence {
  std::vector<Token> tokens;
  DependencyGraph deps;
  std::optional<ConstituencyNode> tree;
  std::string text;

  std::size_t size() const noexcept { return tokens.size(); }
  // 1-based access.
  const Token& token(std::size_t index) const { return tokens.at(index - 1); }

  friend bool operator==(const ParsedSentence&, const ParsedSentence&) = default;
};

struct DocumentMetadata {
  std::string title;
  std::string court;
  std::string year;

  friend bool operator==(const DocumentMetadata&, const DocumentMetadata&) = default;
};

struct Document {
  std::string id;
  std::vector<ParsedSentence> sentences;
  DocumentMetadata metadata;

  std::string full_text() const {
    std::string out;
    for (const auto& s : sentences) {
      if (!out.empty()) out += ' ';
      out += s.text;
    }
    return out;
  }
};

inline std::string join_forms(const std::vector<Token>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.form;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bracketed (Penn Treebank) trees
// ---------------------------------------------------------------------------

namespace detail {

class BracketReader {
 public:
  explicit BracketReader(std::string_view input) : in_(input) {}

  bool at_end() {
    skip_ws();
    return pos_ >= in_.size();
  }

  ConstituencyNode read_tree() {
    struct Frame {
      ConstituencyNode node;
      std::size_t open = 0;
      bool labelled = false;
    };
    std::vector<Frame> stack;
    std::size_t next_leaf = 1;

    skip_ws();
    if (pos_ >= in_.size()) throw ParseError("empty bracketed input", 0, pos_);
    if (in_[pos_] != '(') throw ParseError("expected '('", 0, pos_);

    while (true) {
      skip_ws();
      if (pos_ >= in_.size()) {
        throw ParseError("unbalanced parentheses: '(' never closed", 0, stack.back().open);
      }
      char c = in_[pos_];
      if (c == '(') {
        if (!stack.empty() && !stack.back().node.word.empty())
          throw ParseError("constituent mixes a word and child constituents", 0, pos_);
        if (!stack.empty()) stack.back().labelled = true;
        stack.push_back(Frame{{}, pos_, false});
        ++pos_;
      } else if (c == ')') {
        if (stack.empty()) throw ParseError("unbalanced parentheses: unexpected ')'", 0, pos_);
        Frame f = std::move(stack.back());
        stack.pop_back();
        auto& n = f.node;
        if (n.is_leaf()) {
          if (n.word.empty()) throw ParseError("empty constituent", 0, f.open);
          n.span = {next_leaf, next_leaf};
          ++next_leaf;
        } else {
          n.span = {n.children.front().span.first, n.children.back().span.last};
        }
        ++pos_;
        if (stack.empty()) return std::move(n);
        stack.back().node.children.push_back(std::move(n));
      } else {
        if (stack.empty()) throw ParseError("text outside parentheses", 0, pos_);
        std::size_t start = pos_;
        std::string_view atom = read_atom();
        auto& top = stack.back();
        if (!top.labelled) {
          top.node.label = std::string(atom);
          top.labelled = true;
        } else if (top.node.children.empty() && top.node.word.empty()) {
          top.node.word = std::string(atom);
        } else {
          throw ParseError("unexpected token '" + std::string(atom) + "'", 0, start);
        }
      }
    }
  }

 private:
  void skip_ws() {
    while (pos_ < in_.size() && text::is_space(in_[pos_])) ++pos_;
  }
  std::string_view read_atom() {
    std::size_t start = pos_;
    while (pos_ < in_.size() && !text::is_space(in_[pos_]) && in_[pos_] != '(' && in_[pos_] != ')')
      ++pos_;
    return in_.substr(start, pos_ - start);
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Reads exactly one tree; trailing non-space input is an error.
inline ConstituencyNode read_bracketed(std::string_view input) {
  detail::BracketReader reader(input);
  if (reader.at_end()) throw ParseError("empty bracketed input", 0, 0);
  auto tree = reader.read_tree();
  if (!reader.at_end()) throw ParseError("trailing input after tree", 0);
  return tree;
}

inline ConstituencyNode read_bracketed(std::istream& is) {
  std::string all{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
  return read_bracketed(all);
}

// Reads a sequence of trees, e.g. a sidecar file aligned with a CoNLL-U file.
inline std::vector<ConstituencyNode> read_bracketed_all(std::string_view input) {
  detail::BracketReader reader(input);
  std::vector<ConstituencyNode> out;
  while (!reader.at_end()) out.push_back(reader.read_tree());
  return out;
}

inline std::vector<ConstituencyNode> read_bracketed_all(std::istream& is) {
  std::string all{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
  return read_bracketed_all(all);
}

// Attaches a tree whose leaf count must equal the sentence length.
inline void attach_tree(ParsedSentence& sentence, ConstituencyNode tree) {
  if (tree.span.first != 1 || tree.span.last != sentence.size()) {
    throw ParseError("constituency tree covers " + std::to_string(tree.span.last) +
                         " tokens but the sentence has " + std::to_string(sentence.size()),
                     0);
  }
  sentence.tree = std::move(tree);
}

// ---------------------------------------------------------------------------
// CoNLL-U
// ---------------------------------------------------------------------------

namespace detail {

inline std::optional<std::size_t> parse_index(std::string_view s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

struct ConlluBlock {
  ParsedSentence sentence;
  std::vector<DepEdge> edges;
  std::optional<std::string> text;
  std::optional<std::pair<std::string, std::size_t>> constituency;  // bracketed, line
  std::size_t first_line = 0;
};

inline ParsedSentence finish_block(ConlluBlock& b) {
  auto& s = b.sentence;
  const std::size_t n = s.tokens.size();
  std::vector<bool> has_head(n + 1, false);
  for (const auto& e : b.edges) {
    if (e.head > n)
      throw ParseError("head " + std::to_string(e.head) + " outside sentence", b.first_line);
    has_head[e.dependent] = true;
  }
  for (std::size_t i = 1; i <= n; ++i) {
    if (!has_head[i])
      throw ParseError("token " + std::to_string(i) + " has no head", b.first_line);
  }
  try {
    s.deps = DependencyGraph(std::move(b.edges));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), b.first_line);
  }
  s.text = b.text ? *b.text : join_forms(s.tokens);
  if (b.constituency) {
    try {
      attach_tree(s, read_bracketed(b.constituency->first));
    } catch (const ParseError& e) {
      throw ParseError(std::string("constituency comment: ") + e.what(), b.constituency->second,
                       e.offset());
    }
  }
  return std::move(s);
}

}  // namespace detail

// One fragment per sentence block: tokens, the enhanced graph (DEPS column,
// falling back to HEAD/DEPREL), the "# text" comment and an optional inline
// "# constituency = (...)" tree.
inline std::vector<ParsedSentence> read_conllu(std::istream& is) {
  std::vector<ParsedSentence> out;
  detail::ConlluBlock block;
  bool open = false;
  std::string line;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (open && !block.sentence.tokens.empty()) out.push_back(detail::finish_block(block));
    block = {};
    open = false;
  };

  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) {
      flush();
      continue;
    }
    if (!open) {
      open = true;
      block.first_line = line_no;
    }
    if (line[0] == '#') {
      std::string_view body = text::trim(std::string_view(line).substr(1));
      auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      auto key = text::trim(body.substr(0, eq));
      auto value = text::trim(body.substr(eq + 1));
      if (key == "text") block.text = std::string(value);
      if (key == "constituency") block.constituency = {std::string(value), line_no};
      continue;
    }

    auto cols = text::split(line, '\t');
    if (cols.size() != 10) {
      throw ParseError("expected 10 tab-separated columns, found " + std::to_string(cols.size()),
                       line_no);
    }
    std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) continue;

    auto index = detail::parse_index(id);
    if (!index || *index == 0) throw ParseError("bad token id '" + std::string(id) + "'", line_no);
    if (*index != block.sentence.tokens.size() + 1)
      throw ParseError("token ids must be contiguous from 1", line_no);
    if (cols[1].empty()) throw ParseError("empty FORM", line_no);

    block.sentence.tokens.push_back(Token{*index, std::string(cols[1]), std::string(cols[4])});

    std::string_view head_col = cols[6];
    std::optional<std::size_t> basic_head;
    if (head_col != "_") {
      basic_head = detail::parse_index(head_col);
      if (!basic_head) throw ParseError("non-numeric HEAD '" + std::string(head_col) + "'", line_no);
    }

    std::string_view deps_col = cols[8];
    if (deps_col != "_" && !deps_col.empty()) {
      for (auto pair : text::split(deps_col, '|')) {
        auto colon = pair.find(':');
        if (colon == std::string_view::npos)
          throw ParseError("malformed DEPS entry '" + std::string(pair) + "'", line_no);
        auto head_str = pair.substr(0, colon);
        if (head_str.find('.') != std::string_view::npos) continue;  // empty-node head
        auto head = detail::parse_index(head_str);
        if (!head) throw ParseError("non-numeric head '" + std::string(head_str) + "'", line_no);
        auto rel = pair.substr(colon + 1);
        if (rel.empty() || *head == *index)
          throw ParseError("malformed DEPS entry '" + std::string(pair) + "'", line_no);
        block.edges.push_back(DepEdge{*head, *index, std::string(rel)});
      }
    } else if (basic_head) {
      if (cols[7].empty() || cols[7] == "_" || *basic_head == *index)
        throw ParseError("malformed HEAD/DEPREL", line_no);
      block.edges.push_back(DepEdge{*basic_head, *index, std::string(cols[7])});
    }
  }
  flush();
  return out;
}

inline std::vector<ParsedSentence> read_conllu(std::string_view input) {
  std::istringstream is{std::string(input)};
  return read_conllu(is);
}

// Writes the fields the reader keeps; LEMMA/UPOS/FEATS/MISC are "_".
inline void write_conllu(std::ostream& os, const ParsedSentence& s) {
  os << "# text = " << s.text << '\n';
  if (s.tree) os << "# constituency = " << to_bracketed(*s.tree) << '\n';
  for (const auto& t : s.tokens) {
    auto heads = s.deps.heads_of(t.index);
    os << t.index << '\t' << t.form << "\t_\t_\t" << (t.pos.empty() ? "_" : t.pos) << "\t_\t";
    if (heads.empty()) {
      os << "_\t_\t_";
    } else {
      os << heads.front().head << '\t' << heads.front().relation << '\t';
      for (std::size_t i = 0; i < heads.size(); ++i) {
        if (i) os << '|';
        os << heads[i].head << ':' << heads[i].relation;
      }
    }
    os << "\t_\n";
  }
  os << '\n';
}

// ---------------------------------------------------------------------------
// acl pruning
// ---------------------------------------------------------------------------

// Throws CycleError naming one token on a cycle of the head-of relation.
inline void check_acyclic(const DependencyGraph& deps) {
  std::size_t n = 0;
  for (const auto& e : deps.edges()) n = std::max({n, e.head, e.dependent});
  // 0 = unvisited, 1 = on stack, 2 = done
  std::vector<int> state(n + 1, 0);
  for (std::size_t start = 1; start <= n; ++start) {
    if (state[start]) continue;
    // iterative DFS from dependent to heads
    std::vector<std::pair<std::size_t, std::size_t>> stack{{start, 0}};
    state[start] = 1;
    while (!stack.empty()) {
      auto& [tok, next] = stack.back();
      auto heads = deps.heads_of(tok);
      if (next < heads.size()) {
        std::size_t h = heads[next++].head;
        if (h == 0) continue;
        if (state[h] == 1)
          throw CycleError("dependency cycle through token " + std::to_string(h), h);
        if (state[h] == 0) {
          state[h] = 1;
          stack.emplace_back(h, 0);
        }
      } else {
        state[tok] = 2;
        stack.pop_back();
      }
    }
  }
}

inline bool is_acl_relation(std::string_view rel) {
  return rel == "acl" || text::starts_with(rel, "acl:");
}

// Drops "acl" / "acl:*" edges, which point from a noun back into the clause
// that modifies it and close cycles in enhanced graphs.
inline DependencyGraph prune_acl_edges(const DependencyGraph& deps) {
  std::vector<DepEdge> kept;
  for (const auto& e : deps.edges())
    if (!is_acl_relation(e.relation)) kept.push_back(e);
  DependencyGraph out(std::move(kept));
  check_acyclic(out);
  return out;
}

}  // namespace legaltag
