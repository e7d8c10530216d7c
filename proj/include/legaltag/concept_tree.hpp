#pragma once

// Legal-concept taxonomy: a rooted tree of terms (parents more general than
// children) with a hashed term index for keyword matching.

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "legaltag/error.hpp"
#include "legaltag/parse_model.hpp"
#include "legaltag/text.hpp"

namespace legaltag {

// Lowercase, trimmed, internal whitespace collapsed to one space.
inline std::string normalize_term(std::string_view term) {
  return text::join(text::split_ws(text::to_lower(term)), " ");
}

struct ConceptNode {
  std::string id;
  std::string term;
  std::optional<std::size_t> parent;
  std::vector<std::size_t> children;
};

class ConceptIndex {
 public:
  const std::vector<ConceptNode>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t max_term_words() const noexcept { return max_term_words_; }
  std::size_t root() const noexcept { return root_; }

  const ConceptNode* find(std::string_view term) const {
    auto it = by_term_.find(normalize_term(term));
    return it == by_term_.end() ? nullptr : &nodes_[it->second];
  }
  // Lookup of an already-normalized term.
  bool contains_normalized(const std::string& term) const { return by_term_.count(term) != 0; }

  std::size_t depth(std::size_t node) const {
    std::size_t d = 0;
    while (nodes_[node].parent) {
      node = *nodes_[node].parent;
      ++d;
    }
    return d;
  }

 private:
  friend ConceptIndex load_concept_tree(std::istream&);

  std::vector<ConceptNode> nodes_;
  std::unordered_map<std::string, std::size_t> by_term_;
  std::size_t max_term_words_ = 1;
  std::size_t root_ = 0;
};

// Taxonomy file: one "id<TAB>parent_id<TAB>term" per line, parent_id empty
// for the single root, "#" lines ignored. Parents may be declared after
// their children.
inline ConceptIndex load_concept_tree(std::istream& is) {
  ConceptIndex idx;
  std::unordered_map<std::string, std::size_t> by_id;
  std::vector<std::pair<std::string, std::size_t>> parent_ids;  // per node, with line
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line[0] == '#') continue;
    auto cols = text::split(line, '\t');
    if (cols.size() != 3) throw LoadError("expected id<TAB>parent<TAB>term", line_no);
    std::string id(text::trim(cols[0]));
    std::string parent(text::trim(cols[1]));
    std::string term = normalize_term(cols[2]);
    if (id.empty()) throw LoadError("empty node id", line_no);
    if (term.empty()) throw LoadError("empty term", line_no);
    if (by_id.count(id)) throw LoadError("duplicate node id '" + id + "'", line_no);
    if (idx.by_term_.count(term)) throw LoadError("duplicate term '" + term + "'", line_no);

    std::size_t pos = idx.nodes_.size();
    by_id.emplace(id, pos);
    idx.by_term_.emplace(term, pos);
    idx.max_term_words_ = std::max(idx.max_term_words_, text::split_ws(term).size());
    idx.nodes_.push_back(ConceptNode{id, term, std::nullopt, {}});
    parent_ids.emplace_back(parent, line_no);
  }
  if (idx.nodes_.empty()) throw LoadError("empty taxonomy");

  std::optional<std::size_t> root;
  for (std::size_t i = 0; i < idx.nodes_.size(); ++i) {
    const auto& [pid, ln] = parent_ids[i];
    if (pid.empty()) {
      if (root) throw LoadError("second root '" + idx.nodes_[i].term + "'", ln);
      root = i;
      continue;
    }
    auto it = by_id.find(pid);
    if (it == by_id.end()) throw LoadError("orphan node: unknown parent id '" + pid + "'", ln);
    idx.nodes_[i].parent = it->second;
    idx.nodes_[it->second].children.push_back(i);
  }
  if (!root) throw LoadError("taxonomy has no root");
  idx.root_ = *root;

  // Every node must reach the root; anything else sits on a parent cycle.
  std::vector<char> reaches(idx.nodes_.size(), 0);
  reaches[*root] = 1;
  std::vector<std::size_t> frontier{*root};
  std::size_t reached = 1;
  while (!frontier.empty()) {
    auto n = frontier.back();
    frontier.pop_back();
    for (auto c : idx.nodes_[n].children) {
      if (!reaches[c]) {
        reaches[c] = 1;
        ++reached;
        frontier.push_back(c);
      }
    }
  }
  if (reached != idx.nodes_.size()) {
    for (std::size_t i = 0; i < reaches.size(); ++i)
      if (!reaches[i])
        throw LoadError("parent cycle involving '" + idx.nodes_[i].term + "'", parent_ids[i].second);
  }
  return idx;
}

struct TermMatch {
  std::string term;
  TokenSpan span;

  friend bool operator==(const TermMatch&, const TermMatch&) = default;
};

// Greedy longest match, left to right, non-overlapping. Windows only cover
// tokens whose original indices are consecutive.
inline std::vector<TermMatch> match_terms(std::span<const Token> tokens, const ConceptIndex& index) {
  std::vector<TermMatch> out;
  std::vector<std::string> lowered;
  lowered.reserve(tokens.size());
  for (const auto& t : tokens) lowered.push_back(text::to_lower(t.form));

  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t best = 0;
    std::string best_term;
    std::size_t max_len = std::min(index.max_term_words(), tokens.size() - i);
    for (std::size_t len = max_len; len >= 1; --len) {
      bool contiguous = true;
      for (std::size_t j = i + 1; j < i + len; ++j)
        if (tokens[j].index != tokens[j - 1].index + 1) contiguous = false;
      if (!contiguous) continue;
      std::string key = lowered[i];
      for (std::size_t j = i + 1; j < i + len; ++j) key += ' ' + lowered[j];
      if (index.contains_normalized(key)) {
        best = len;
        best_term = std::move(key);
        break;
      }
    }
    if (best) {
      out.push_back(TermMatch{best_term, {tokens[i].index, tokens[i + best - 1].index}});
      i += best;
    } else {
      ++i;
    }
  }
  return out;
}

inline std::vector<TermMatch> match_terms(const ParsedSentence& sentence, const ConceptIndex& index) {
  return match_terms(std::span<const Token>(sentence.tokens), index);
}

// The more general parent term, absent for the root and unknown terms.
inline std::optional<std::string> generalize(std::string_view term, const ConceptIndex& index) {
  const ConceptNode* node = index.find(term);
  if (!node || !node->parent) return std::nullopt;
  return index.nodes()[*node->parent].term;
}

}  // namespace legaltag
