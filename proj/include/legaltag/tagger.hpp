#pragma once

// Phrase-tag generation. For each simple sentence and each legal term found in
// it, a tag is assembled from
//   (B) the smallest phrasal constituent around the term, and
//   (C) the chain of dependency heads above the term, with the prepositions
//       and conjunctions carried by enhanced relation subtypes,
// joined in sentence order. DEP_ONLY / CONST_ONLY / WORD_ONLY drop one or
// both of the structural steps.

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "legaltag/aspects.hpp"
#include "legaltag/concept_tree.hpp"
#include "legaltag/embeddings.hpp"
#include "legaltag/parse_model.hpp"
#include "legaltag/simplifier.hpp"

namespace legaltag {

enum class TagMode { hybrid, dep_only, const_only, word_only };

inline constexpr std::array<TagMode, 4> kAllTagModes{TagMode::dep_only, TagMode::const_only,
                                                     TagMode::hybrid, TagMode::word_only};

inline std::string_view to_string(TagMode mode) {
  switch (mode) {
    case TagMode::hybrid: return "HYBRID";
    case TagMode::dep_only: return "DEP_ONLY";
    case TagMode::const_only: return "CONST_ONLY";
    case TagMode::word_only: return "WORD_ONLY";
  }
  return "HYBRID";
}

inline std::optional<TagMode> parse_tag_mode(std::string_view s) {
  auto m = text::to_lower(s);
  if (m == "hybrid") return TagMode::hybrid;
  if (m == "dep_only" || m == "dep") return TagMode::dep_only;
  if (m == "const_only" || m == "const") return TagMode::const_only;
  if (m == "word_only" || m == "word") return TagMode::word_only;
  return std::nullopt;
}

struct Tag {
  std::string text;
  std::string matched_term;
  std::string doc_id;
  std::size_t sentence_index = 0;  // 0-based within the document
  std::string aspect;
  TagMode mode = TagMode::hybrid;

  friend bool operator==(const Tag&, const Tag&) = default;
};

struct TagOptions {
  // Run the simplifier before extraction (needs a constituency tree).
  bool simplify = true;
  // Restrict the "to"-before-VB insertion to words reached by backtracking.
  bool to_before_parents_only = false;
};

inline bool is_link_verb(std::string_view word) {
  static const std::unordered_set<std::string> verbs{
      "be",   "is",    "are",    "was",    "were",    "been", "being",
      "seem", "seems", "seemed", "become", "becomes", "became"};
  return verbs.count(text::to_lower(word)) != 0;
}

// ---------------------------------------------------------------------------
// Step B: smallest phrasal constituent
// ---------------------------------------------------------------------------

inline bool is_phrase_node(const ConstituencyNode& n) {
  return !n.is_leaf() && !n.label.empty() && n.label.back() == 'P';
}

// Lowest non-leaf node labelled "*P" whose span contains `span`, or null.
inline const ConstituencyNode* lowest_phrase(const ConstituencyNode& tree, TokenSpan span) {
  if (!tree.span.contains(span))
    throw std::out_of_range("term span [" + std::to_string(span.first) + "," +
                            std::to_string(span.last) + "] outside the tree");
  const ConstituencyNode* node = &tree;
  const ConstituencyNode* best = is_phrase_node(tree) ? &tree : nullptr;
  for (;;) {
    const ConstituencyNode* next = nullptr;
    for (const auto& c : node->children)
      if (!c.is_leaf() && c.span.contains(span)) next = &c;
    if (!next) return best;
    node = next;
    if (is_phrase_node(*node)) best = node;
  }
}

// A two-word constituent that only adds one of these in front of the term
// does not specify it any further.
inline bool is_uninformative_lead_pos(std::string_view pos) {
  return pos == "DT" || pos == "IN" || pos == "PRP$" || pos == "CD";
}

inline TokenSpan smallest_constituent(const ConstituencyNode& tree, TokenSpan term_span) {
  const ConstituencyNode* node = lowest_phrase(tree, term_span);
  if (!node) return term_span;
  std::vector<const ConstituencyNode*> leaves;
  collect_leaves(*node, leaves);
  if (node->span.length() == 2 && is_uninformative_lead_pos(leaves.front()->label)) return term_span;
  return node->span;
}

// ---------------------------------------------------------------------------
// Step C: dependency backtracking
// ---------------------------------------------------------------------------

inline int relation_priority(std::string_view base) {
  static constexpr std::array<std::string_view, 6> order{"nsubj", "obj", "nmod",
                                                         "obl",   "conj", "advcl"};
  for (std::size_t i = 0; i < order.size(); ++i)
    if (order[i] == base) return static_cast<int>(i);
  return static_cast<int>(order.size());
}

// The edge followed upwards from `token` when it has several heads.
inline std::optional<DepEdge> governing_edge(const DependencyGraph& deps, std::size_t token) {
  auto heads = deps.heads_of(token);
  if (heads.empty()) return std::nullopt;
  return *std::min_element(heads.begin(), heads.end(), [](const DepEdge& a, const DepEdge& b) {
    int pa = relation_priority(a.base()), pb = relation_priority(b.base());
    if (pa != pb) return pa < pb;
    return a.head < b.head;
  });
}

struct Insertion {
  std::string word;
  std::size_t earlier = 0;  // endpoint positions, earlier < later
  std::size_t later = 0;

  friend bool operator==(const Insertion&, const Insertion&) = default;
};

struct Backtrack {
  std::vector<std::size_t> parents;  // in the order reached
  std::vector<Insertion> insertions;
};

// Subtypes that name a construction rather than a word of the sentence.
inline bool is_lexical_suffix(std::string_view suffix) {
  static const std::unordered_set<std::string_view> structural{"poss", "tmod", "npmod",
                                                               "agent", "relcl", "arg"};
  return !suffix.empty() && !structural.count(suffix);
}

inline std::string suffix_words(std::string_view suffix) {
  std::string out(suffix);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

// Climbs governing edges from `start` until the root, a token without head, or
// an "obj" edge (the governing verb is not collected).
inline Backtrack backtrack_dependencies(const DependencyGraph& deps, std::size_t start,
                                        std::size_t max_steps = 0) {
  if (max_steps == 0)
    for (const auto& e : deps.edges()) max_steps = std::max({max_steps, e.head, e.dependent});

  Backtrack out;
  std::set<std::size_t> visited{start};
  std::size_t current = start;
  for (std::size_t steps = 0;; ++steps) {
    auto edge = governing_edge(deps, current);
    if (!edge || edge->head == 0 || edge->base() == "obj") break;
    if (steps >= max_steps || visited.count(edge->head))
      throw CycleError("dependency cycle while backtracking from token " + std::to_string(start),
                       edge->head);
    visited.insert(edge->head);
    out.parents.push_back(edge->head);

    auto base = edge->base();
    auto suffix = edge->suffix();
    if ((base == "nmod" || base == "obl" || base == "conj" || base == "advcl") &&
        is_lexical_suffix(suffix)) {
      out.insertions.push_back(Insertion{suffix_words(suffix), std::min(current, edge->head),
                                         std::max(current, edge->head)});
    }
    current = edge->head;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tag assembly
// ---------------------------------------------------------------------------

namespace detail {

struct TagItem {
  std::size_t position = 0;  // sort key: token index the item sits at/before
  int rank = 0;              // 0 = relation word, 1 = inserted "to", 2 = token
  std::string text;
  std::size_t token = 0;  // 0 for inserted words
  bool from_parent = false;
};

inline DependencyGraph restrict_graph(const DependencyGraph& deps,
                                      const std::set<std::size_t>& keep) {
  std::vector<DepEdge> edges;
  for (const auto& e : deps.edges())
    if (keep.count(e.dependent) && (e.head == 0 || keep.count(e.head))) edges.push_back(e);
  return DependencyGraph(std::move(edges));
}

// Token inside the term span whose governing head lies outside it.
inline std::size_t term_head(const DependencyGraph& deps, TokenSpan span) {
  for (std::size_t t = span.first; t <= span.last; ++t) {
    auto e = governing_edge(deps, t);
    if (!e || !span.contains(e->head)) return t;
  }
  return span.last;
}

inline std::string assemble(const ParsedSentence& sentence, const std::set<std::size_t>& simple,
                            const DependencyGraph& deps, const TermMatch& match, TagMode mode,
                            const TagOptions& options) {
  if (mode == TagMode::word_only) return match.term;

  std::vector<std::size_t> term_tokens;
  for (std::size_t t = match.span.first; t <= match.span.last; ++t) term_tokens.push_back(t);

  std::vector<std::size_t> block = term_tokens;
  if (mode != TagMode::dep_only) {
    if (const ConstituencyNode* node = lowest_phrase(*sentence.tree, match.span)) {
      std::vector<std::size_t> words;
      for (std::size_t t = node->span.first; t <= node->span.last; ++t)
        if (simple.count(t)) words.push_back(t);
      bool skip = words.size() == 2 && is_uninformative_lead_pos(sentence.token(words[0]).pos);
      if (!skip) block = std::move(words);
    }
  }
  const std::set<std::size_t> in_block(block.begin(), block.end());

  Backtrack bt;
  if (mode != TagMode::const_only) {
    bt = backtrack_dependencies(deps, term_head(deps, match.span), sentence.size());
    // Heuristic: a trailing link verb reached by backtracking is dropped.
    if (!bt.parents.empty() && is_link_verb(sentence.token(bt.parents.back()).form)) {
      std::size_t dropped = bt.parents.back();
      bt.parents.pop_back();
      std::erase_if(bt.insertions, [&](const Insertion& i) {
        return i.earlier == dropped || i.later == dropped;
      });
    }
  }

  std::vector<TagItem> items;
  for (auto t : block) items.push_back(TagItem{t, 2, sentence.token(t).form, t, false});
  for (auto p : bt.parents)
    if (!in_block.count(p)) items.push_back(TagItem{p, 2, sentence.token(p).form, p, true});
  for (const auto& ins : bt.insertions) {
    bool earlier_in = in_block.count(ins.earlier) != 0;
    bool later_in = in_block.count(ins.later) != 0;
    if (earlier_in && later_in) continue;  // the block already holds the words between them
    std::size_t at = ins.later;
    if (later_in) {
      auto it = std::upper_bound(block.begin(), block.end(), ins.earlier);
      if (it != block.end()) at = *it;
    }
    items.push_back(TagItem{at, 0, ins.word, 0, false});
  }
  std::stable_sort(items.begin(), items.end(), [](const TagItem& a, const TagItem& b) {
    if (a.position != b.position) return a.position < b.position;
    return a.rank < b.rank;
  });

  // An inserted word next to the same word taken from the sentence is redundant.
  std::vector<TagItem> merged;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].token == 0) {
      auto same = [&](const TagItem& o) {
        return text::to_lower(o.text) == text::to_lower(items[i].text);
      };
      if ((!merged.empty() && same(merged.back())) || (i + 1 < items.size() && same(items[i + 1])))
        continue;
    }
    merged.push_back(std::move(items[i]));
  }

  // No tag ends in a link verb (outside the matched term itself).
  while (!merged.empty() && (merged.back().token == 0 ||
                             (!match.span.contains(merged.back().token) &&
                              is_link_verb(merged.back().text))))
    merged.pop_back();

  // Heuristic: "to" before base-form verbs the parser left without one.
  std::vector<std::string> words;
  for (const auto& item : merged) {
    bool wants_to = item.token != 0 && sentence.token(item.token).pos == "VB" &&
                    (!options.to_before_parents_only || item.from_parent);
    if (wants_to && (words.empty() || text::to_lower(words.back()) != "to")) words.emplace_back("to");
    words.push_back(item.text);
  }
  return text::join(words, " ");
}

}  // namespace detail

// Tags for one sentence. The parses required by `mode` must be present:
// dependencies for DEP_ONLY/HYBRID, a constituency tree for CONST_ONLY/HYBRID.
// Throws CycleError when the graph still loops after acl pruning.
inline std::vector<Tag> generate(const ParsedSentence& sentence, const ConceptIndex& index,
                                 TagMode mode, const TagOptions& options = {}) {
  const bool needs_deps = mode == TagMode::dep_only || mode == TagMode::hybrid;
  const bool needs_tree = mode == TagMode::const_only || mode == TagMode::hybrid;
  if (needs_deps && sentence.deps.empty())
    throw std::invalid_argument(std::string(to_string(mode)) + " needs a dependency graph");
  if (needs_tree && !sentence.tree)
    throw std::invalid_argument(std::string(to_string(mode)) + " needs a constituency tree");

  DependencyGraph pruned = needs_deps ? prune_acl_edges(sentence.deps) : DependencyGraph{};

  std::vector<SimpleSentence> simple;
  if (options.simplify && sentence.tree) {
    simple = simplify(sentence);
  } else {
    SimpleSentence all{{}, &sentence};
    for (const auto& t : sentence.tokens) all.tokens.push_back(t.index);
    simple.push_back(std::move(all));
  }

  std::vector<Tag> out;
  std::set<std::string> seen;
  for (const auto& ss : simple) {
    std::set<std::size_t> keep(ss.tokens.begin(), ss.tokens.end());
    std::vector<Token> tokens;
    for (auto i : ss.tokens) tokens.push_back(sentence.token(i));
    DependencyGraph deps = needs_deps ? detail::restrict_graph(pruned, keep) : DependencyGraph{};

    for (const auto& m : match_terms(std::span<const Token>(tokens), index)) {
      std::string text = detail::assemble(sentence, keep, deps, m, mode, options);
      if (text.empty() || !seen.insert(text).second) continue;
      out.push_back(Tag{std::move(text), m.term, "", 0, "", mode});
    }
  }
  return out;
}

struct TaggedDocument {
  std::string doc_id;
  std::vector<AspectSentence> aspect_sentences;
  std::vector<Tag> tags;
  std::vector<std::string> warnings;
};

// Tags the already selected aspect sentences of `doc`. Sentence-level
// failures become warnings; tags are unique by text within the document.
inline TaggedDocument tag_selected(const Document& doc, const std::vector<AspectSentence>& selected,
                                   const ConceptIndex& index, TagMode mode,
                                   const TagOptions& options = {}) {
  TaggedDocument out{doc.id, selected, {}, {}};
  std::set<std::string> seen;
  for (const auto& a : selected) {
    std::vector<Tag> tags;
    try {
      tags = generate(doc.sentences.at(a.sentence_index), index, mode, options);
    } catch (const std::exception& e) {
      out.warnings.push_back(doc.id + " sentence " + std::to_string(a.sentence_index) + ": " +
                             e.what());
      continue;
    }
    for (auto& t : tags) {
      if (!seen.insert(t.text).second) continue;
      t.doc_id = doc.id;
      t.sentence_index = a.sentence_index;
      t.aspect = a.aspect;
      out.tags.push_back(std::move(t));
    }
  }
  return out;
}

inline TaggedDocument tag_document(const Document& doc, const std::vector<AspectModel>& aspects,
                                   std::size_t k, const ConceptIndex& index,
                                   const EmbeddingStore& store, TagMode mode,
                                   const TagOptions& options = {},
                                   SelectionMode selection = SelectionMode::global) {
  return tag_selected(doc, select_aspect_sentences(doc, aspects, k, store, selection), index, mode,
                      options);
}

}  // namespace legaltag
