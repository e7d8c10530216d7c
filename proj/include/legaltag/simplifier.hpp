#pragma once

// Sentence simplification over the constituency tree. A sentence is split into
// simple sentences (one subject/verb pair each) by these rules:
//
//   R1  S node with >= 2 S/VP conjuncts and a CC child: one output per
//       conjunct. Material that is not a conjunct, CC or separator (the
//       subject NP, sentence-final punctuation) is shared by every output. A
//       conjunct without its own subject borrows the NP of the nearest
//       preceding S conjunct.
//   R2  VP node with >= 2 VP conjuncts and a CC child: one output per VP; the
//       subject comes from the enclosing S, which shares it with each VP.
//   R3  SBAR whose first child is a subordinator (IN, WHADVP) is detached as
//       its own output, subordinator dropped.
//   R4  a coordination whose conjuncts are all proper nouns (NNP/NNPS) is not
//       a split point ("Johnson and Johnson").
//
// Coordination inside NP/ADJP is never split. Coordinated VPs are split
// wherever they sit, so "for loading and unloading goods" parsed as two VPs
// under PP splits in two.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "legaltag/parse_model.hpp"

namespace legaltag {

struct SimpleSentence {
  std::vector<std::size_t> tokens;  // original 1-based indices, strictly increasing
  const ParsedSentence* source = nullptr;

  std::string text() const {
    std::string out;
    for (auto i : tokens) {
      if (!out.empty()) out += ' ';
      out += source->token(i).form;
    }
    return out;
  }
};

namespace detail {

using TokenList = std::vector<std::size_t>;
using Alternatives = std::vector<TokenList>;

inline constexpr std::size_t kMaxAlternatives = 64;

inline void leaf_indices(const ConstituencyNode& n, TokenList& out) {
  if (n.is_leaf()) {
    out.push_back(n.span.first);
    return;
  }
  for (const auto& c : n.children) leaf_indices(c, out);
}

inline TokenList leaf_indices(const ConstituencyNode& n) {
  TokenList out;
  leaf_indices(n, out);
  return out;
}

inline bool is_separator(std::string_view label) {
  return label == "CC" || label == "," || label == ":";
}

inline bool is_clause_label(std::string_view label) {
  return label == "S" || label == "SINV" || label == "SQ";
}

inline bool proper_name_only(const ConstituencyNode& n) {
  if (n.is_leaf()) return n.label == "NNP" || n.label == "NNPS";
  return std::all_of(n.children.begin(), n.children.end(),
                     [](const ConstituencyNode& c) { return proper_name_only(c); });
}

inline const ConstituencyNode* subject_np(const ConstituencyNode& clause) {
  for (const auto& c : clause.children) {
    if (text::starts_with(c.label, "NP")) return &c;
    if (c.label == "VP") break;
  }
  return nullptr;
}

inline bool is_subordinate_clause(const ConstituencyNode& n) {
  if (n.label != "SBAR" || n.children.size() < 2) return false;
  const auto& first = n.children.front().label;
  if (first != "IN" && first != "WHADVP") return false;
  return std::any_of(n.children.begin() + 1, n.children.end(),
                     [](const ConstituencyNode& c) { return is_clause_label(c.label); });
}

inline TokenList merge(TokenList a, const TokenList& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

// Cartesian product of per-part alternatives; nullopt once it exceeds the cap.
inline std::optional<Alternatives> product(const std::vector<Alternatives>& parts) {
  Alternatives acc{{}};
  for (const auto& p : parts) {
    if (p.empty()) continue;
    if (acc.size() * p.size() > kMaxAlternatives) return std::nullopt;
    Alternatives next;
    for (const auto& a : acc)
      for (const auto& b : p) next.push_back(merge(a, b));
    acc = std::move(next);
  }
  return acc;
}

class Splitter {
 public:
  Alternatives detached;

  Alternatives expand(const ConstituencyNode& n) {
    if (n.is_leaf()) return {{n.span.first}};

    if (is_subordinate_clause(n)) {  // R3
      for (std::size_t i = 1; i < n.children.size(); ++i) {
        if (!is_clause_label(n.children[i].label)) continue;
        for (auto& alt : expand(n.children[i])) detached.push_back(std::move(alt));
      }
      return {{}};
    }

    if (auto coordinated = expand_coordination(n)) return *coordinated;

    std::vector<Alternatives> parts;
    for (const auto& c : n.children) parts.push_back(expand(c));
    if (auto p = product(parts)) return *p;
    return {leaf_indices(n)};
  }

 private:
  std::optional<Alternatives> expand_coordination(const ConstituencyNode& n) {
    const bool at_clause = is_clause_label(n.label);
    if (!at_clause && n.label != "VP") return std::nullopt;

    auto is_conjunct = [&](const ConstituencyNode& c) {
      return c.label == "VP" || (at_clause && is_clause_label(c.label));
    };
    std::vector<std::size_t> conjuncts;
    bool has_cc = false;
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      if (is_conjunct(n.children[i])) conjuncts.push_back(i);
      if (n.children[i].label == "CC") has_cc = true;
    }
    if (conjuncts.size() < 2 || !has_cc) return std::nullopt;
    // R4
    if (std::all_of(conjuncts.begin(), conjuncts.end(),
                    [&](std::size_t i) { return proper_name_only(n.children[i]); }))
      return std::nullopt;

    std::vector<Alternatives> shared;
    bool shared_subject = false;
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      const auto& c = n.children[i];
      if (is_conjunct(c) || is_separator(c.label)) continue;
      if (text::starts_with(c.label, "NP")) shared_subject = true;
      shared.push_back(expand(c));
    }

    Alternatives out;
    const ConstituencyNode* last_subject = nullptr;
    for (auto i : conjuncts) {
      const auto& c = n.children[i];
      const ConstituencyNode* own = is_clause_label(c.label) ? subject_np(c) : nullptr;
      std::vector<Alternatives> parts = shared;
      parts.push_back(expand(c));
      if (!own && !shared_subject && last_subject) parts.push_back({leaf_indices(*last_subject)});
      auto p = product(parts);
      if (!p) return std::nullopt;
      out.insert(out.end(), p->begin(), p->end());
      if (own) last_subject = own;
    }
    return out;
  }
};

inline bool is_boundary_punct(const Token& t) {
  return t.pos == "," || t.pos == ":";
}

}  // namespace detail

// Splits a sentence into simple sentences in original token order. A sentence
// without split points comes back unchanged as the single output.
inline std::vector<SimpleSentence> simplify(const ParsedSentence& sentence) {
  if (!sentence.tree) throw std::invalid_argument("simplify: sentence has no constituency tree");

  detail::Splitter splitter;
  detail::Alternatives outputs = splitter.expand(*sentence.tree);
  std::vector<SimpleSentence> result;
  if (outputs.size() == 1 && splitter.detached.empty()) {
    detail::TokenList all;
    for (const auto& t : sentence.tokens) all.push_back(t.index);
    result.push_back(SimpleSentence{std::move(all), &sentence});
    return result;
  }
  outputs.insert(outputs.end(), splitter.detached.begin(), splitter.detached.end());

  std::set<detail::TokenList> seen;
  std::vector<detail::TokenList> cleaned;
  for (auto& o : outputs) {
    while (!o.empty() && detail::is_boundary_punct(sentence.token(o.front()))) o.erase(o.begin());
    while (!o.empty() && detail::is_boundary_punct(sentence.token(o.back()))) o.pop_back();
    if (o.empty() || !seen.insert(o).second) continue;
    cleaned.push_back(std::move(o));
  }

  if (cleaned.empty()) {
    detail::TokenList all;
    for (const auto& t : sentence.tokens) all.push_back(t.index);
    result.push_back(SimpleSentence{std::move(all), &sentence});
    return result;
  }
  std::sort(cleaned.begin(), cleaned.end());
  for (auto& c : cleaned) result.push_back(SimpleSentence{std::move(c), &sentence});
  return result;
}

// Number of nsubj / nsubj:pass edges with both ends inside `tokens`.
inline std::size_t count_subject_verb_pairs(const ParsedSentence& sentence,
                                            const std::vector<std::size_t>& tokens) {
  std::set<std::size_t> in(tokens.begin(), tokens.end());
  std::size_t count = 0;
  for (const auto& e : sentence.deps.edges())
    if (e.base() == "nsubj" && in.count(e.dependent) && in.count(e.head)) ++count;
  return count;
}

inline std::size_t count_subject_verb_pairs(const ParsedSentence& sentence) {
  std::vector<std::size_t> all;
  for (const auto& t : sentence.tokens) all.push_back(t.index);
  return count_subject_verb_pairs(sentence, all);
}

}  // namespace legaltag
