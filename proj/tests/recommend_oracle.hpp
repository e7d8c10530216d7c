#pragma once

// Brute-force ranking and random corpora for checking the recommender.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "support.hpp"

namespace testing_support {

struct RandomCorpus {
  lt::CorpusIndex index;
  lt::EmbeddingStore store;
  std::vector<std::string> selected;  // single in-vocabulary words
};

// Up to `max_docs` documents with up to `max_tags` tags each, dimension up to
// `max_dim`. Tag vectors are written straight into the index.
inline RandomCorpus random_corpus(Rng& rng, std::size_t max_docs = 20, std::size_t max_tags = 10,
                                  std::size_t max_dim = 8) {
  RandomCorpus c;
  std::size_t dim = uniform(rng, 1, max_dim);
  c.store = lt::EmbeddingStore(dim);
  std::size_t vocab = uniform(rng, 1, 6);
  for (std::size_t w = 0; w < vocab; ++w) {
    std::vector<float> v(dim);
    for (auto& x : v) x = static_cast<float>(uniform_real(rng, -1, 1));
    c.store.add("q" + std::to_string(w), v);
  }
  for (std::size_t n = uniform(rng, 1, 5); n > 0; --n)
    c.selected.push_back("q" + std::to_string(uniform(rng, 0, vocab - 1)));

  c.index.dim = dim;
  for (std::size_t d = 0, docs = uniform(rng, 1, max_docs); d < docs; ++d) {
    lt::IndexedDocument doc;
    doc.id = "doc" + std::to_string(uniform(rng, 0, 999)) + "_" + std::to_string(d);
    for (std::size_t t = 0, tags = uniform(rng, 0, max_tags); t < tags; ++t) {
      lt::Tag tag;
      tag.text = "t" + std::to_string(t);
      tag.doc_id = doc.id;
      tag.mode = lt::kAllTagModes[uniform(rng, 0, 3)];
      doc.tags.push_back(tag);
      // sometimes a zero vector, sometimes an exact copy of a query word
      lt::Vector v(dim, 0.0);
      switch (uniform(rng, 0, 5)) {
        case 0:
          break;
        case 1: {
          const auto* q = c.store.find(c.selected[uniform(rng, 0, c.selected.size() - 1)]);
          v.assign(q->begin(), q->end());
          break;
        }
        default:
          v = random_vector(rng, dim);
      }
      doc.tag_embeddings.push_back(v);
    }
    doc.text_embedding = random_vector(rng, dim);
    c.index.documents.emplace(doc.id, std::move(doc));
  }
  return c;
}

inline double oracle_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  // rounding can step just past +-1 (dim 1, identical vectors)
  return std::max(-1.0, std::min(1.0, dot / std::sqrt(na * nb)));
}

struct OracleRank {
  std::string doc_id;
  double score;
};

// Triple loop: documents, selected tags, document tags. Each selected tag
// contributes its best similarity, starting from 0. Full ranking, best first.
inline std::vector<OracleRank> oracle_recommend(const RandomCorpus& c, const std::string* exclude = nullptr,
                                                const lt::TagMode* mode = nullptr) {
  std::vector<OracleRank> all;
  for (const auto& [id, doc] : c.index.documents) {
    if (exclude && id == *exclude) continue;
    double score = 0;
    for (const auto& s : c.selected) {
      const auto* qf = c.store.find(s);
      std::vector<double> q(qf->begin(), qf->end());
      double each = 0;
      for (std::size_t i = 0; i < doc.tags.size(); ++i) {
        if (mode && doc.tags[i].mode != *mode) continue;
        each = std::max(each, oracle_cosine(q, doc.tag_embeddings[i]));
      }
      score += each;
    }
    all.push_back({id, score});
  }
  // selection: the best remaining score, and among scores within 1e-12 of it
  // the smallest doc_id
  std::vector<OracleRank> ranked;
  while (!all.empty()) {
    double best = all[0].score;
    for (const auto& r : all) best = std::max(best, r.score);
    std::size_t pick = all.size();
    for (std::size_t i = 0; i < all.size(); ++i)
      if (best - all[i].score <= 1e-12 && (pick == all.size() || all[i].doc_id < all[pick].doc_id)) pick = i;
    ranked.push_back(all[pick]);
    all.erase(all.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return ranked;
}

// `got` must be the first `top_n` of `want` (the full oracle ranking): same
// documents in the same order, scores within `tol`.
inline bool same_ranking(const std::vector<lt::Recommendation>& got, const std::vector<OracleRank>& want,
                         std::size_t top_n, double tol, std::string* why = nullptr) {
  auto fail = [&](std::string m) {
    if (why) *why = std::move(m);
    return false;
  };
  std::size_t n = std::min(top_n, want.size());
  if (got.size() != n) return fail("size " + std::to_string(got.size()) + " vs " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (got[i].doc_id != want[i].doc_id)
      return fail("rank " + std::to_string(i) + " " + got[i].doc_id + " vs " + want[i].doc_id);
    if (std::abs(got[i].score - want[i].score) > tol)
      return fail("rank " + std::to_string(i) + " score " + std::to_string(got[i].score) + " vs " +
                  std::to_string(want[i].score));
  }
  return true;
}

}  // namespace testing_support
