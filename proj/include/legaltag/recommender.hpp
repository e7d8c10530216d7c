#pragma once

// Similar-judgement recommendation from user-selected tags. A document's score
// is the sum, over selected tags, of the best cosine similarity between that
// tag and any of the document's own tags.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "legaltag/aspects.hpp"
#include "legaltag/embeddings.hpp"
#include "legaltag/error.hpp"
#include "legaltag/parse_model.hpp"
#include "legaltag/tagger.hpp"

namespace legaltag {

inline constexpr int kIndexFormatVersion = 1;

struct IndexedAspectSentence {
  std::size_t sentence_index = 0;
  std::string aspect;
  double score = 0;
  std::string text;

  friend bool operator==(const IndexedAspectSentence&, const IndexedAspectSentence&) = default;
};

struct IndexedDocument {
  std::string id;
  DocumentMetadata metadata;
  std::vector<IndexedAspectSentence> aspect_sentences;
  std::vector<Tag> tags;
  std::vector<Vector> tag_embeddings;  // parallel to tags
  Vector text_embedding;               // whole-document embedding, for the baseline

  friend bool operator==(const IndexedDocument&, const IndexedDocument&) = default;
};

struct CorpusIndex {
  std::size_t dim = 0;
  std::map<std::string, IndexedDocument> documents;

  friend bool operator==(const CorpusIndex&, const CorpusIndex&) = default;
};

struct IndexSource {
  const Document* document = nullptr;
  std::vector<AspectSentence> aspect_sentences;
  std::vector<Tag> tags;
};

// Embeds every tag. Documents without tags, and tags with no in-vocabulary
// word, are kept and reported in `warnings`.
inline CorpusIndex build_index(const std::vector<IndexSource>& sources, const EmbeddingStore& store,
                               std::vector<std::string>* warnings = nullptr) {
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };
  CorpusIndex index;
  index.dim = store.dim();
  for (const auto& src : sources) {
    const Document& doc = *src.document;
    if (index.documents.count(doc.id)) throw std::invalid_argument("duplicate doc id '" + doc.id + "'");
    IndexedDocument d;
    d.id = doc.id;
    d.metadata = doc.metadata;
    for (const auto& a : src.aspect_sentences)
      d.aspect_sentences.push_back(
          {a.sentence_index, a.aspect, a.score, doc.sentences.at(a.sentence_index).text});
    for (const auto& t : src.tags) {
      auto e = embed_phrase(t.text, store);
      if (e.fully_oov()) warn(doc.id + ": tag '" + t.text + "' has no in-vocabulary word");
      d.tags.push_back(t);
      d.tag_embeddings.push_back(std::move(e.vector));
    }
    if (d.tags.empty()) warn(doc.id + ": document has no tags");
    d.text_embedding = doc.sentences.empty() ? Vector(store.dim(), 0.0)
                                             : embed_phrase(doc.full_text(), store).vector;
    index.documents.emplace(d.id, std::move(d));
  }
  return index;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json tag_to_json(const Tag& t) {
  nlohmann::ordered_json j;
  j["text"] = t.text;
  j["matched_term"] = t.matched_term;
  j["doc_id"] = t.doc_id;
  j["sentence_index"] = t.sentence_index;
  j["aspect"] = t.aspect;
  j["mode"] = std::string(to_string(t.mode));
  return j;
}

template <typename Json>
Tag tag_from_json(const Json& j) {
  Tag t;
  t.text = j.at("text").template get<std::string>();
  t.matched_term = j.at("matched_term").template get<std::string>();
  t.doc_id = j.at("doc_id").template get<std::string>();
  t.sentence_index = j.at("sentence_index").template get<std::size_t>();
  t.aspect = j.at("aspect").template get<std::string>();
  auto mode = parse_tag_mode(j.at("mode").template get<std::string>());
  if (!mode) throw LoadError("unknown tag mode '" + j.at("mode").template get<std::string>() + "'");
  t.mode = *mode;
  return t;
}

// JSON layout headed by "format" and "format_version". Saving a loaded index
// reproduces the file byte for byte.
inline void save_index(std::ostream& os, const CorpusIndex& index) {
  nlohmann::ordered_json root;
  root["format"] = "legaltag-index";
  root["format_version"] = kIndexFormatVersion;
  root["dim"] = index.dim;
  auto& docs = root["documents"] = nlohmann::ordered_json::array();
  for (const auto& [id, d] : index.documents) {
    nlohmann::ordered_json jd;
    jd["id"] = d.id;
    jd["metadata"] = {{"title", d.metadata.title}, {"court", d.metadata.court},
                      {"year", d.metadata.year}};
    auto& as = jd["aspect_sentences"] = nlohmann::ordered_json::array();
    for (const auto& a : d.aspect_sentences)
      as.push_back({{"sentence_index", a.sentence_index}, {"aspect", a.aspect},
                    {"score", a.score}, {"text", a.text}});
    auto& tags = jd["tags"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < d.tags.size(); ++i) {
      nlohmann::ordered_json jt = tag_to_json(d.tags[i]);
      jt["embedding"] = d.tag_embeddings[i];
      tags.push_back(std::move(jt));
    }
    jd["text_embedding"] = d.text_embedding;
    docs.push_back(std::move(jd));
  }
  os << root.dump(1) << '\n';
}

inline CorpusIndex load_index(std::istream& is) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("index: ") + e.what());
  }
  try {
    if (root.at("format").get<std::string>() != "legaltag-index")
      throw LoadError("not a legaltag index");
    int version = root.at("format_version").get<int>();
    if (version != kIndexFormatVersion)
      throw LoadError("unsupported index format version " + std::to_string(version));
    CorpusIndex index;
    index.dim = root.at("dim").get<std::size_t>();
    for (const auto& jd : root.at("documents")) {
      IndexedDocument d;
      d.id = jd.at("id").get<std::string>();
      const auto& m = jd.at("metadata");
      d.metadata = {m.at("title").get<std::string>(), m.at("court").get<std::string>(),
                    m.at("year").get<std::string>()};
      for (const auto& a : jd.at("aspect_sentences"))
        d.aspect_sentences.push_back({a.at("sentence_index").get<std::size_t>(),
                                      a.at("aspect").get<std::string>(),
                                      a.at("score").get<double>(), a.at("text").get<std::string>()});
      for (const auto& jt : jd.at("tags")) {
        d.tags.push_back(tag_from_json(jt));
        d.tag_embeddings.push_back(jt.at("embedding").get<Vector>());
        if (d.tag_embeddings.back().size() != index.dim)
          throw LoadError("tag embedding dimension mismatch in '" + d.id + "'");
      }
      d.text_embedding = jd.at("text_embedding").get<Vector>();
      if (!index.documents.emplace(d.id, std::move(d)).second)
        throw LoadError("duplicate document id in index");
    }
    return index;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("index: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Ranking
// ---------------------------------------------------------------------------

struct TagMatchScore {
  std::string selected;
  std::optional<std::string> best_tag;  // absent when nothing scored above 0
  double similarity = 0;

  friend bool operator==(const TagMatchScore&, const TagMatchScore&) = default;
};

struct Recommendation {
  std::string doc_id;
  double score = 0;
  std::vector<TagMatchScore> per_tag_scores;

  friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

struct RecommendOptions {
  std::optional<std::string> exclude;
  std::size_t top_n = 5;
  // Only this generation mode's tags take part; all tags when unset.
  std::optional<TagMode> mode;
};

namespace detail {

// Higher score first, then doc_id ascending.
struct RankBelow {
  bool operator()(const Recommendation& a, const Recommendation& b) const {
    if (std::abs(a.score - b.score) > kScoreTieEpsilon) return a.score < b.score;
    return a.doc_id > b.doc_id;
  }
};

inline std::vector<Recommendation> take_top(std::vector<Recommendation> all, std::size_t top_n) {
  std::priority_queue<Recommendation, std::vector<Recommendation>, RankBelow> heap(
      RankBelow{}, std::move(all));
  std::vector<Recommendation> out;
  while (!heap.empty() && out.size() < top_n) {
    out.push_back(heap.top());
    heap.pop();
  }
  return out;
}

inline void check_query(const std::vector<std::string>& selected, const RecommendOptions& options,
                        const EmbeddingStore& store, std::size_t index_dim) {
  if (selected.empty()) throw std::invalid_argument("no tags selected");
  if (options.top_n == 0) throw std::invalid_argument("top_n must be >= 1");
  if (store.dim() != index_dim)
    throw std::invalid_argument("embedding store dimension does not match the index");
}

}  // namespace detail

inline std::vector<Recommendation> recommend(const std::vector<std::string>& selected,
                                             const CorpusIndex& index, const EmbeddingStore& store,
                                             const RecommendOptions& options = {}) {
  detail::check_query(selected, options, store, index.dim);
  std::vector<Vector> query;
  for (const auto& t : selected) query.push_back(embed_phrase(t, store).vector);

  std::vector<Recommendation> all;
  for (const auto& [id, doc] : index.documents) {
    if (options.exclude && id == *options.exclude) continue;
    Recommendation r{id, 0.0, {}};
    for (std::size_t q = 0; q < selected.size(); ++q) {
      TagMatchScore best{selected[q], std::nullopt, 0.0};
      for (std::size_t i = 0; i < doc.tags.size(); ++i) {
        if (options.mode && doc.tags[i].mode != *options.mode) continue;
        double s = cal_similarity(query[q], doc.tag_embeddings[i]);
        if (s > best.similarity) {
          best.similarity = s;
          best.best_tag = doc.tags[i].text;
        }
      }
      r.score += best.similarity;
      r.per_tag_scores.push_back(std::move(best));
    }
    all.push_back(std::move(r));
  }
  return detail::take_top(std::move(all), options.top_n);
}

// Full-text arm: each document is one embedding of its whole text and a
// selected tag scores its plain cosine against it.
inline std::vector<Recommendation> recommend_fulltext_baseline(
    const std::vector<std::string>& selected, const std::map<std::string, Vector>& doc_vectors,
    const EmbeddingStore& store, const RecommendOptions& options = {}) {
  detail::check_query(selected, options, store, store.dim());
  std::vector<Vector> query;
  for (const auto& t : selected) query.push_back(embed_phrase(t, store).vector);

  std::vector<Recommendation> all;
  for (const auto& [id, vec] : doc_vectors) {
    if (options.exclude && id == *options.exclude) continue;
    Recommendation r{id, 0.0, {}};
    for (std::size_t q = 0; q < selected.size(); ++q) {
      double s = cal_similarity(query[q], vec);
      r.score += s;
      r.per_tag_scores.push_back(TagMatchScore{selected[q], std::nullopt, s});
    }
    all.push_back(std::move(r));
  }
  return detail::take_top(std::move(all), options.top_n);
}

inline std::vector<Recommendation> recommend_fulltext_baseline(
    const std::vector<std::string>& selected, const std::vector<Document>& corpus,
    const EmbeddingStore& store, const RecommendOptions& options = {}) {
  std::map<std::string, Vector> vectors;
  for (const auto& d : corpus)
    vectors[d.id] = d.sentences.empty() ? Vector(store.dim(), 0.0)
                                        : embed_phrase(d.full_text(), store).vector;
  return recommend_fulltext_baseline(selected, vectors, store, options);
}

inline std::vector<Recommendation> recommend_fulltext_baseline(
    const std::vector<std::string>& selected, const CorpusIndex& index, const EmbeddingStore& store,
    const RecommendOptions& options = {}) {
  detail::check_query(selected, options, store, index.dim);
  std::map<std::string, Vector> vectors;
  for (const auto& [id, d] : index.documents) vectors[id] = d.text_embedding;
  return recommend_fulltext_baseline(selected, vectors, store, options);
}

}  // namespace legaltag
