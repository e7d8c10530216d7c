#pragma once

// Aspect-sentence selection: score each sentence against pre-supplied aspect
// topic-word lists and keep the best few as tagging seeds.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "legaltag/embeddings.hpp"
#include "legaltag/error.hpp"
#include "legaltag/parse_model.hpp"

namespace legaltag {

using WeightedWords = std::vector<std::pair<std::string, double>>;

struct Aspect {
  std::string name;
  std::vector<WeightedWords> topics;
};

struct AspectSentence {
  std::size_t sentence_index = 0;  // 0-based position in the document
  std::string aspect;
  double score = 0;

  friend bool operator==(const AspectSentence&, const AspectSentence&) = default;
};

enum class SelectionMode { global, per_aspect };

inline void validate_aspect(const Aspect& a) {
  if (a.name.empty()) throw std::invalid_argument("aspect without a name");
  if (a.topics.empty()) throw std::invalid_argument("aspect '" + a.name + "' has no topics");
  for (const auto& t : a.topics) {
    if (t.empty()) throw std::invalid_argument("aspect '" + a.name + "' has an empty topic");
    for (const auto& [w, weight] : t)
      if (!(weight > 0))
        throw std::invalid_argument("aspect '" + a.name + "': weight of '" + w + "' must be > 0");
  }
}

// {"aspects": [{"name": "injury", "topics": [{"fracture": 1.0, ...}, ...]}, ...]}
inline std::vector<Aspect> load_aspects(std::istream& is) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("aspect config: ") + e.what());
  }
  std::vector<Aspect> out;
  try {
    for (const auto& a : doc.at("aspects")) {
      Aspect aspect{a.at("name").get<std::string>(), {}};
      for (const auto& topic : a.at("topics")) {
        WeightedWords words;
        for (const auto& [w, weight] : topic.items()) words.emplace_back(w, weight.get<double>());
        aspect.topics.push_back(std::move(words));
      }
      validate_aspect(aspect);
      out.push_back(std::move(aspect));
    }
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("aspect config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw LoadError(std::string("aspect config: ") + e.what());
  }
  if (out.empty()) throw LoadError("aspect config lists no aspects");
  return out;
}

// Weighted mean of the in-vocabulary topic word vectors.
inline Vector topic_vector(const WeightedWords& topic, const EmbeddingStore& store) {
  Vector v(store.dim(), 0.0);
  double total = 0;
  for (const auto& [word, weight] : topic) {
    const auto* wv = store.find(text::to_lower(word));
    if (!wv) continue;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += weight * (*wv)[i];
    total += weight;
  }
  if (total > 0)
    for (auto& x : v) x /= total;
  return v;
}

// An aspect with its topic vectors resolved against one store.
struct AspectModel {
  std::string name;
  std::vector<Vector> topic_vectors;

  AspectModel(const Aspect& aspect, const EmbeddingStore& store) : name(aspect.name) {
    validate_aspect(aspect);
    for (const auto& t : aspect.topics) topic_vectors.push_back(topic_vector(t, store));
  }

  double score(const Vector& sentence_vector) const {
    double best = 0;
    bool first = true;
    for (const auto& tv : topic_vectors) {
      double s = cal_similarity(sentence_vector, tv);
      if (first || s > best) best = s;
      first = false;
    }
    return best;
  }
};

inline std::vector<AspectModel> build_aspect_models(const std::vector<Aspect>& aspects,
                                                    const EmbeddingStore& store) {
  std::vector<AspectModel> out;
  for (const auto& a : aspects) out.emplace_back(a, store);
  return out;
}

// Max over the aspect's topics of cosine(sentence embedding, topic vector).
inline double score_sentence(const ParsedSentence& sentence, const Aspect& aspect,
                             const EmbeddingStore& store) {
  return AspectModel(aspect, store).score(embed_phrase(sentence.text, store).vector);
}

// global: the k best (sentence, aspect) pairs document-wide, one entry per
// sentence (its best aspect). per_aspect: the k best sentences of each
// aspect, in aspect order. Ties go to the lower sentence index, then to the
// earlier aspect.
inline std::vector<AspectSentence> select_aspect_sentences(const Document& doc,
                                                           const std::vector<AspectModel>& aspects,
                                                           std::size_t k,
                                                           const EmbeddingStore& store,
                                                           SelectionMode mode = SelectionMode::global) {
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  if (aspects.empty()) throw std::invalid_argument("no aspects configured");

  // scores[s][a]
  std::vector<std::vector<double>> scores;
  scores.reserve(doc.sentences.size());
  for (const auto& s : doc.sentences) {
    auto v = embed_phrase(s.text, store).vector;
    std::vector<double> row;
    for (const auto& a : aspects) row.push_back(a.score(v));
    scores.push_back(std::move(row));
  }

  auto by_score = [](const AspectSentence& x, const AspectSentence& y) {
    if (std::abs(x.score - y.score) > kScoreTieEpsilon) return x.score > y.score;
    return x.sentence_index < y.sentence_index;
  };

  std::vector<AspectSentence> out;
  if (mode == SelectionMode::global) {
    std::vector<AspectSentence> all;
    for (std::size_t s = 0; s < scores.size(); ++s) {
      std::size_t best = 0;
      for (std::size_t a = 1; a < aspects.size(); ++a)
        if (scores[s][a] > scores[s][best] + kScoreTieEpsilon) best = a;
      all.push_back(AspectSentence{s, aspects[best].name, scores[s][best]});
    }
    std::stable_sort(all.begin(), all.end(), by_score);
    all.resize(std::min(k, all.size()));
    return all;
  }

  for (std::size_t a = 0; a < aspects.size(); ++a) {
    std::vector<AspectSentence> col;
    for (std::size_t s = 0; s < scores.size(); ++s)
      col.push_back(AspectSentence{s, aspects[a].name, scores[s][a]});
    std::stable_sort(col.begin(), col.end(), by_score);
    col.resize(std::min(k, col.size()));
    out.insert(out.end(), col.begin(), col.end());
  }
  return out;
}

inline std::vector<AspectSentence> select_aspect_sentences(const Document& doc,
                                                           const std::vector<Aspect>& aspects,
                                                           std::size_t k,
                                                           const EmbeddingStore& store,
                                                           SelectionMode mode = SelectionMode::global) {
  return select_aspect_sentences(doc, build_aspect_models(aspects, store), k, store, mode);
}

}  // namespace legaltag
