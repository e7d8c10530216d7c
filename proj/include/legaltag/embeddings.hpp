#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "legaltag/error.hpp"
#include "legaltag/text.hpp"

namespace legaltag {

using Vector = std::vector<double>;

class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw std::invalid_argument("embedding dimension must be >= 1");
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return vectors_.size(); }

  // Keeps the first vector seen for a lowercased word.
  bool add(std::string_view word, std::vector<float> v) {
    if (v.size() != dim_) throw std::invalid_argument("embedding has wrong dimension");
    return vectors_.emplace(text::to_lower(word), std::move(v)).second;
  }

  const std::vector<float>* find(const std::string& lowered) const {
    auto it = vectors_.find(lowered);
    return it == vectors_.end() ? nullptr : &it->second;
  }

  // Returns a copy with every vector multiplied by `k`.
  EmbeddingStore scaled(float k) const {
    EmbeddingStore out(dim_);
    for (const auto& [w, v] : vectors_) {
      auto copy = v;
      for (auto& x : copy) x *= k;
      out.vectors_.emplace(w, std::move(copy));
    }
    return out;
  }

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<float>> vectors_;
};

// word2vec text format: optional "count dim" header, then "word v1 .. vdim".
inline EmbeddingStore load_embeddings(std::istream& is) {
  EmbeddingStore store;
  std::size_t dim = 0;
  bool first_content = true;
  std::string line;
  std::size_t line_no = 0;

  auto parse_float = [&](std::string_view s) {
    float v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      throw LoadError("non-numeric embedding value '" + std::string(s) + "'", line_no);
    return v;
  };

  while (std::getline(is, line)) {
    ++line_no;
    auto fields = text::split_ws(line);
    if (fields.empty()) continue;

    if (first_content) {
      first_content = false;
      if (fields.size() == 2) {
        std::size_t count = 0, d = 0;
        auto r1 = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), count);
        auto r2 = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), d);
        bool header = r1.ec == std::errc{} && r1.ptr == fields[0].data() + fields[0].size() &&
                      r2.ec == std::errc{} && r2.ptr == fields[1].data() + fields[1].size();
        if (header) {
          if (d == 0) throw LoadError("header declares dimension 0", line_no);
          dim = d;
          store = EmbeddingStore(dim);
          continue;
        }
      }
    }

    if (fields.size() < 2) throw LoadError("embedding row without values", line_no);
    std::size_t row_dim = fields.size() - 1;
    if (dim == 0) {
      dim = row_dim;
      store = EmbeddingStore(dim);
    } else if (row_dim != dim) {
      throw LoadError("expected " + std::to_string(dim) + " values, found " +
                          std::to_string(row_dim),
                      line_no);
    }
    std::vector<float> v;
    v.reserve(dim);
    for (std::size_t i = 1; i < fields.size(); ++i) v.push_back(parse_float(fields[i]));
    store.add(fields[0], std::move(v));
  }
  if (store.size() == 0) throw LoadError("embedding file has no vectors");
  return store;
}

struct PhraseEmbedding {
  Vector vector;
  std::size_t oov_count = 0;
  std::size_t word_count = 0;

  bool fully_oov() const noexcept { return oov_count == word_count; }
};

// Mean of the in-vocabulary word vectors; the zero vector when every word is
// out of vocabulary.
inline constexpr std::string_view kEdgePunct = ".,;:!?\"'()[]";

inline PhraseEmbedding embed_phrase(std::string_view phrase, const EmbeddingStore& store) {
  auto words = text::split_ws(phrase);
  if (words.empty()) throw std::invalid_argument("cannot embed empty text");
  PhraseEmbedding out{Vector(store.dim(), 0.0), 0, words.size()};
  std::size_t hits = 0;
  for (auto w : words) {
    auto key = text::to_lower(w);
    const auto* v = store.find(key);
    if (!v) {
      // "unstable." -> "unstable"
      auto a = key.find_first_not_of(kEdgePunct);
      auto b = key.find_last_not_of(kEdgePunct);
      if (a != std::string::npos && (a != 0 || b + 1 != key.size()))
        v = store.find(key.substr(a, b - a + 1));
    }
    if (!v) {
      ++out.oov_count;
      continue;
    }
    for (std::size_t i = 0; i < v->size(); ++i) out.vector[i] += (*v)[i];
    ++hits;
  }
  if (hits)
    for (auto& x : out.vector) x /= static_cast<double>(hits);
  return out;
}

// Rankings treat scores this close as equal, so rounding never decides
// between mathematically tied candidates.
inline constexpr double kScoreTieEpsilon = 1e-12;

// Cosine similarity; 0 when either vector has zero norm.
inline double cal_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("cal_similarity: dimension mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace legaltag
