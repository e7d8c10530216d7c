#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "legaltag/legaltag.hpp"

namespace testing_support {

namespace fs = std::filesystem;
namespace lt = legaltag;

inline fs::path fixture(const std::string& rel) { return fs::path(LEGALTAG_FIXTURES) / rel; }

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// First sentence of data/fixtures/sentences/<name>.conllu.
inline lt::ParsedSentence sentence(const std::string& name) {
  std::ifstream in(fixture("sentences/" + name + ".conllu"));
  auto all = lt::read_conllu(in);
  return all.at(0);
}

// Tokens taken from the tree leaves (form = word, pos = preterminal label).
inline lt::ParsedSentence from_tree(const std::string& bracketed, std::vector<lt::DepEdge> edges = {}) {
  lt::ParsedSentence s;
  auto tree = lt::read_bracketed(bracketed);
  std::vector<const lt::ConstituencyNode*> leaves;
  lt::collect_leaves(tree, leaves);
  for (const auto* l : leaves) s.tokens.push_back(lt::Token{s.tokens.size() + 1, l->word, l->label});
  s.text = lt::join_forms(s.tokens);
  s.deps = lt::DependencyGraph(std::move(edges));
  lt::attach_tree(s, std::move(tree));
  return s;
}

inline lt::ConceptIndex fixture_taxonomy() {
  std::ifstream in(fixture("taxonomy.tsv"));
  return lt::load_concept_tree(in);
}

inline lt::EmbeddingStore fixture_store() {
  std::ifstream in(fixture("embeddings.txt"));
  return lt::load_embeddings(in);
}

// Root "law" with every term as a direct child.
inline lt::ConceptIndex flat_taxonomy(const std::vector<std::string>& terms) {
  std::ostringstream os;
  os << "1\t\tlaw\n";
  for (std::size_t i = 0; i < terms.size(); ++i) os << i + 2 << "\t1\t" << terms[i] << '\n';
  std::istringstream in(os.str());
  return lt::load_concept_tree(in);
}

inline std::vector<std::string> texts(const std::vector<lt::Tag>& tags) {
  std::vector<std::string> out;
  for (const auto& t : tags) out.push_back(t.text);
  return out;
}

inline lt::EmbeddingStore make_store(
    std::size_t dim, const std::vector<std::pair<std::string, std::vector<float>>>& rows) {
  lt::EmbeddingStore s(dim);
  for (const auto& [w, v] : rows) s.add(w, v);
  return s;
}

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = fs::temp_directory_path() / ("legaltag-test-" + std::to_string(rng()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

// A config pointing at the fixture resources, writing outputs into `dir`.
inline fs::path write_config(const fs::path& dir, const std::string& mode = "all",
                             const fs::path& corpus = fixture("corpus")) {
  std::ofstream out(dir / "config.json");
  out << "{\"taxonomy\": \"" << fixture("taxonomy.tsv").string() << "\",\n"
      << " \"embeddings\": \"" << fixture("embeddings.txt").string() << "\",\n"
      << " \"aspects\": \"" << fixture("aspects.json").string() << "\",\n"
      << " \"corpus\": \"" << corpus.string() << "\",\n"
      << " \"k\": 3, \"mode\": \"" << mode << "\", \"top_n\": 5}\n";
  return dir / "config.json";
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::vector<double> random_vector(Rng& rng, std::size_t dim, double lo = -1, double hi = 1) {
  std::vector<double> v(dim);
  for (auto& x : v) x = uniform_real(rng, lo, hi);
  return v;
}

// Random bracketed tree; `leaves` receives the words in order.
inline void random_tree(Rng& rng, std::size_t depth, std::ostringstream& os,
                        std::vector<std::string>& leaves) {
  static const char* phrase[] = {"S", "NP", "VP", "PP", "ADJP", "SBAR", "FRAG"};
  static const char* pos[] = {"DT", "NN", "VB", "IN", "JJ", "PRP$", "CD", "NNP", "CC"};
  if (depth == 0 || uniform(rng, 0, 3) == 0) {
    std::string w = "w" + std::to_string(leaves.size() + 1);
    leaves.push_back(w);
    os << '(' << pos[uniform(rng, 0, 8)] << ' ' << w << ')';
    return;
  }
  os << '(' << phrase[uniform(rng, 0, 6)];
  std::size_t kids = uniform(rng, 1, 4);
  for (std::size_t i = 0; i < kids; ++i) {
    os << ' ';
    random_tree(rng, depth - 1, os, leaves);
  }
  os << ')';
}

inline std::string random_tree(Rng& rng, std::vector<std::string>& leaves) {
  std::ostringstream os;
  os << "(ROOT ";
  random_tree(rng, uniform(rng, 1, 6), os, leaves);
  os << ')';
  return os.str();
}

// Balanced synthetic taxonomy with `n` nodes: "term<i>" plus a few two-word
// terms "term<i> x".
inline std::string synthetic_taxonomy(std::size_t n, std::size_t fanout = 8) {
  std::ostringstream os;
  os << "# synthetic\n";
  for (std::size_t i = 0; i < n; ++i) {
    os << i << '\t';
    if (i) os << (i - 1) / fanout;
    os << "\tterm" << i;
    if (i % 10 == 9) os << " x";
    os << '\n';
  }
  return os.str();
}

}  // namespace testing_support
