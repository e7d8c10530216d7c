// One PASS/FAIL line per acceptance criterion. Exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "legaltag/service.hpp"
#include "recommend_oracle.hpp"
#include "support.hpp"

using namespace legaltag;
namespace ts = testing_support;

namespace {

// Empty when the check holds, otherwise the first thing that went wrong.
using Check = std::function<std::string()>;

struct Criterion {
  std::string name;
  double seconds_limit;  // 0 = none
  Check check;
};

std::string quote(const std::vector<std::string>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", \"" : "\"") + v[i] + "\"";
  return out + "]";
}

std::string expect_tags(const ParsedSentence& s, const ConceptIndex& idx, TagMode mode,
                        const std::vector<std::string>& want) {
  auto got = ts::texts(generate(s, idx, mode));
  if (got == want) return "";
  return std::string(to_string(mode)) + " gave " + quote(got) + ", want " + quote(want);
}

// ---------------------------------------------------------------------------

std::string worked_example() {
  auto s = ts::sentence("worked_example");
  auto idx = ts::fixture_taxonomy();
  for (auto [mode, want] : std::vector<std::pair<TagMode, std::string>>{
           {TagMode::hybrid, "His mental condition bad and unstable"},
           {TagMode::const_only, "His mental condition"},
           {TagMode::word_only, "condition"}})
    if (auto e = expect_tags(s, idx, mode, {want}); !e.empty()) return e;
  return "";
}

bool has_word_subsequence(const std::string& text, const std::vector<std::string>& seq) {
  std::size_t k = 0;
  for (auto w : text::split_ws(text))
    if (k < seq.size() && w == seq[k]) ++k;
  return k == seq.size();
}

std::string preposition_chain() {
  auto s = ts::sentence("pelvis");
  auto idx = ts::fixture_taxonomy();
  const std::vector<std::string> chain{"fracture", "of", "rami", "of", "pelvis"};
  for (auto mode : {TagMode::dep_only, TagMode::hybrid}) {
    auto tags = ts::texts(generate(s, idx, mode));
    bool found = std::any_of(tags.begin(), tags.end(),
                             [&](const std::string& t) { return has_word_subsequence(t, chain); });
    if (!found) return std::string(to_string(mode)) + " gave " + quote(tags);
  }
  return expect_tags(s, ts::flat_taxonomy({"fracture"}), TagMode::word_only, {"fracture"});
}

std::string heuristics() {
  auto idx = ts::fixture_taxonomy();
  struct Case {
    const char* fixture;
    TagMode mode;
    std::vector<std::string> want;
  };
  const std::vector<Case> cases{
      {"link_verb", TagMode::hybrid, {"His mental injury"}},
      {"link_verb", TagMode::dep_only, {"injury"}},
      {"fracture_healed", TagMode::hybrid, {"fracture healed"}},
      {"fracture_healed", TagMode::const_only, {"fracture"}},
      {"to_appeal", TagMode::dep_only, {"to appeal"}},
      {"to_appeal", TagMode::hybrid, {"to appeal the decision"}},
      {"relative_clause", TagMode::hybrid, {"defendant breached", "duty"}},
  };
  for (const auto& c : cases)
    if (auto e = expect_tags(ts::sentence(c.fixture), idx, c.mode, c.want); !e.empty())
      return std::string(c.fixture) + ": " + e;

  auto rc = ts::sentence("relative_clause");
  try {
    check_acyclic(rc.deps);
    return "relative_clause fixture has no cycle before pruning";
  } catch (const CycleError&) {
  }
  try {
    check_acyclic(prune_acl_edges(rc.deps));
  } catch (const CycleError&) {
    return "cycle left after acl pruning";
  }
  return "";
}

std::string recommender_oracle() {
  ts::Rng rng(2024);
  for (int round = 0; round < 200; ++round) {
    auto c = ts::random_corpus(rng, 20, 10, 8);
    RecommendOptions o;
    o.top_n = ts::uniform(rng, 1, 25);
    auto got = recommend(c.selected, c.index, c.store, o);
    auto want = ts::oracle_recommend(c);
    std::string why;
    if (!ts::same_ranking(got, want, o.top_n, 1e-9, &why)) return "corpus " + std::to_string(round) + ": " + why;
  }
  return "";
}

std::string embedding_math() {
  ts::Rng rng(99);
  for (int i = 0; i < 10000; ++i) {
    std::size_t dim = ts::uniform(rng, 1, 16);
    auto a = ts::random_vector(rng, dim, -10, 10), b = ts::random_vector(rng, dim, -10, 10);
    double ab = cal_similarity(a, b), ba = cal_similarity(b, a);
    if (std::abs(ab - ba) > 1e-12) return "asymmetric at pair " + std::to_string(i);
    if (std::abs(ab) > 1 + 1e-12) return "|sim| > 1 at pair " + std::to_string(i);
    double k = ts::uniform_real(rng, 0.01, 100);
    auto ka = a;
    for (auto& x : ka) x *= k;
    if (std::abs(cal_similarity(ka, b) - ab) > 1e-9) return "not scale invariant at pair " + std::to_string(i);
  }
  return "";
}

// 2-dim fixtures: brute force over every (sentence, aspect, topic).
std::string aspect_selection() {
  const std::map<std::string, std::pair<double, double>> plane{
      {"a", {1, 0}}, {"b", {0, 1}}, {"c", {1, 1}}, {"d", {2, -1}}, {"e", {-1, 3}}};
  EmbeddingStore store(2);
  for (const auto& [w, v] : plane) store.add(w, {static_cast<float>(v.first), static_cast<float>(v.second)});

  const std::vector<Aspect> aspects{{"east", {{{"a", 1.0}}, {{"d", 2.0}, {"c", 1.0}}}},
                                    {"north", {{{"b", 1.0}, {"e", 0.5}}}},
                                    {"diagonal", {{{"c", 1.0}}}}};
  const std::vector<std::vector<std::string>> docs{
      {"a", "b", "c", "d e", "a a b", "zzz", "e e c", "d"},
      {"b", "b", "a", "c"},
      {"a b", "e", "d d a", "c b", "a c e"},
  };

  auto oracle = [&](const std::vector<std::string>& sentences, std::size_t k) {
    auto cos = [](double ax, double ay, double bx, double by) {
      double na = std::hypot(ax, ay), nb = std::hypot(bx, by);
      return na == 0 || nb == 0 ? 0.0 : (ax * bx + ay * by) / (na * nb);
    };
    std::vector<AspectSentence> all;
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      double x = 0, y = 0, n = 0;
      for (auto w : text::split_ws(sentences[s]))
        if (auto it = plane.find(std::string(w)); it != plane.end()) x += it->second.first, y += it->second.second, ++n;
      if (n) x /= n, y /= n;
      AspectSentence best{s, "", -9};
      for (const auto& a : aspects) {
        double score = -9;
        for (const auto& topic : a.topics) {
          double tx = 0, ty = 0, tw = 0;
          for (const auto& [w, weight] : topic)
            tx += weight * plane.at(w).first, ty += weight * plane.at(w).second, tw += weight;
          score = std::max(score, cos(x, y, tx / tw, ty / tw));
        }
        if (score > best.score + 1e-12) best = {s, a.name, score};
      }
      all.push_back(best);
    }
    // selection by score, lower index on ties
    std::vector<AspectSentence> out;
    while (out.size() < k && !all.empty()) {
      std::size_t pick = 0;
      for (std::size_t i = 1; i < all.size(); ++i)
        if (all[i].score > all[pick].score + 1e-12) pick = i;
      out.push_back(all[pick]);
      all.erase(all.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return out;
  };

  auto indices = [](const std::vector<AspectSentence>& v) {
    std::vector<std::size_t> out;
    for (const auto& a : v) out.push_back(a.sentence_index);
    return out;
  };

  for (std::size_t d = 0; d < docs.size(); ++d) {
    Document doc;
    doc.id = "doc" + std::to_string(d);
    for (const auto& text : docs[d]) {
      ParsedSentence s;
      s.text = text;
      doc.sentences.push_back(s);
    }
    for (std::size_t k = 1; k <= docs[d].size() + 1; ++k) {
      auto got = select_aspect_sentences(doc, aspects, k, store);
      auto want = oracle(docs[d], k);
      if (indices(got) != indices(want))
        return "doc " + std::to_string(d) + " k=" + std::to_string(k) + ": order differs from brute force";
      for (std::size_t i = 0; i < got.size(); ++i)
        if (got[i].aspect != want[i].aspect || std::abs(got[i].score - want[i].score) > 1e-12)
          return "doc " + std::to_string(d) + " k=" + std::to_string(k) + ": aspect or score differs";
      for (float scale : {0.25f, 3.0f, 7.5f, 1000.0f}) {
        auto scaled = store.scaled(scale);
        auto again = select_aspect_sentences(doc, aspects, k, scaled);
        if (indices(again) != indices(got))
          return "rescaling by " + std::to_string(scale) + " changed doc " + std::to_string(d);
        for (std::size_t i = 0; i < got.size(); ++i)
          if (again[i].aspect != got[i].aspect) return "rescaling changed an aspect";
      }
    }
  }
  return "";
}

std::string simplifier() {
  auto coordinated = ts::sentence("coordinated");
  auto parts = simplify(coordinated);
  if (parts.size() != 2) return "coordinated fixture gave " + std::to_string(parts.size()) + " outputs";
  for (const auto& p : parts)
    if (count_subject_verb_pairs(coordinated, p.tokens) > 1) return "output \"" + p.text() + "\" has 2 subjects";

  auto johnson = ts::sentence("johnson");
  if (simplify(johnson).size() != 1) return "proper-name coordination was split";

  auto simple = ts::sentence("he_fell");
  auto same = simplify(simple);
  std::vector<std::size_t> all;
  for (const auto& t : simple.tokens) all.push_back(t.index);
  if (same.size() != 1 || same[0].tokens != all) return "simple sentence changed";
  return "";
}

std::string format_robustness() {
  for (const auto& name : {"hkca_2018_0042", "hkcfi_2019_0101", "hkdc_2020_0317"}) {
    auto doc = load_document(ts::fixture(std::string("corpus/") + name + ".conllu"));
    std::ostringstream os;
    for (const auto& s : doc.sentences) write_conllu(os, s);
    if (read_conllu(os.str()) != doc.sentences) return std::string("round trip differs for ") + name;
  }

  ts::Rng rng(1000);
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::string> leaves;
    auto src = ts::random_tree(rng, leaves);
    auto t = read_bracketed(src);
    std::size_t next = 1;
    std::function<bool(const ConstituencyNode&)> ok = [&](const ConstituencyNode& n) {
      if (n.is_leaf()) return n.span.first == next && n.span.last == next++;
      for (const auto& c : n.children)
        if (!ok(c)) return false;
      return n.span.first == n.children.front().span.first && n.span.last == n.children.back().span.last;
    };
    if (!ok(t) || next != leaves.size() + 1) return "span invariant broken for " + src;
    if (read_bracketed(to_bracketed(t)) != t) return "bracketed round trip broken for " + src;
    auto cut = src.substr(0, ts::uniform(rng, 0, src.size() - 1));
    try {
      read_bracketed(cut);
      return "truncated tree accepted: " + cut;
    } catch (const ParseError&) {
    }
  }

  const std::vector<std::string> bad_conllu{
      "1\tHe\t_\t_\tPRP\t_\t0\troot\t_\n",
      "1\tHe\t_\t_\tPRP\t_\tx\troot\t_\t_\n",
      "1\tHe\t_\t_\tPRP\t_\t5\tdep\t_\t_\n",
      "1\tHe\t_\t_\tPRP\t_\t1\tdep\t_\t_\n",
      "1\t\t_\t_\tPRP\t_\t0\troot\t_\t_\n",
      "2\tHe\t_\t_\tPRP\t_\t0\troot\t_\t_\n",
      "1\tHe\t_\t_\tPRP\t_\t0\troot\t0:root|junk\t_\n",
      "# constituency = (S (NN a) (NN b))\n1\tHe\t_\t_\tPRP\t_\t0\troot\t_\t_\n",
  };
  for (const auto& text : bad_conllu) {
    try {
      read_conllu(text);
      return "malformed CoNLL-U accepted: " + text;
    } catch (const ParseError&) {
    }
  }
  for (const std::string text : {"", "((broken", "(NP)", "(NN a))", "(NN a b)", "NN a", "(S (NP (NN a)) (VP (VB b)"}) {
    try {
      read_bracketed(text);
      return "malformed tree accepted: " + text;
    } catch (const ParseError&) {
    }
  }
  for (const std::string text : {"", "1\t\tr\n2\t9\ta\n", "1\t\tr\n2\t\ts\n", "1\t\tr\n2\t3\ta\n3\t2\tb\n"}) {
    std::istringstream in(text);
    try {
      load_concept_tree(in);
      return "malformed taxonomy accepted";
    } catch (const LoadError&) {
    }
  }
  std::istringstream bad_vectors("2 3\nword 1 2\n");
  try {
    load_embeddings(bad_vectors);
    return "malformed embeddings accepted";
  } catch (const LoadError&) {
  }
  std::istringstream bad_index("{\"format\": \"legaltag-index\", \"format_version\": 99}");
  try {
    load_index(bad_index);
    return "wrong index version accepted";
  } catch (const LoadError&) {
  }
  return "";
}

struct PipelineOutputs {
  std::string tags, index, rankings;
};

PipelineOutputs full_run(const ts::fs::path& dir) {
  auto c = load_config(ts::write_config(dir));
  auto r = load_resources(c);
  auto corpus = load_corpus(c.corpus);
  auto run = run_tagging(corpus.documents, r, c);
  std::ostringstream tags, index, rankings;
  write_tags(tags, run.tags);
  auto built = build_corpus_index(corpus.documents, run.tags, r, c);
  save_index(index, built);
  for (const auto& [id, d] : built.documents) {
    std::vector<std::string> selected;
    for (const auto& t : d.tags)
      if (t.mode == TagMode::hybrid && selected.size() < 2) selected.push_back(t.text);
    for (bool baseline : {false, true}) {
      RecommendRequest req{id, selected, c.top_n, baseline, TagMode::hybrid};
      rankings << ranking_json(req, run_recommendation(built, r.store, req)).dump() << '\n';
    }
  }
  return {tags.str(), index.str(), rankings.str()};
}

std::string pipeline_determinism() {
  ts::TempDir a, b;
  auto first = full_run(a.path());
  auto second = full_run(b.path());
  if (first.tags.empty() || first.index.empty() || first.rankings.empty()) return "empty output";
  if (first.tags != second.tags) return "tag files differ";
  if (first.index != second.index) return "indexes differ";
  if (first.rankings != second.rankings) return "rankings differ";
  return "";
}

// ---------------------------------------------------------------------------
// Scale: 500 documents x 40 sentences, 13,000-term taxonomy
// ---------------------------------------------------------------------------

std::string term(ts::Rng& rng) {
  std::size_t i;
  do i = ts::uniform(rng, 0, 12999);
  while (i % 10 == 9);  // single-word terms only
  return "term" + std::to_string(i);
}

ParsedSentence synthetic_sentence(ts::Rng& rng, std::size_t n) {
  if (n % 2 == 0) {
    auto a = term(rng), b = term(rng), c = term(rng), d = term(rng);
    return ts::from_tree("(ROOT (S (NP (NP (DT The) (NN " + a + ")) (PP (IN of) (NP (DT the) (NN " + b +
                             ")))) (VP (VBD caused) (NP (NP (DT the) (NN " + c + ")) (CC and) (NP (NN " + d +
                             ")))) (. .)))",
                         {{6, 2, "nsubj"}, {2, 1, "det"}, {2, 5, "nmod:of"}, {5, 3, "case"}, {5, 4, "det"},
                          {0, 6, "root"}, {6, 8, "obj"}, {8, 7, "det"}, {8, 10, "conj:and"}, {6, 10, "obj"},
                          {10, 9, "cc"}, {6, 11, "punct"}});
  }
  auto a = term(rng), b = term(rng);
  return ts::from_tree("(ROOT (S (NP (DT The) (NN " + a + ")) (VP (VBD was) (ADJP (JJ " + b + "))) (. .)))",
                       {{2, 1, "det"}, {4, 2, "nsubj"}, {4, 3, "cop"}, {0, 4, "root"}, {4, 5, "punct"}});
}

std::string scale_smoke(double* seconds) {
  ts::TempDir dir;
  ts::Rng rng(500);
  std::ofstream(dir / "taxonomy.tsv") << ts::synthetic_taxonomy(13000);
  {
    std::ofstream em(dir / "embeddings.txt");
    const std::size_t dim = 50;
    em << 13000 + 6 << ' ' << dim << '\n';
    std::vector<std::string> words{"the", "of", "caused", "and", "was", "x"};
    for (std::size_t i = 0; i < 13000; ++i) words.push_back("term" + std::to_string(i));
    for (const auto& w : words) {
      em << w;
      for (std::size_t k = 0; k < dim; ++k) em << ' ' << std::setprecision(5) << ts::uniform_real(rng, -1, 1);
      em << '\n';
    }
  }
  {
    std::ofstream as(dir / "aspects.json");
    as << "{\"aspects\": [";
    for (int a = 0; a < 4; ++a) {
      as << (a ? "," : "") << "{\"name\": \"aspect" << a << "\", \"topics\": [{";
      for (int w = 0; w < 5; ++w) as << (w ? "," : "") << '"' << term(rng) << "\": 1.0";
      as << "}]}";
    }
    as << "]}";
  }
  ts::fs::create_directories(dir / "corpus");
  for (std::size_t d = 0; d < 500; ++d) {
    std::ofstream out(dir / "corpus" / ("doc" + std::to_string(d) + ".conllu"));
    for (std::size_t s = 0; s < 40; ++s) write_conllu(out, synthetic_sentence(rng, s));
  }
  {
    std::ofstream cfg(dir / "config.json");
    cfg << "{\"taxonomy\": \"taxonomy.tsv\", \"embeddings\": \"embeddings.txt\", \"aspects\": \"aspects.json\", "
           "\"corpus\": \"corpus\", \"k\": 3, \"mode\": \"all\"}";
  }

  auto start = std::chrono::steady_clock::now();
  auto c = load_config(dir / "config.json");
  auto corpus = load_corpus(c.corpus);
  auto r = load_resources(c);
  auto run = run_tagging(corpus.documents, r, c);
  {
    std::ofstream out(c.tags);
    write_tags(out, run.tags);
  }
  std::ifstream tin(c.tags);
  auto tags = read_tags(tin);
  auto index = build_corpus_index(corpus.documents, tags, r, c);
  {
    std::ofstream out(c.index);
    save_index(out, index);
  }
  *seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (corpus.documents.size() != 500 || corpus.sentences != 20000 || corpus.failed)
    return "ingest loaded " + std::to_string(corpus.documents.size()) + " documents";
  if (r.taxonomy.size() != 13000) return "taxonomy has " + std::to_string(r.taxonomy.size()) + " terms";
  if (index.documents.size() != 500) return "index has " + std::to_string(index.documents.size()) + " documents";
  if (tags.empty()) return "no tags";
  return "";
}

}  // namespace

int main() {
  double scale_seconds = 0;
  const std::vector<Criterion> criteria{
      {"worked-example", 1, worked_example},
      {"preposition-chain", 1, preposition_chain},
      {"heuristics", 0, heuristics},
      {"recommender-oracle", 30, recommender_oracle},
      {"embedding-math", 0, embedding_math},
      {"aspect-selection", 0, aspect_selection},
      {"simplifier", 0, simplifier},
      {"format-robustness", 0, format_robustness},
      {"pipeline-determinism", 0, pipeline_determinism},
      {"scale-smoke", 300, [&] { return scale_smoke(&scale_seconds); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    std::string problem;
    try {
      problem = c.check();
    } catch (const std::exception& e) {
      problem = std::string("exception: ") + e.what();
    }
    double took = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    // the scale criterion times ingest+tag+index only, not corpus generation
    double timed = c.name == "scale-smoke" ? scale_seconds : took;
    if (problem.empty() && c.seconds_limit > 0 && timed >= c.seconds_limit) {
      std::ostringstream os;
      os << "took " << timed << " s, limit " << c.seconds_limit << " s";
      problem = os.str();
    }
    std::cout << (problem.empty() ? "PASS " : "FAIL ") << c.name << "  (" << std::fixed
              << std::setprecision(3) << timed << " s)";
    if (!problem.empty()) std::cout << "  " << problem;
    std::cout << std::endl;
    failed += !problem.empty();
  }
  return failed ? 1 : 0;
}
