#pragma once

// Corpus layout, configuration and the ingest -> tag -> index stages shared by
// the CLI, the HTTP service and the tests.
//
// Corpus directory: one "<stem>.conllu" per judgement (doc id = stem). Trees
// come from "<stem>.tree" (bracketed, one per sentence, in CoNLL-U order) or,
// when that file is absent, from "# constituency = ..." comments. An optional
// "<stem>.meta.json" holds {"title", "court", "year"}.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "legaltag/aspects.hpp"
#include "legaltag/concept_tree.hpp"
#include "legaltag/embeddings.hpp"
#include "legaltag/error.hpp"
#include "legaltag/parse_model.hpp"
#include "legaltag/recommender.hpp"
#include "legaltag/tagger.hpp"

namespace legaltag {

namespace fs = std::filesystem;

struct PipelineConfig {
  fs::path taxonomy;
  fs::path embeddings;
  fs::path aspects;
  fs::path corpus;
  fs::path tags = "tags.jsonl";
  fs::path index = "index.json";
  std::size_t k = 3;
  std::vector<TagMode> modes{TagMode::hybrid};
  std::size_t top_n = 5;
  SelectionMode selection = SelectionMode::global;
  TagOptions tag_options;
};

inline std::vector<TagMode> parse_mode_list(const std::string& list) {
  if (text::to_lower(list) == "all") return {kAllTagModes.begin(), kAllTagModes.end()};
  std::vector<TagMode> out;
  for (auto part : text::split(list, ',')) {
    auto m = parse_tag_mode(text::trim(part));
    if (!m) throw std::invalid_argument("unknown tag mode '" + std::string(part) + "'");
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
  }
  if (out.empty()) throw std::invalid_argument("empty mode list");
  return out;
}

inline std::size_t parse_count(const std::string& what, const std::string& value) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != value.size() || v < 1) throw std::invalid_argument(what + " must be an integer >= 1");
  return static_cast<std::size_t>(v);
}

// Keys: taxonomy, embeddings, aspects, corpus, tags, index (paths relative to
// the config file), k, mode (string, list or "all"), top_n,
// selection ("global" | "per_aspect"), to_before_parents_only.
inline PipelineConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw LoadError("cannot open config '" + file.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("config: " + std::string(e.what()));
  }
  const fs::path base = file.parent_path();
  auto path_of = [&](const char* key, const fs::path& fallback) {
    if (!j.contains(key)) return fallback;
    fs::path p = j.at(key).get<std::string>();
    return p.is_absolute() ? p : base / p;
  };
  PipelineConfig c;
  try {
    c.taxonomy = path_of("taxonomy", {});
    c.embeddings = path_of("embeddings", {});
    c.aspects = path_of("aspects", {});
    c.corpus = path_of("corpus", {});
    c.tags = path_of("tags", base / c.tags);
    c.index = path_of("index", base / c.index);
    if (j.contains("k")) c.k = j.at("k").get<std::size_t>();
    if (j.contains("top_n")) c.top_n = j.at("top_n").get<std::size_t>();
    if (j.contains("mode")) {
      const auto& m = j.at("mode");
      if (m.is_array()) {
        std::string joined;
        for (const auto& x : m) joined += (joined.empty() ? "" : ",") + x.get<std::string>();
        c.modes = parse_mode_list(joined);
      } else {
        c.modes = parse_mode_list(m.get<std::string>());
      }
    }
    if (j.contains("selection")) {
      auto s = j.at("selection").get<std::string>();
      if (s == "global") c.selection = SelectionMode::global;
      else if (s == "per_aspect") c.selection = SelectionMode::per_aspect;
      else throw std::invalid_argument("selection must be 'global' or 'per_aspect'");
    }
    if (j.contains("to_before_parents_only"))
      c.tag_options.to_before_parents_only = j.at("to_before_parents_only").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("config: " + std::string(e.what()));
  } catch (const std::invalid_argument& e) {
    throw LoadError("config: " + std::string(e.what()));
  }
  if (c.k == 0 || c.top_n == 0) throw LoadError("config: k and top_n must be >= 1");
  return c;
}

inline constexpr const char* kEnvPrefix = "LEGALTAG_";

// LEGALTAG_TAXONOMY, _EMBEDDINGS, _ASPECTS, _CORPUS, _TAGS, _INDEX, _K, _MODE
// and _TOP_N override the corresponding config entries.
inline void apply_env_overrides(
    PipelineConfig& c,
    const std::function<const char*(const char*)>& getenv_fn = [](const char* n) {
      return std::getenv(n);
    }) {
  auto get = [&](const char* name) -> std::optional<std::string> {
    std::string key = std::string(kEnvPrefix) + name;
    const char* v = getenv_fn(key.c_str());
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  if (auto v = get("TAXONOMY")) c.taxonomy = *v;
  if (auto v = get("EMBEDDINGS")) c.embeddings = *v;
  if (auto v = get("ASPECTS")) c.aspects = *v;
  if (auto v = get("CORPUS")) c.corpus = *v;
  if (auto v = get("TAGS")) c.tags = *v;
  if (auto v = get("INDEX")) c.index = *v;
  if (auto v = get("K")) c.k = parse_count("LEGALTAG_K", *v);
  if (auto v = get("MODE")) c.modes = parse_mode_list(*v);
  if (auto v = get("TOP_N")) c.top_n = parse_count("LEGALTAG_TOP_N", *v);
}

inline void require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw LoadError(std::string(what) + " path not configured");
  if (!fs::exists(p)) throw LoadError(std::string(what) + " not found: " + p.string());
}

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

inline Document load_document(const fs::path& conllu_file) {
  std::ifstream in(conllu_file);
  if (!in) throw LoadError("cannot open " + conllu_file.string());
  Document doc;
  doc.id = conllu_file.stem().string();
  doc.sentences = read_conllu(in);
  if (doc.sentences.empty()) throw ParseError("no sentences", 0);

  fs::path sidecar = conllu_file;
  sidecar.replace_extension(".tree");
  if (fs::exists(sidecar)) {
    std::ifstream ts(sidecar);
    auto trees = read_bracketed_all(ts);
    if (trees.size() != doc.sentences.size())
      throw ParseError(sidecar.filename().string() + " has " + std::to_string(trees.size()) +
                           " trees for " + std::to_string(doc.sentences.size()) + " sentences",
                       0);
    for (std::size_t i = 0; i < trees.size(); ++i) attach_tree(doc.sentences[i], std::move(trees[i]));
  }

  fs::path meta = conllu_file;
  meta.replace_extension(".meta.json");
  if (fs::exists(meta)) {
    std::ifstream ms(meta);
    auto j = nlohmann::json::parse(ms);
    doc.metadata.title = j.value("title", "");
    doc.metadata.court = j.value("court", "");
    doc.metadata.year = j.value("year", "");
  }
  return doc;
}

struct CorpusLoad {
  std::vector<Document> documents;
  std::size_t sentences = 0;
  std::size_t failed = 0;
  std::vector<std::string> warnings;
};

// Loads every "*.conllu" in name order; unreadable documents are skipped
// with a warning.
inline CorpusLoad load_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw LoadError("corpus directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".conllu") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  CorpusLoad out;
  for (const auto& f : files) {
    try {
      Document d = load_document(f);
      out.sentences += d.sentences.size();
      out.documents.push_back(std::move(d));
    } catch (const ParseError& e) {
      ++out.failed;
      out.warnings.push_back(f.filename().string() + ":" + std::to_string(e.line()) + ": " + e.what());
    } catch (const std::exception& e) {
      ++out.failed;
      out.warnings.push_back(f.filename().string() + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tag files: JSON Lines, one object per tag with text, matched_term, doc_id,
// sentence_index, aspect, mode.
// ---------------------------------------------------------------------------

inline void write_tags(std::ostream& os, const std::vector<Tag>& tags) {
  for (const auto& t : tags) os << tag_to_json(t).dump() << '\n';
}

inline std::vector<Tag> read_tags(std::istream& is) {
  std::vector<Tag> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(tag_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(std::string("tag file: ") + e.what(), line_no);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

struct Resources {
  ConceptIndex taxonomy;
  EmbeddingStore store;
  std::vector<AspectModel> aspects;
};

inline Resources load_resources(const PipelineConfig& c) {
  require_file(c.taxonomy, "taxonomy");
  require_file(c.embeddings, "embeddings");
  require_file(c.aspects, "aspect config");
  std::ifstream tx(c.taxonomy), em(c.embeddings), as(c.aspects);
  Resources r{load_concept_tree(tx), load_embeddings(em), {}};
  r.aspects = build_aspect_models(load_aspects(as), r.store);
  return r;
}

struct ModeSummary {
  TagMode mode = TagMode::hybrid;
  std::size_t documents = 0;
  std::size_t tags = 0;

  double average() const { return documents ? static_cast<double>(tags) / documents : 0.0; }
};

struct TaggingRun {
  std::vector<Tag> tags;  // mode order, then document order
  std::vector<ModeSummary> summary;
  std::vector<std::string> warnings;
};

inline std::map<std::string, std::vector<AspectSentence>> select_all(
    const std::vector<Document>& docs, const Resources& r, const PipelineConfig& c) {
  std::map<std::string, std::vector<AspectSentence>> out;
  for (const auto& d : docs) out[d.id] = select_aspect_sentences(d, r.aspects, c.k, r.store, c.selection);
  return out;
}

inline TaggingRun run_tagging(const std::vector<Document>& docs, const Resources& r,
                              const PipelineConfig& c) {
  TaggingRun run;
  auto selections = select_all(docs, r, c);
  for (auto mode : c.modes) {
    ModeSummary s{mode, docs.size(), 0};
    for (const auto& d : docs) {
      auto tagged = tag_selected(d, selections.at(d.id), r.taxonomy, mode, c.tag_options);
      s.tags += tagged.tags.size();
      run.tags.insert(run.tags.end(), tagged.tags.begin(), tagged.tags.end());
      if (mode == c.modes.front())
        run.warnings.insert(run.warnings.end(), tagged.warnings.begin(), tagged.warnings.end());
    }
    run.summary.push_back(s);
  }
  return run;
}

inline std::string format_summary(const std::vector<ModeSummary>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "mode" << std::right << std::setw(6) << "docs"
     << std::setw(7) << "tags" << std::setw(14) << "tags_per_doc" << '\n';
  for (const auto& r : rows) {
    os << std::left << std::setw(12) << to_string(r.mode) << std::right << std::setw(6)
       << r.documents << std::setw(7) << r.tags << std::setw(14) << std::fixed
       << std::setprecision(2) << r.average() << '\n';
  }
  return os.str();
}

inline CorpusIndex build_corpus_index(const std::vector<Document>& docs, const std::vector<Tag>& tags,
                                      const Resources& r, const PipelineConfig& c,
                                      std::vector<std::string>* warnings = nullptr) {
  auto selections = select_all(docs, r, c);
  std::map<std::string, std::vector<Tag>> by_doc;
  for (const auto& t : tags) by_doc[t.doc_id].push_back(t);
  std::vector<IndexSource> sources;
  for (const auto& d : docs) {
    auto it = by_doc.find(d.id);
    sources.push_back(IndexSource{&d, selections.at(d.id),
                                  it == by_doc.end() ? std::vector<Tag>{} : it->second});
    if (it != by_doc.end()) by_doc.erase(it);
  }
  if (warnings)
    for (const auto& [id, _] : by_doc) warnings->push_back("tags for unknown document '" + id + "'");
  return build_index(sources, r.store, warnings);
}

}  // namespace legaltag
