// legaltag: ingest -> tag -> index -> recommend, plus the HTTP service.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "legaltag/legaltag.hpp"
#include "legaltag/service.hpp"

namespace lt = legaltag;

namespace {

struct Flags {
  std::string config = "legaltag.json";
  std::string mode;
  std::size_t k = 0;
  std::size_t top_n = 0;
  bool baseline = false;
  bool json = false;
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string doc_id;
  std::vector<std::string> tags;
};

lt::PipelineConfig make_config(const Flags& f, bool mode_list = true) {
  auto c = lt::load_config(f.config);
  lt::apply_env_overrides(c);
  if (mode_list && !f.mode.empty()) c.modes = lt::parse_mode_list(f.mode);
  if (f.k) c.k = f.k;
  if (f.top_n) c.top_n = f.top_n;
  return c;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

lt::CorpusLoad load_corpus_or_fail(const lt::PipelineConfig& c) {
  auto corpus = lt::load_corpus(c.corpus);
  print_warnings(corpus.warnings);
  if (corpus.documents.empty()) throw lt::LoadError("no loadable documents in " + c.corpus.string());
  return corpus;
}

lt::EmbeddingStore load_store(const lt::PipelineConfig& c) {
  lt::require_file(c.embeddings, "embeddings");
  std::ifstream in(c.embeddings);
  return lt::load_embeddings(in);
}

lt::CorpusIndex load_index_file(const lt::PipelineConfig& c) {
  lt::require_file(c.index, "index");
  std::ifstream in(c.index);
  return lt::load_index(in);
}

int cmd_ingest(const Flags& f) {
  auto c = make_config(f);
  auto corpus = lt::load_corpus(c.corpus);
  print_warnings(corpus.warnings);
  std::cout << corpus.documents.size() << " documents, " << corpus.sentences << " sentences, "
            << corpus.failed << " failed\n";
  return corpus.documents.empty() ? 1 : 0;
}

int cmd_tag(const Flags& f) {
  auto c = make_config(f);
  auto resources = lt::load_resources(c);
  auto corpus = load_corpus_or_fail(c);
  auto run = lt::run_tagging(corpus.documents, resources, c);
  print_warnings(run.warnings);
  std::ofstream out(c.tags);
  if (!out) throw lt::LoadError("cannot write " + c.tags.string());
  lt::write_tags(out, run.tags);
  std::cout << lt::format_summary(run.summary);
  return 0;
}

int cmd_index(const Flags& f) {
  auto c = make_config(f);
  auto resources = lt::load_resources(c);
  auto corpus = load_corpus_or_fail(c);
  lt::require_file(c.tags, "tag file");
  std::ifstream tin(c.tags);
  auto tags = lt::read_tags(tin);
  std::vector<std::string> warnings;
  auto index = lt::build_corpus_index(corpus.documents, tags, resources, c, &warnings);
  print_warnings(warnings);
  std::ofstream out(c.index);
  if (!out) throw lt::LoadError("cannot write " + c.index.string());
  lt::save_index(out, index);
  std::cout << "indexed " << index.documents.size() << " documents, " << tags.size() << " tags -> "
            << c.index.string() << '\n';
  return 0;
}

int cmd_recommend(const Flags& f) {
  auto c = make_config(f, false);
  auto index = load_index_file(c);
  auto store = load_store(c);
  auto mode = lt::TagMode::hybrid;
  if (!f.mode.empty()) {
    auto m = lt::parse_tag_mode(f.mode);
    if (!m) throw std::invalid_argument("unknown tag mode '" + f.mode + "'");
    mode = *m;
  }
  lt::RecommendRequest req{f.doc_id, f.tags, c.top_n, f.baseline, mode};
  std::vector<lt::Recommendation> recs;
  try {
    recs = lt::run_recommendation(index, store, req);
  } catch (const lt::RequestError& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (e.extra().contains("valid_tags")) {
      std::cerr << "valid tags:\n";
      for (const auto& t : e.extra()["valid_tags"]) std::cerr << "  " << t.get<std::string>() << '\n';
    }
    return 2;
  }
  if (f.json) {
    std::cout << lt::ranking_json(req, recs).dump() << '\n';
    return 0;
  }
  std::cout << (f.baseline ? "full-text baseline" : "tag similarity") << " ranking for "
            << f.doc_id << '\n';
  std::size_t rank = 0;
  for (const auto& r : recs) {
    std::cout << std::setw(3) << ++rank << "  " << std::left << std::setw(24) << r.doc_id
              << std::right << std::fixed << std::setprecision(6) << r.score << '\n';
    for (const auto& p : r.per_tag_scores) {
      std::cout << "       \"" << p.selected << "\"";
      if (p.best_tag) std::cout << " -> \"" << *p.best_tag << "\"";
      std::cout << "  " << std::setprecision(4) << p.similarity << '\n';
    }
  }
  return 0;
}

int cmd_serve(const Flags& f) {
  auto c = make_config(f);
  lt::Service service(load_index_file(c), load_store(c));
  httplib::Server server;
  lt::mount(server, service);
  std::cout << "serving " << service.index().documents.size() << " documents on http://" << f.host
            << ':' << f.port << std::endl;
  if (!server.listen(f.host, f.port)) {
    std::cerr << "error: cannot listen on " << f.host << ':' << f.port << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Legal phrase tags and similar-judgement recommendation"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "Pipeline config (JSON)")->envname("LEGALTAG_CONFIG");

  auto* ingest = app.add_subcommand("ingest", "Parse the corpus and report counts");
  auto* tag = app.add_subcommand("tag", "Generate tags and print per-mode averages");
  tag->add_option("--mode", f.mode, "HYBRID, DEP_ONLY, CONST_ONLY, WORD_ONLY, a comma list, or all");
  tag->add_option("--k", f.k, "Aspect sentences per document")->check(CLI::PositiveNumber);
  auto* index = app.add_subcommand("index", "Embed tags and write the corpus index");
  index->add_option("--k", f.k, "Aspect sentences per document")->check(CLI::PositiveNumber);
  auto* rec = app.add_subcommand("recommend", "Rank judgements similar to selected tags");
  rec->add_option("doc_id", f.doc_id, "Document the tags were chosen from")->required();
  rec->add_option("--tag", f.tags, "Selected tag text (repeatable)")->required();
  rec->add_option("--top-n", f.top_n, "Number of recommendations")->check(CLI::PositiveNumber);
  rec->add_option("--mode", f.mode, "Tag mode to match against");
  rec->add_flag("--baseline", f.baseline, "Compare against whole-document text instead");
  rec->add_flag("--json", f.json, "Print the HTTP response body");
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--port", f.port, "Port")->check(CLI::Range(1, 65535));
  serve->add_option("--host", f.host, "Bind address");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return cmd_ingest(f);
    if (*tag) return cmd_tag(f);
    if (*index) return cmd_index(f);
    if (*rec) return cmd_recommend(f);
    if (*serve) return cmd_serve(f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
