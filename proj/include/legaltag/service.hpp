#pragma once

// HTTP API over a built index. Handlers are plain functions returning a status
// and a JSON body so the CLI and the server share one code path.
//
//   GET  /api/health                       {"status","index_version","corpus_size","dim"}
//   GET  /api/documents?offset=&limit=     {"total","offset","limit","documents":[{"id","title","tag_count"}]}
//   GET  /api/documents/{id}               {"id","metadata","aspect_sentences","tags":{aspect:{mode:[text]}}}
//   POST /api/recommend                    body {"doc_id","tags":[...],"top_n","baseline","mode"}
//                                          -> {"doc_id","baseline","mode","recommendations":[...]}
//
// Errors carry {"error": message}: 400 malformed body, 404 unknown document,
// 422 tags that do not belong to the document (with "valid_tags").

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "legaltag/embeddings.hpp"
#include "legaltag/recommender.hpp"
#include "legaltag/tagger.hpp"

namespace legaltag {

struct Response {
  int status = 200;
  std::string body;
};

struct RecommendRequest {
  std::string doc_id;
  std::vector<std::string> tags;
  std::size_t top_n = 5;
  bool baseline = false;
  TagMode mode = TagMode::hybrid;
};

class RequestError : public std::runtime_error {
 public:
  RequestError(int status, const std::string& what, nlohmann::ordered_json extra = {})
      : std::runtime_error(what), status_(status), extra_(std::move(extra)) {}
  int status() const noexcept { return status_; }
  const nlohmann::ordered_json& extra() const noexcept { return extra_; }

 private:
  int status_;
  nlohmann::ordered_json extra_;
};

inline nlohmann::ordered_json ranking_json(const RecommendRequest& req,
                                           const std::vector<Recommendation>& recs) {
  nlohmann::ordered_json out;
  out["doc_id"] = req.doc_id;
  out["baseline"] = req.baseline;
  out["mode"] = std::string(to_string(req.mode));
  auto& list = out["recommendations"] = nlohmann::ordered_json::array();
  for (const auto& r : recs) {
    nlohmann::ordered_json jr;
    jr["doc_id"] = r.doc_id;
    jr["score"] = r.score;
    auto& per = jr["per_tag_scores"] = nlohmann::ordered_json::array();
    for (const auto& p : r.per_tag_scores) {
      nlohmann::ordered_json jp;
      jp["selected"] = p.selected;
      jp["best_tag"] = p.best_tag ? nlohmann::ordered_json(*p.best_tag) : nlohmann::ordered_json();
      jp["similarity"] = p.similarity;
      per.push_back(std::move(jp));
    }
    list.push_back(std::move(jr));
  }
  return out;
}

// Validates the request against the index and runs the selected arm.
// Throws RequestError (404 / 422 / 400).
inline std::vector<Recommendation> run_recommendation(const CorpusIndex& index,
                                                      const EmbeddingStore& store,
                                                      const RecommendRequest& req) {
  auto it = index.documents.find(req.doc_id);
  if (it == index.documents.end()) throw RequestError(404, "unknown document '" + req.doc_id + "'");
  if (req.tags.empty()) throw RequestError(400, "no tags selected");
  if (req.top_n == 0) throw RequestError(400, "top_n must be >= 1");

  std::set<std::string> valid;
  for (const auto& t : it->second.tags)
    if (t.mode == req.mode) valid.insert(t.text);
  std::vector<std::string> unknown;
  for (const auto& t : req.tags)
    if (!valid.count(t)) unknown.push_back(t);
  if (!unknown.empty()) {
    nlohmann::ordered_json extra;
    extra["unknown_tags"] = unknown;
    extra["valid_tags"] = std::vector<std::string>(valid.begin(), valid.end());
    throw RequestError(422, "selected tags do not belong to '" + req.doc_id + "'", extra);
  }

  RecommendOptions opts{req.doc_id, req.top_n, req.mode};
  return req.baseline ? recommend_fulltext_baseline(req.tags, index, store, opts)
                      : recommend(req.tags, index, store, opts);
}

class Service {
 public:
  Service(CorpusIndex index, EmbeddingStore store)
      : index_(std::move(index)), store_(std::move(store)) {
    if (index_.dim != store_.dim())
      throw std::invalid_argument("index and embedding store dimensions differ");
  }

  const CorpusIndex& index() const noexcept { return index_; }

  Response health() const {
    nlohmann::ordered_json j;
    j["status"] = "ok";
    j["index_version"] = kIndexFormatVersion;
    j["corpus_size"] = index_.documents.size();
    j["dim"] = index_.dim;
    return {200, j.dump()};
  }

  Response list_documents(std::size_t offset, std::size_t limit) const {
    nlohmann::ordered_json j;
    j["total"] = index_.documents.size();
    j["offset"] = offset;
    j["limit"] = limit;
    auto& docs = j["documents"] = nlohmann::ordered_json::array();
    std::size_t i = 0;
    for (const auto& [id, d] : index_.documents) {
      if (i++ < offset) continue;
      if (docs.size() >= limit) break;
      nlohmann::ordered_json jd;
      jd["id"] = id;
      jd["title"] = d.metadata.title;
      jd["tag_count"] = d.tags.size();
      docs.push_back(std::move(jd));
    }
    return {200, j.dump()};
  }

  Response get_document(const std::string& id) const {
    auto it = index_.documents.find(id);
    if (it == index_.documents.end()) return error(404, "unknown document '" + id + "'");
    const auto& d = it->second;
    nlohmann::ordered_json j;
    j["id"] = d.id;
    j["metadata"] = {{"title", d.metadata.title}, {"court", d.metadata.court},
                     {"year", d.metadata.year}};
    auto& as = j["aspect_sentences"] = nlohmann::ordered_json::array();
    for (const auto& a : d.aspect_sentences)
      as.push_back({{"sentence_index", a.sentence_index}, {"aspect", a.aspect},
                    {"score", a.score}, {"text", a.text}});
    auto& tags = j["tags"] = nlohmann::ordered_json::object();
    for (const auto& t : d.tags) tags[t.aspect][std::string(to_string(t.mode))].push_back(t.text);
    return {200, j.dump()};
  }

  Response recommend(const std::string& body) const {
    RecommendRequest req;
    try {
      auto j = nlohmann::json::parse(body);
      req.doc_id = j.at("doc_id").get<std::string>();
      req.tags = j.at("tags").get<std::vector<std::string>>();
      req.top_n = j.value("top_n", std::size_t{5});
      req.baseline = j.value("baseline", false);
      if (j.contains("mode")) {
        auto m = parse_tag_mode(j.at("mode").get<std::string>());
        if (!m) return error(400, "unknown mode");
        req.mode = *m;
      }
    } catch (const nlohmann::json::exception& e) {
      return error(400, std::string("malformed request: ") + e.what());
    }
    try {
      return {200, ranking_json(req, run_recommendation(index_, store_, req)).dump()};
    } catch (const RequestError& e) {
      return error(e.status(), e.what(), e.extra());
    }
  }

 private:
  static Response error(int status, const std::string& message,
                        const nlohmann::ordered_json& extra = {}) {
    nlohmann::ordered_json j;
    j["error"] = message;
    if (extra.is_object())
      for (const auto& [k, v] : extra.items()) j[k] = v;
    return {status, j.dump()};
  }

  CorpusIndex index_;
  EmbeddingStore store_;
};

inline void mount(httplib::Server& server, const Service& service) {
  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body, "application/json; charset=utf-8");
  };
  auto count_param = [](const httplib::Request& req, const char* name, std::size_t fallback) {
    if (!req.has_param(name)) return fallback;
    try {
      long long v = std::stoll(req.get_param_value(name));
      return v < 0 ? fallback : static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      return fallback;
    }
  };

  server.Get("/api/health", [&service, send](const httplib::Request&, httplib::Response& res) {
    send(res, service.health());
  });
  server.Get("/api/documents", [&service, send, count_param](const httplib::Request& req,
                                                             httplib::Response& res) {
    send(res, service.list_documents(count_param(req, "offset", 0), count_param(req, "limit", 50)));
  });
  server.Get(R"(/api/documents/([^/]+))",
             [&service, send](const httplib::Request& req, httplib::Response& res) {
               send(res, service.get_document(req.matches[1].str()));
             });
  server.Post("/api/recommend", [&service, send](const httplib::Request& req,
                                                 httplib::Response& res) {
    send(res, service.recommend(req.body));
  });
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.status = 204;
  });
}

}  // namespace legaltag
