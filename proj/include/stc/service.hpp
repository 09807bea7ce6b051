#pragma once

// HTTP surface over one loaded bundle.
//
//   POST /v1/chat      {query, seed?, debug?} -> {text, low_confidence, debug?}
//   GET  /v1/health    {status, n_posts, pv_dim}
//   GET  /v1/manifest  the bundle manifest
//
// Errors are {"error": {"code", "message"}} with 400 MalformedRequest,
// 422 EmptyQuery or 500 Internal. Handlers share nothing mutable.

#include <memory>
#include <optional>
#include <string>
#include <string_view>

// httplib's default accept backlog of 5 drops connections under bursts.
#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 512
#endif
#include "httplib.h"
#include "json.hpp"

#include "stc/bundle.hpp"
#include "stc/config.hpp"
#include "stc/error.hpp"
#include "stc/pipeline.hpp"

namespace stc {

inline json to_json(const ScoredPost& p) {
  return {{"ordinal", p.corpus_ordinal}, {"score", p.score}};
}

inline json to_json(const CandidateResponse& c) {
  return {{"post_ordinal", c.post_ordinal},
          {"comment_index", c.comment_index},
          {"text", c.text},
          {"popularity", c.popularity}};
}

/// Debug view of one response: every stage, with matched post titles and the
/// chosen pool entry flagged.
inline json debug_json(const ChatResponse& r, const Corpus& corpus) {
  json retrieved = json::array();
  for (const auto& p : r.retrieved) retrieved.push_back(to_json(p));
  json matched = json::array();
  for (const auto& p : r.matched) {
    json m = to_json(p);
    m["title"] = corpus.posts.at(p.corpus_ordinal).title;
    matched.push_back(std::move(m));
  }
  json pool = json::array();
  for (std::size_t i = 0; i < r.pool.size(); ++i) {
    json c = to_json(r.pool[i]);
    c["chosen"] = (i == r.chosen_index);
    pool.push_back(std::move(c));
  }
  return {{"match_field", std::string(to_string(r.match_field))},
          {"retrieved", std::move(retrieved)},
          {"matched", std::move(matched)},
          {"pool", std::move(pool)},
          {"chosen_index", r.chosen_index}};
}

class ChatService {
 public:
  struct Reply {
    int status = 200;
    json body;
  };

  ChatService(std::shared_ptr<const IndexBundle> bundle, PipelineConfig cfg)
      : bundle_(std::move(bundle)), cfg_(std::move(cfg)) {
    cfg_.validate();
  }

  const IndexBundle& bundle() const noexcept { return *bundle_; }

  Reply chat(std::string_view request_body) const {
    try {
      json req;
      try {
        req = json::parse(request_body);
      } catch (const json::parse_error&) {
        return error(400, "MalformedRequest", "request body is not valid JSON");
      }
      if (!req.is_object()) return error(400, "MalformedRequest", "request body must be an object");
      auto q = req.find("query");
      if (q == req.end() || !q->is_string()) {
        return error(400, "MalformedRequest", "'query' must be a string");
      }
      PipelineConfig cfg = cfg_;
      cfg.response_seed.reset();
      if (auto s = req.find("seed"); s != req.end() && !s->is_null()) {
        if (!s->is_number_unsigned()) {
          return error(400, "MalformedRequest", "'seed' must be a non-negative integer");
        }
        cfg.response_seed = s->get<std::uint64_t>();
      }
      bool debug = false;
      if (auto d = req.find("debug"); d != req.end() && !d->is_null()) {
        if (!d->is_boolean()) return error(400, "MalformedRequest", "'debug' must be a boolean");
        debug = d->get<bool>();
      }

      const ChatResponse r = respond(q->get<std::string>(), *bundle_, cfg);
      json body = {{"text", r.text}, {"low_confidence", r.low_confidence}};
      if (debug) body["debug"] = debug_json(r, bundle_->corpus);
      return {200, std::move(body)};
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EmptyQuery) return error(422, "EmptyQuery", "query has no tokens");
      return error(500, "Internal", "internal error");
    } catch (const std::exception&) {
      return error(500, "Internal", "internal error");
    }
  }

  Reply health() const {
    return {200,
            {{"status", "ok"},
             {"n_posts", bundle_->corpus.size()},
             {"pv_dim", bundle_->pv_title.dim()}}};
  }

  Reply manifest() const { return {200, to_json(bundle_->manifest)}; }

  /// Registers the /v1 routes on `server`. The service must outlive it.
  void mount(httplib::Server& server) const {
    auto send = [](httplib::Response& res, const Reply& reply) {
      res.status = reply.status;
      res.set_content(reply.body.dump(), "application/json; charset=utf-8");
    };
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Post("/v1/chat", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, chat(req.body));
    });
    server.Get("/v1/health", [this, send](const httplib::Request&, httplib::Response& res) {
      send(res, health());
    });
    server.Get("/v1/manifest", [this, send](const httplib::Request&, httplib::Response& res) {
      send(res, manifest());
    });
    server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });
    server.set_exception_handler([send](const httplib::Request&, httplib::Response& res,
                                        std::exception_ptr) {
      send(res, error(500, "Internal", "internal error"));
    });
  }

  static Reply error(int status, std::string_view code, std::string_view message) {
    return {status, {{"error", {{"code", code}, {"message", message}}}}};
  }

 private:
  std::shared_ptr<const IndexBundle> bundle_;
  PipelineConfig cfg_;
};

}  // namespace stc
