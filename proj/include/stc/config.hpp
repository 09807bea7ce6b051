#pragma once

// JSON encoding of the engine configuration. Decoding is strict: unknown keys
// and wrongly typed values are rejected with InvalidConfig. Omitted keys keep
// their defaults.

#include <cstdint>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

#include "stc/bundle.hpp"
#include "stc/corpus.hpp"
#include "stc/error.hpp"
#include "stc/paragraph_vectors.hpp"
#include "stc/pipeline_config.hpp"
#include "stc/tokenizer.hpp"

namespace stc {

using json = nlohmann::json;

struct EngineConfig {
  TokenizerConfig tokenizer;
  PvConfig pv;
  PipelineConfig pipeline;
  FilterConfig filter;
  std::string listen_address = "127.0.0.1:8080";

  void validate() const;
  bool operator==(const EngineConfig&) const = default;
};

struct ListenAddress {
  std::string host;
  int port = 0;
};

inline ListenAddress parse_listen_address(const std::string& s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == s.size()) {
    throw Error(ErrorCode::InvalidConfig, "listen_address must be host:port, got '" + s + "'");
  }
  ListenAddress out{s.substr(0, colon), 0};
  try {
    std::size_t used = 0;
    out.port = std::stoi(s.substr(colon + 1), &used);
    if (used != s.size() - colon - 1 || out.port < 0 || out.port > 65535) throw std::out_of_range("port");
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, "bad port in listen_address '" + s + "'");
  }
  return out;
}

inline void EngineConfig::validate() const {
  pv.validate();
  pipeline.validate();
  parse_listen_address(listen_address);
}

namespace detail {

class StrictObject {
 public:
  StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      fail(std::string("bad value for '") + key + "': " + e.what());
    }
  }

  template <typename T>
  void read_unsigned(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->template get<std::int64_t>() >= 0)) {
      fail(std::string("'") + key + "' must be a non-negative integer");
    }
    const auto v = it->template get<std::uint64_t>();
    if (v > std::numeric_limits<T>::max()) fail(std::string("'") + key + "' is out of range");
    out = static_cast<T>(v);
  }

  template <typename Fn>
  void read_with(const char* key, Fn&& fn) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it != j_.end()) fn(*it, path_ + "." + key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) fail("unknown key '" + key + "'");
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::InvalidConfig, path_ + ": " + what);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline json to_json(const TokenizerConfig& c) {
  return {{"lowercase", c.lowercase},
          {"unicode_normalization", std::string(to_string(c.unicode_normalization))},
          {"strip_punctuation", c.strip_punctuation},
          {"strip_emoji", c.strip_emoji},
          {"stopword_suffixes", c.stopword_suffixes}};
}

inline TokenizerConfig tokenizer_config_from_json(const json& j, const std::string& path = "tokenizer") {
  TokenizerConfig c;
  detail::StrictObject o(j, path);
  o.read("lowercase", c.lowercase);
  o.read_with("unicode_normalization", [&](const json& v, const std::string& p) {
    auto n = v.is_string() ? parse_unicode_normalization(v.get<std::string>()) : std::nullopt;
    if (!n) throw Error(ErrorCode::InvalidConfig, p + ": expected \"NFC\" or \"NFKC\"");
    c.unicode_normalization = *n;
  });
  o.read("strip_punctuation", c.strip_punctuation);
  o.read("strip_emoji", c.strip_emoji);
  o.read("stopword_suffixes", c.stopword_suffixes);
  o.finish();
  return c;
}

inline json to_json(const PvConfig& c) {
  return {{"dim", c.dim},
          {"window", c.window},
          {"negative_samples", c.negative_samples},
          {"epochs", c.epochs},
          {"initial_learning_rate", c.initial_learning_rate},
          {"min_token_count", c.min_token_count},
          {"infer_steps", c.infer_steps},
          {"rng_seed", c.rng_seed}};
}

inline PvConfig pv_config_from_json(const json& j, const std::string& path = "pv") {
  PvConfig c;
  detail::StrictObject o(j, path);
  o.read_unsigned("dim", c.dim);
  o.read_unsigned("window", c.window);
  o.read_unsigned("negative_samples", c.negative_samples);
  o.read_unsigned("epochs", c.epochs);
  o.read("initial_learning_rate", c.initial_learning_rate);
  o.read_unsigned("min_token_count", c.min_token_count);
  o.read_unsigned("infer_steps", c.infer_steps);
  o.read_unsigned("rng_seed", c.rng_seed);
  o.finish();
  return c;
}

inline json to_json(const PipelineConfig& c) {
  json j = {{"retrieve_k", c.retrieve_k},
            {"match_m", c.match_m},
            {"comments_per_post", c.comments_per_post},
            {"match_field", std::string(to_string(c.match_field))},
            {"response_seed", nullptr}};
  if (c.response_seed) j["response_seed"] = *c.response_seed;
  return j;
}

inline PipelineConfig pipeline_config_from_json(const json& j, const std::string& path = "pipeline") {
  PipelineConfig c;
  detail::StrictObject o(j, path);
  o.read_unsigned("retrieve_k", c.retrieve_k);
  o.read_unsigned("match_m", c.match_m);
  o.read_unsigned("comments_per_post", c.comments_per_post);
  o.read_with("match_field", [&](const json& v, const std::string& p) {
    auto f = v.is_string() ? parse_text_field(v.get<std::string>()) : std::nullopt;
    if (!f) throw Error(ErrorCode::InvalidConfig, p + ": expected \"title\" or \"body\"");
    c.match_field = *f;
  });
  o.read_with("response_seed", [&](const json& v, const std::string& p) {
    if (v.is_null()) return;
    if (!v.is_number_unsigned()) throw Error(ErrorCode::InvalidConfig, p + ": expected unsigned integer");
    c.response_seed = v.get<std::uint64_t>();
  });
  o.finish();
  return c;
}

inline json to_json(const FilterConfig& c) {
  return {{"min_body_tokens", c.min_body_tokens}, {"noise_patterns", c.noise_patterns}};
}

inline FilterConfig filter_config_from_json(const json& j, const std::string& path = "filter") {
  FilterConfig c;
  detail::StrictObject o(j, path);
  o.read_unsigned("min_body_tokens", c.min_body_tokens);
  o.read("noise_patterns", c.noise_patterns);
  o.finish();
  return c;
}

inline json to_json(const EngineConfig& c) {
  return {{"tokenizer", to_json(c.tokenizer)},
          {"pv", to_json(c.pv)},
          {"pipeline", to_json(c.pipeline)},
          {"filter", to_json(c.filter)},
          {"listen_address", c.listen_address}};
}

inline EngineConfig engine_config_from_json(const json& j) {
  EngineConfig c;
  detail::StrictObject o(j, "config");
  o.read_with("tokenizer", [&](const json& v, const std::string& p) { c.tokenizer = tokenizer_config_from_json(v, p); });
  o.read_with("pv", [&](const json& v, const std::string& p) { c.pv = pv_config_from_json(v, p); });
  o.read_with("pipeline", [&](const json& v, const std::string& p) { c.pipeline = pipeline_config_from_json(v, p); });
  o.read_with("filter", [&](const json& v, const std::string& p) { c.filter = filter_config_from_json(v, p); });
  o.read("listen_address", c.listen_address);
  o.finish();
  c.validate();
  return c;
}

inline EngineConfig parse_engine_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  return engine_config_from_json(j);
}

inline EngineConfig load_engine_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_engine_config(ss.str());
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
  return s;
}

inline json to_json(const ManifestHeader& m) {
  return {{"format_version", m.format_version},
          {"corpus_hash", hex64(m.corpus_hash)},
          {"pv_variant", m.pv_variant},
          {"tfidf_scheme", m.tfidf_scheme},
          {"tokenizer", to_json(m.tokenizer)},
          {"pv", to_json(m.pv)},
          {"pipeline_defaults", to_json(m.pipeline_defaults)},
          {"counts",
           {{"n_posts", m.counts.n_posts},
            {"title_vocab", m.counts.title_vocab},
            {"body_vocab", m.counts.body_vocab},
            {"pv_dim", m.counts.pv_dim},
            {"pv_vocab", m.counts.pv_vocab}}}};
}

inline ManifestHeader manifest_from_json(const json& j) {
  ManifestHeader m;
  detail::StrictObject o(j, "manifest");
  o.read_unsigned("format_version", m.format_version);
  o.read_with("corpus_hash", [&](const json& v, const std::string& p) {
    try {
      std::size_t used = 0;
      const auto s = v.get<std::string>();
      m.corpus_hash = std::stoull(s, &used, 16);
      if (used != s.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, p + ": expected hex string");
    }
  });
  o.read("pv_variant", m.pv_variant);
  o.read("tfidf_scheme", m.tfidf_scheme);
  o.read_with("tokenizer", [&](const json& v, const std::string& p) { m.tokenizer = tokenizer_config_from_json(v, p); });
  o.read_with("pv", [&](const json& v, const std::string& p) { m.pv = pv_config_from_json(v, p); });
  o.read_with("pipeline_defaults", [&](const json& v, const std::string& p) {
    m.pipeline_defaults = pipeline_config_from_json(v, p);
  });
  o.read_with("counts", [&](const json& v, const std::string& p) {
    detail::StrictObject c(v, p);
    c.read_unsigned("n_posts", m.counts.n_posts);
    c.read_unsigned("title_vocab", m.counts.title_vocab);
    c.read_unsigned("body_vocab", m.counts.body_vocab);
    c.read_unsigned("pv_dim", m.counts.pv_dim);
    c.read_unsigned("pv_vocab", m.counts.pv_vocab);
    c.finish();
  });
  o.finish();
  return m;
}

}  // namespace stc
