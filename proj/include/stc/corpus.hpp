#pragma once

// Post/comment data model and ingestion of newline-delimited JSON dumps.

#include <cstdint>
#include <algorithm>
#include <istream>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "stc/error.hpp"
#include "stc/tokenizer.hpp"

namespace stc {

struct Comment {
  std::string text;
  std::uint64_t likes = 0;
  std::uint64_t dislikes = 0;

  std::int64_t popularity() const noexcept {
    return static_cast<std::int64_t>(likes) - static_cast<std::int64_t>(dislikes);
  }

  bool operator==(const Comment&) const = default;
};

struct RawPost {
  std::string id;
  std::string title;
  std::string body;
  std::string created_at;
  std::vector<Comment> comments;

  bool operator==(const RawPost&) const = default;
};

struct Post {
  std::string id;
  std::string title;
  std::string body;
  std::string created_at;
  std::vector<Comment> comments;
  std::size_t corpus_ordinal = 0;

  bool operator==(const Post&) const = default;
};

struct Corpus {
  std::vector<Post> posts;
  std::string source_label;
  std::string ingested_at;

  std::size_t size() const noexcept { return posts.size(); }
  bool operator==(const Corpus&) const = default;
};

struct IngestReport {
  std::size_t raw_count = 0;
  std::size_t kept_count = 0;
  std::size_t dropped_non_text = 0;
  std::size_t dropped_noise = 0;
  std::size_t dropped_no_comments = 0;

  bool operator==(const IngestReport&) const = default;
};

struct FilterConfig {
  // Posts whose body yields fewer tokens are treated as non-text (photo/music posts).
  std::size_t min_body_tokens = 1;
  // ECMAScript regular expressions searched in title and body.
  std::vector<std::string> noise_patterns;

  bool operator==(const FilterConfig&) const = default;
};

enum class TextField : std::uint8_t { Title = 0, Body = 1 };

inline std::string_view to_string(TextField f) { return f == TextField::Title ? "title" : "body"; }

inline std::optional<TextField> parse_text_field(std::string_view s) {
  if (s == "title") return TextField::Title;
  if (s == "body") return TextField::Body;
  return std::nullopt;
}

inline const std::string& field_text(const Post& post, TextField field) {
  return field == TextField::Title ? post.title : post.body;
}

namespace detail {

inline bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

inline std::uint64_t read_count(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return 0;
  if (it->is_number_unsigned()) return it->get<std::uint64_t>();
  if (it->is_number_integer()) {
    if (it->get<std::int64_t>() < 0) {
      throw Error(ErrorCode::MalformedRecord, std::string("negative '") + key + "'");
    }
    return it->get<std::uint64_t>();
  }
  throw Error(ErrorCode::MalformedRecord, std::string("'") + key + "' must be an integer");
}

inline std::string read_string(const nlohmann::json& obj, const char* key, bool required) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) throw Error(ErrorCode::MissingField, std::string("missing '") + key + "'");
    return {};
  }
  if (!it->is_string()) {
    throw Error(ErrorCode::MalformedRecord, std::string("'") + key + "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace detail

/// Parses one corpus line. Likes/dislikes default to 0; comments whose text
/// is blank are dropped since they can never be served as a response.
inline RawPost parse_post_record(std::string_view line) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedRecord, e.what());
  }
  if (!obj.is_object()) throw Error(ErrorCode::MalformedRecord, "record is not an object");

  RawPost post;
  post.id = detail::read_string(obj, "id", true);
  post.title = detail::read_string(obj, "title", true);
  post.body = detail::read_string(obj, "body", true);
  post.created_at = detail::read_string(obj, "created_at", false);

  if (auto it = obj.find("comments"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(ErrorCode::MalformedRecord, "'comments' must be an array");
    for (const auto& c : *it) {
      if (!c.is_object()) throw Error(ErrorCode::MalformedRecord, "comment is not an object");
      Comment comment;
      comment.text = detail::read_string(c, "text", true);
      comment.likes = detail::read_count(c, "likes");
      comment.dislikes = detail::read_count(c, "dislikes");
      if (detail::is_blank(comment.text)) continue;
      post.comments.push_back(std::move(comment));
    }
  }
  return post;
}

/// Reads a newline-delimited record stream. Blank lines are skipped. Errors
/// carry the 1-based line number; duplicate ids are MalformedRecord.
inline std::vector<RawPost> read_raw_posts(std::istream& in) {
  std::vector<RawPost> posts;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    try {
      RawPost post = parse_post_record(line);
      if (!seen.insert(post.id).second) {
        throw Error(ErrorCode::MalformedRecord, "duplicate id '" + post.id + "'");
      }
      posts.push_back(std::move(post));
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.detail());
    }
  }
  return posts;
}

/// Applies the ingestion predicates in order (non-text, noise, no comments);
/// a dropped post is counted under the first predicate it fails.
inline std::pair<Corpus, IngestReport> filter_corpus(const std::vector<RawPost>& raw,
                                                     const FilterConfig& rules,
                                                     const Tokenizer& tokenizer) {
  std::vector<std::regex> noise;
  noise.reserve(rules.noise_patterns.size());
  for (const auto& p : rules.noise_patterns) {
    try {
      noise.emplace_back(p, std::regex::ECMAScript | std::regex::optimize);
    } catch (const std::regex_error& e) {
      throw Error(ErrorCode::InvalidConfig, "bad noise pattern '" + p + "': " + e.what());
    }
  }

  Corpus corpus;
  IngestReport report;
  report.raw_count = raw.size();
  for (const auto& post : raw) {
    if (tokenizer.tokenize(post.body).size() < rules.min_body_tokens) {
      ++report.dropped_non_text;
      continue;
    }
    const bool is_noise = std::ranges::any_of(noise, [&](const std::regex& re) {
      return std::regex_search(post.title, re) || std::regex_search(post.body, re);
    });
    if (is_noise) {
      ++report.dropped_noise;
      continue;
    }
    if (post.comments.empty()) {
      ++report.dropped_no_comments;
      continue;
    }
    corpus.posts.push_back(Post{post.id, post.title, post.body, post.created_at, post.comments,
                                corpus.posts.size()});
  }
  report.kept_count = corpus.posts.size();
  if (corpus.posts.empty()) {
    throw Error(ErrorCode::EmptyCorpusAfterFiltering,
                "all " + std::to_string(report.raw_count) + " posts were filtered out");
  }
  return {std::move(corpus), report};
}

inline std::pair<Corpus, IngestReport> filter_corpus(const std::vector<RawPost>& raw,
                                                     const FilterConfig& rules,
                                                     const TokenizerConfig& tok = {}) {
  return filter_corpus(raw, rules, RuleTokenizer(tok));
}

}  // namespace stc
