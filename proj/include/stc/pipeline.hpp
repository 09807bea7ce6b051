#pragma once

// Online response selection in three stages:
//   retrieve  top-K posts by paragraph-vector cosine between query and titles
//   match     top-M of those by TF-IDF cosine on the configured field
//   rank      the most popular comments (likes - dislikes) of each matched
//             post form a pool; one is drawn uniformly at random
// Ties are broken by ascending corpus ordinal, then ascending comment index.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "stc/bundle.hpp"
#include "stc/error.hpp"
#include "stc/paragraph_vectors.hpp"
#include "stc/pipeline_config.hpp"
#include "stc/tfidf.hpp"
#include "stc/tokenizer.hpp"

namespace stc {

enum class Stage { Retrieved, Matched };

struct ScoredPost {
  std::size_t corpus_ordinal = 0;
  double score = 0.0;
  Stage stage = Stage::Retrieved;

  bool operator==(const ScoredPost&) const = default;
};

struct CandidateResponse {
  std::size_t post_ordinal = 0;
  std::size_t comment_index = 0;
  std::string text;
  std::int64_t popularity = 0;

  bool operator==(const CandidateResponse&) const = default;
};

struct ChatResponse {
  std::string text;
  CandidateResponse chosen;
  std::size_t chosen_index = 0;  // position of `chosen` in `pool`
  bool low_confidence = false;
  TextField match_field = TextField::Body;
  std::vector<ScoredPost> retrieved;
  std::vector<ScoredPost> matched;
  std::vector<CandidateResponse> pool;

  bool operator==(const ChatResponse&) const = default;
};

namespace detail {

inline bool score_order(const ScoredPost& a, const ScoredPost& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.corpus_ordinal < b.corpus_ordinal;
}

inline std::vector<ScoredPost> top_n(std::vector<ScoredPost> scored, std::size_t n) {
  n = std::min(n, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    score_order);
  scored.resize(n);
  return scored;
}

inline TokenStream query_tokens(std::string_view query, const IndexBundle& bundle) {
  TokenStream tokens = tokenize(query, bundle.manifest.tokenizer);
  if (tokens.empty()) throw Error(ErrorCode::EmptyQuery, "query has no tokens");
  return tokens;
}

/// Unbiased draw from [0, n).
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::mt19937_64::max() - (std::mt19937_64::max() % bound);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

}  // namespace detail

inline std::vector<ScoredPost> retrieve(const TokenStream& tokens, const IndexBundle& bundle,
                                        const PipelineConfig& cfg) {
  const PvModel& model = bundle.pv_title;
  const std::size_t n = bundle.corpus.size();
  std::vector<ScoredPost> scored(n);
  for (std::size_t d = 0; d < n; ++d) scored[d] = {d, 0.0, Stage::Retrieved};

  std::vector<float> query;
  try {
    query = infer_vector(tokens, model);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyQueryAfterOov) throw;
  }
  if (!query.empty()) {
    const std::span<const float> q(query);
    const double qn = l2_norm<float>(q);
    for (std::size_t d = 0; d < n; ++d) {
      scored[d].score = cosine_with_norms<float>(q, model.doc_vector(d), qn, model.doc_norm(d));
    }
  }
  return detail::top_n(std::move(scored), cfg.retrieve_k);
}

inline std::vector<ScoredPost> retrieve(std::string_view query, const IndexBundle& bundle,
                                        const PipelineConfig& cfg) {
  return retrieve(detail::query_tokens(query, bundle), bundle, cfg);
}

inline std::vector<ScoredPost> match(const TokenStream& tokens,
                                     const std::vector<ScoredPost>& retrieved,
                                     const IndexBundle& bundle, const PipelineConfig& cfg) {
  const TfIdfIndex& index = bundle.tfidf(cfg.match_field);
  const SparseVector q = embed_query(tokens, index);
  std::vector<ScoredPost> scored;
  scored.reserve(retrieved.size());
  for (const auto& r : retrieved) {
    scored.push_back(
        {r.corpus_ordinal, cosine_sparse(q, index.doc_vector(r.corpus_ordinal)), Stage::Matched});
  }
  return detail::top_n(std::move(scored), cfg.match_m);
}

inline std::vector<ScoredPost> match(std::string_view query,
                                     const std::vector<ScoredPost>& retrieved,
                                     const IndexBundle& bundle, const PipelineConfig& cfg) {
  return match(detail::query_tokens(query, bundle), retrieved, bundle, cfg);
}

/// Top comments of one post by popularity, ties by input order.
inline std::vector<std::size_t> popular_comments(const Post& post, std::size_t limit) {
  std::vector<std::size_t> idx(post.comments.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::ranges::stable_sort(idx, [&](std::size_t a, std::size_t b) {
    return post.comments[a].popularity() > post.comments[b].popularity();
  });
  idx.resize(std::min(limit, idx.size()));
  return idx;
}

/// Without a seed the final draw uses fresh entropy, so repeated queries can
/// get different answers.
inline ChatResponse rank(const std::vector<ScoredPost>& matched, const Corpus& corpus,
                         const PipelineConfig& cfg, std::optional<std::uint64_t> seed) {
  ChatResponse response;
  response.match_field = cfg.match_field;
  response.matched = matched;
  for (const auto& m : matched) {
    const Post& post = corpus.posts.at(m.corpus_ordinal);
    for (std::size_t ci : popular_comments(post, cfg.comments_per_post)) {
      const Comment& c = post.comments[ci];
      response.pool.push_back({m.corpus_ordinal, ci, c.text, c.popularity()});
    }
  }
  if (response.pool.empty()) throw Error(ErrorCode::EmptyCandidatePool, "no candidate comments");

  std::mt19937_64 rng(seed ? *seed : (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^
                                         std::random_device{}());
  response.chosen_index = detail::uniform_index(rng, response.pool.size());
  response.chosen = response.pool[response.chosen_index];
  response.text = response.chosen.text;
  response.low_confidence =
      std::ranges::all_of(matched, [](const ScoredPost& p) { return p.score == 0.0; });
  return response;
}

inline ChatResponse respond(std::string_view query, const IndexBundle& bundle,
                            const PipelineConfig& cfg) {
  const TokenStream tokens = detail::query_tokens(query, bundle);
  auto retrieved = retrieve(tokens, bundle, cfg);
  auto matched = match(tokens, retrieved, bundle, cfg);
  ChatResponse response = rank(matched, bundle.corpus, cfg, cfg.response_seed);
  response.retrieved = std::move(retrieved);
  return response;
}

}  // namespace stc
