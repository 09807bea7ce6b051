#pragma once

// Corpora shared by the unit and acceptance suites.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "stc/corpus.hpp"
#include "stc/paragraph_vectors.hpp"
#include "stc/pipeline_config.hpp"

namespace stc::testing {

inline Post make_post(std::size_t ordinal, std::string title, std::string body,
                      std::vector<Comment> comments) {
  Post p;
  p.id = "p" + std::to_string(ordinal);
  p.title = std::move(title);
  p.body = std::move(body);
  p.created_at = "2019-10-01T00:00:00Z";
  p.comments = std::move(comments);
  p.corpus_ordinal = ordinal;
  return p;
}

inline Corpus make_corpus(std::vector<Post> posts) {
  Corpus c;
  c.posts = std::move(posts);
  for (std::size_t i = 0; i < c.posts.size(); ++i) c.posts[i].corpus_ordinal = i;
  c.source_label = "fixture";
  c.ingested_at = "2019-10-01T00:00:00Z";
  return c;
}

/// Three posts whose bodies are "a b", "b c", "c c".
inline Corpus three_doc_corpus() {
  return make_corpus({
      make_post(0, "first post", "a b", {{"reply one", 1, 0}}),
      make_post(1, "second post", "b c", {{"reply two", 2, 0}}),
      make_post(2, "third post", "c c", {{"reply three", 3, 0}}),
  });
}

/// Four documents over a six-word vocabulary, for paragraph-vector training.
inline Corpus pv_toy_corpus() {
  return make_corpus({
      make_post(0, "apple banana apple", "x", {{"c", 0, 0}}),
      make_post(1, "cherry date cherry", "x", {{"c", 0, 0}}),
      make_post(2, "elder fig elder", "x", {{"c", 0, 0}}),
      make_post(3, "apple cherry fig", "x", {{"c", 0, 0}}),
  });
}

inline PvConfig small_pv_config(std::uint32_t dim = 8, std::uint32_t epochs = 30,
                                std::uint64_t seed = 42) {
  PvConfig c;
  c.dim = dim;
  c.epochs = epochs;
  c.rng_seed = seed;
  c.infer_steps = 50;
  return c;
}

/// A small dating-advice style corpus in which titles and bodies share topic words.
inline Corpus counseling_corpus() {
  return make_corpus({
      make_post(0, "broke up today", "we broke up today after two years together",
                {{"lol", 10, 2}, {"i also had someone like that why did you break up", 8, 1},
                 {"look in the mirror", 3, 0}}),
      make_post(1, "first date tips", "what should i wear on a first date at a cafe",
                {{"wear something comfortable", 5, 0}, {"just be yourself", 4, 0}}),
      make_post(2, "confession advice", "should i confess to my friend before graduation",
                {{"go for it", 7, 1}, {"wait until after exams", 2, 2}}),
      make_post(3, "long distance relationship", "my partner moved abroad and we call every night",
                {{"it gets easier", 6, 0}, {"visit often", 1, 0}, {"trust matters most", 9, 3}}),
      make_post(4, "cafe recommendations", "looking for a quiet cafe near campus for a date",
                {{"try the one by the library", 3, 0}}),
      make_post(5, "exam stress and dating", "exams are close and my partner wants more time",
                {{"talk to them honestly", 4, 1}, {"exams first", 2, 0}}),
      make_post(6, "how to apologize", "i forgot our anniversary how do i apologize",
                {{"flowers and a sincere letter", 6, 0}, {"own the mistake", 5, 0}}),
      make_post(7, "met someone at the library", "we keep meeting at the library should i say hi",
                {{"say hi tomorrow", 8, 0}, {"ask about their book", 6, 1}}),
  });
}

/// Seeded synthetic corpus: each post draws most of its title and body words
/// from one topic, with a few shared filler words.
inline Corpus synthetic_corpus(std::size_t n_posts, std::uint64_t seed, std::size_t n_topics = 20,
                               std::size_t words_per_topic = 12) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  const std::vector<std::string> filler = {"the", "a", "today", "really", "so", "my", "and", "why"};
  auto topic_word = [&](std::size_t topic) {
    return "t" + std::to_string(topic) + "w" + std::to_string(pick(words_per_topic));
  };
  auto sentence = [&](std::size_t topic, std::size_t min_len, std::size_t max_len) {
    const std::size_t len = min_len + pick(max_len - min_len + 1);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) {
      if (!s.empty()) s += ' ';
      const auto roll = pick(10);
      if (roll < 7) {
        s += topic_word(topic);
      } else if (roll < 9) {
        s += filler[pick(filler.size())];
      } else {
        s += topic_word(pick(n_topics));
      }
    }
    return s;
  };

  std::vector<Post> posts;
  posts.reserve(n_posts);
  for (std::size_t i = 0; i < n_posts; ++i) {
    const std::size_t topic = pick(n_topics);
    std::vector<Comment> comments;
    const std::size_t n_comments = 1 + pick(4);
    for (std::size_t c = 0; c < n_comments; ++c) {
      comments.push_back({"reply " + std::to_string(i) + "." + std::to_string(c) + " " +
                              sentence(topic, 2, 6),
                          pick(20), pick(10)});
    }
    posts.push_back(make_post(i, sentence(topic, 3, 7), sentence(topic, 8, 25), std::move(comments)));
  }
  return make_corpus(std::move(posts));
}

}  // namespace stc::testing
