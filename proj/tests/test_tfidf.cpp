#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "stc/tfidf.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using Catch::Matchers::WithinAbs;
using stc::SparseVector;
using stc::TextField;

namespace {

SparseVector sv(std::vector<stc::SparseEntry> e) { return SparseVector{std::move(e)}; }

std::vector<double> dense_of(const SparseVector& v, std::size_t dim) {
  std::vector<double> out(dim, 0.0);
  for (const auto& e : v.entries) out[e.id] = e.weight;
  return out;
}

}  // namespace

TEST_CASE("document frequency and idf on the three-document fixture", "[tfidf]") {
  const auto index = stc::build_index(stc::testing::three_doc_corpus(), TextField::Body, stc::TokenizerConfig{});
  const auto& vocab = index.vocabulary();
  REQUIRE(vocab.size() == 3);
  const auto a = *vocab.find("a");
  const auto b = *vocab.find("b");
  const auto c = *vocab.find("c");
  CHECK(index.document_frequency(a) == 1);
  CHECK(index.document_frequency(b) == 2);
  CHECK(index.document_frequency(c) == 2);
  CHECK_THAT(index.idf(a), WithinAbs(std::log(3.0), 1e-12));
  CHECK_THAT(index.idf(b), WithinAbs(std::log(1.5), 1e-12));
  CHECK_THAT(index.idf(c), WithinAbs(std::log(1.5), 1e-12));

  // "c c": a single term, so unit weight.
  const auto& d2 = index.doc_vector(2);
  REQUIRE(d2.size() == 1);
  CHECK_THAT(d2.entries[0].weight, WithinAbs(1.0, 1e-12));
}

TEST_CASE("query embedding", "[tfidf]") {
  const auto index = stc::build_index(stc::testing::three_doc_corpus(), TextField::Body, stc::TokenizerConfig{});
  const auto q = stc::embed_query(stc::TokenStream{{"b", "b"}}, index);
  REQUIRE(q.size() == 1);
  CHECK(q.entries[0].id == *index.vocabulary().find("b"));
  CHECK_THAT(q.entries[0].weight, WithinAbs(1.0, 1e-12));

  CHECK(stc::embed_query(stc::TokenStream{{"zzz", "qqq"}}, index).empty());
  CHECK(stc::embed_query(stc::TokenStream{}, index).empty());
  for (std::size_t d = 0; d < index.n_docs(); ++d) {
    CHECK(stc::cosine_sparse(SparseVector{}, index.doc_vector(d)) == 0.0);
  }
}

TEST_CASE("a term in every document carries no weight", "[tfidf]") {
  using stc::testing::make_corpus;
  using stc::testing::make_post;
  const auto one = make_corpus({make_post(0, "t", "hello world hello", {{"c", 0, 0}})});
  const auto index = stc::build_index(one, TextField::Body, stc::TokenizerConfig{});
  CHECK(index.vocabulary().size() == 2);
  CHECK(index.doc_vector(0).empty());
  CHECK(stc::embed_query(stc::TokenStream{{"hello"}}, index).empty());

  // An empty document gets an empty vector but does not stop the build.
  const auto mixed = make_corpus({make_post(0, "t", "...", {{"c", 0, 0}}), make_post(1, "t", "x y", {{"c", 0, 0}})});
  const auto idx2 = stc::build_index(mixed, TextField::Body, stc::TokenizerConfig{});
  CHECK(idx2.doc_vector(0).empty());
  CHECK_FALSE(idx2.doc_vector(1).empty());

  const auto blank = make_corpus({make_post(0, "t", "?!", {{"c", 0, 0}})});
  try {
    stc::build_index(blank, TextField::Body, stc::TokenizerConfig{});
    FAIL("expected EmptyFieldCorpus");
  } catch (const stc::Error& e) {
    CHECK(e.code() == stc::ErrorCode::EmptyFieldCorpus);
  }
}

TEST_CASE("sparse cosine examples", "[tfidf]") {
  const auto x = sv({{0, 1.0}});
  const auto y = sv({{1, 1.0}});
  const auto xy = sv({{0, 1.0}, {1, 1.0}});
  CHECK_THAT(stc::cosine_sparse(x, x), WithinAbs(1.0, 1e-12));
  CHECK(stc::cosine_sparse(x, y) == 0.0);
  CHECK_THAT(stc::cosine_sparse(x, xy), WithinAbs(1.0 / std::sqrt(2.0), 1e-12));
  CHECK(stc::cosine_sparse(x, SparseVector{}) == 0.0);
}

TEST_CASE("sparse cosine properties", "[tfidf][property]") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> weight(-5.0, 5.0);
  auto random_vec = [&] {
    std::map<stc::TermId, double> m;
    const auto n = rng() % 8;
    for (std::size_t i = 0; i < n; ++i) m[static_cast<stc::TermId>(rng() % 12)] = weight(rng);
    return SparseVector::from_map(m);
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = random_vec();
    const auto b = random_vec();
    const double ab = stc::cosine_sparse(a, b);
    REQUIRE(ab >= -1.0);
    REQUIRE(ab <= 1.0);
    REQUIRE_THAT(ab, WithinAbs(stc::cosine_sparse(b, a), 1e-15));
    REQUIRE_THAT(ab, WithinAbs(stc::oracle::dense_cosine(dense_of(a, 12), dense_of(b, 12)), 1e-12));

    auto scaled = a;
    const double s = 0.1 + std::abs(weight(rng));
    for (auto& e : scaled.entries) e.weight *= s;
    REQUIRE_THAT(stc::cosine_sparse(scaled, b), WithinAbs(ab, 1e-12));
  }
}

TEST_CASE("idf decreases as document frequency grows", "[tfidf][property]") {
  const auto corpus = stc::testing::synthetic_corpus(60, 5);
  const auto index = stc::build_index(corpus, TextField::Body, stc::TokenizerConfig{});
  const auto& vocab = index.vocabulary();
  for (stc::TermId i = 0; i < vocab.size(); ++i) {
    REQUIRE(index.idf(i) >= 0.0);
    for (stc::TermId j = 0; j < vocab.size(); ++j) {
      if (index.document_frequency(i) < index.document_frequency(j)) REQUIRE(index.idf(i) > index.idf(j));
    }
  }
}

TEST_CASE("index agrees with a dense recomputation", "[tfidf][oracle]") {
  const stc::TokenizerConfig tok;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto corpus = stc::testing::synthetic_corpus(10 + seed * 2, seed);
    for (auto field : {TextField::Title, TextField::Body}) {
      const auto index = stc::build_index(corpus, field, tok);
      std::vector<std::vector<std::string>> docs;
      for (const auto& p : corpus.posts) docs.push_back(stc::oracle::token_list(stc::field_text(p, field), tok));
      const auto dense = stc::oracle::dense_tfidf(docs);
      REQUIRE(dense.index.size() == index.vocabulary().size());

      for (const auto& [term, col] : dense.index) {
        const auto id = index.vocabulary().find(term);
        REQUIRE(id.has_value());
        REQUIRE(*id == col);  // first appearance order on both sides
        REQUIRE_THAT(index.idf(*id), WithinAbs(dense.idf[col], 1e-12));
      }
      for (std::size_t d = 0; d < corpus.size(); ++d) {
        const auto row = dense_of(index.doc_vector(d), dense.index.size());
        for (std::size_t j = 0; j < row.size(); ++j) REQUIRE_THAT(row[j], WithinAbs(dense.docs[d][j], 1e-9));
      }

      // query cosines
      const auto query = corpus.posts[seed % corpus.size()].title + " unknownword";
      const auto q = stc::embed_query(stc::tokenize(query, tok), index);
      const auto dq = stc::oracle::dense_query(dense, stc::oracle::token_list(query, tok));
      for (std::size_t d = 0; d < corpus.size(); ++d) {
        REQUIRE_THAT(stc::cosine_sparse(q, index.doc_vector(d)),
                     WithinAbs(stc::oracle::dense_cosine(dq, dense.docs[d]), 1e-9));
      }
    }
  }
}
