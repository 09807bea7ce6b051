#pragma once

// Sparse TF-IDF vectors over one text field of the corpus.
//
// Weighting: tf = raw term count, idf = ln(N / df), no smoothing. Document
// vectors are L2-normalized and zero weights are pruned.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "stc/corpus.hpp"
#include "stc/error.hpp"
#include "stc/tokenizer.hpp"
#include "stc/vocabulary.hpp"

namespace stc {

struct SparseEntry {
  TermId id = 0;
  double weight = 0.0;

  bool operator==(const SparseEntry&) const = default;
};

/// Entries sorted by strictly increasing term id, no zero weights.
struct SparseVector {
  std::vector<SparseEntry> entries;

  bool empty() const noexcept { return entries.empty(); }
  std::size_t size() const noexcept { return entries.size(); }

  double squared_norm() const noexcept {
    double s = 0.0;
    for (const auto& e : entries) s += e.weight * e.weight;
    return s;
  }

  /// Builds a vector from (id, weight) pairs in any order; zero weights dropped.
  static SparseVector from_map(const std::map<TermId, double>& weights) {
    SparseVector v;
    v.entries.reserve(weights.size());
    for (const auto& [id, w] : weights) {
      if (w != 0.0) v.entries.push_back({id, w});
    }
    return v;
  }

  void normalize() noexcept {
    const double norm = std::sqrt(squared_norm());
    if (norm == 0.0) {
      entries.clear();
      return;
    }
    for (auto& e : entries) e.weight /= norm;
  }

  bool operator==(const SparseVector&) const = default;
};

/// dot(a, b) / (|a| |b|), clamped to [-1, 1]. Zero when either side is empty
/// or has zero norm.
inline double cosine_sparse(const SparseVector& a, const SparseVector& b) noexcept {
  if (a.empty() || b.empty()) return 0.0;
  double dot = 0.0;
  auto ia = a.entries.begin();
  auto ib = b.entries.begin();
  while (ia != a.entries.end() && ib != b.entries.end()) {
    if (ia->id < ib->id) {
      ++ia;
    } else if (ib->id < ia->id) {
      ++ib;
    } else {
      dot += ia->weight * ib->weight;
      ++ia;
      ++ib;
    }
  }
  const double na = std::sqrt(a.squared_norm());
  const double nb = std::sqrt(b.squared_norm());
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

class TfIdfIndex {
 public:
  TfIdfIndex() = default;

  /// Assembles an index from its persisted parts; the idf table is derived.
  TfIdfIndex(TextField field, Vocabulary vocabulary, std::vector<SparseVector> doc_vectors)
      : field_(field), vocabulary_(std::move(vocabulary)), doc_vectors_(std::move(doc_vectors)) {
    const auto n = static_cast<double>(doc_vectors_.size());
    idf_.reserve(vocabulary_.size());
    for (std::uint64_t df : vocabulary_.counts()) {
      idf_.push_back(df == 0 ? 0.0 : std::log(n / static_cast<double>(df)));
    }
  }

  TextField field() const noexcept { return field_; }
  const Vocabulary& vocabulary() const noexcept { return vocabulary_; }
  std::uint64_t document_frequency(TermId id) const { return vocabulary_.count(id); }
  double idf(TermId id) const { return idf_[id]; }
  std::size_t n_docs() const noexcept { return doc_vectors_.size(); }
  const SparseVector& doc_vector(std::size_t ordinal) const { return doc_vectors_[ordinal]; }
  const std::vector<SparseVector>& doc_vectors() const noexcept { return doc_vectors_; }

  bool operator==(const TfIdfIndex& other) const {
    return field_ == other.field_ && vocabulary_ == other.vocabulary_ &&
           doc_vectors_ == other.doc_vectors_;
  }

 private:
  TextField field_ = TextField::Title;
  Vocabulary vocabulary_;
  std::vector<double> idf_;
  std::vector<SparseVector> doc_vectors_;
};

inline TfIdfIndex build_index(const Corpus& corpus, TextField field, const Tokenizer& tokenizer) {
  if (corpus.posts.empty()) throw Error(ErrorCode::EmptyFieldCorpus, "corpus is empty");

  Vocabulary vocab;
  std::vector<std::map<TermId, double>> term_counts(corpus.size());
  bool any_tokens = false;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const TokenStream tokens = tokenizer.tokenize(field_text(corpus.posts[d], field));
    any_tokens = any_tokens || !tokens.empty();
    auto& counts = term_counts[d];
    for (const auto& token : tokens) counts[vocab.intern(token)] += 1.0;
    for (const auto& entry : counts) vocab.increment(entry.first);
  }
  if (!any_tokens) {
    throw Error(ErrorCode::EmptyFieldCorpus,
                std::string("no document has tokens in field '") + std::string(to_string(field)) + "'");
  }

  // idf depends only on df and N; compute once and weight each document.
  const auto n = static_cast<double>(corpus.size());
  std::vector<double> idf(vocab.size());
  for (TermId t = 0; t < vocab.size(); ++t) idf[t] = std::log(n / static_cast<double>(vocab.count(t)));

  std::vector<SparseVector> vectors;
  vectors.reserve(corpus.size());
  for (auto& counts : term_counts) {
    for (auto& [id, w] : counts) w *= idf[id];
    SparseVector v = SparseVector::from_map(counts);
    v.normalize();
    vectors.push_back(std::move(v));
  }
  return TfIdfIndex(field, std::move(vocab), std::move(vectors));
}

inline TfIdfIndex build_index(const Corpus& corpus, TextField field, const TokenizerConfig& tok) {
  return build_index(corpus, field, RuleTokenizer(tok));
}

/// Out-of-vocabulary tokens are ignored. Returns the empty vector when
/// nothing with non-zero weight remains.
inline SparseVector embed_query(const TokenStream& query_tokens, const TfIdfIndex& index) {
  std::map<TermId, double> counts;
  for (const auto& token : query_tokens) {
    if (auto id = index.vocabulary().find(token)) counts[*id] += 1.0;
  }
  for (auto& [id, w] : counts) w *= index.idf(id);
  SparseVector v = SparseVector::from_map(counts);
  v.normalize();
  return v;
}

}  // namespace stc
