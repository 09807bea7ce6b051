#pragma once

// The offline artifact: filtered corpus, title and body TF-IDF indexes and
// the title paragraph-vector model, plus the manifest describing how it was built.

#include <cstdint>
#include <string>
#include <utility>

#include "stc/corpus.hpp"
#include "stc/hash.hpp"
#include "stc/paragraph_vectors.hpp"
#include "stc/pipeline_config.hpp"
#include "stc/tfidf.hpp"
#include "stc/tokenizer.hpp"

namespace stc {

inline constexpr std::uint32_t kBundleFormatVersion = 1;
inline constexpr std::string_view kPvVariant = "PV-DBOW";
inline constexpr std::string_view kTfIdfScheme = "tf=raw-count;idf=ln(N/df);l2-normalized";

struct ManifestCounts {
  std::uint64_t n_posts = 0;
  std::uint64_t title_vocab = 0;
  std::uint64_t body_vocab = 0;
  std::uint64_t pv_dim = 0;
  std::uint64_t pv_vocab = 0;

  bool operator==(const ManifestCounts&) const = default;
};

struct ManifestHeader {
  std::uint32_t format_version = kBundleFormatVersion;
  std::uint64_t corpus_hash = 0;
  std::string pv_variant = std::string(kPvVariant);
  std::string tfidf_scheme = std::string(kTfIdfScheme);
  TokenizerConfig tokenizer;
  PvConfig pv;
  PipelineConfig pipeline_defaults;
  ManifestCounts counts;

  bool operator==(const ManifestHeader&) const = default;
};

struct IndexBundle {
  ManifestHeader manifest;
  Corpus corpus;
  TfIdfIndex tfidf_title;
  TfIdfIndex tfidf_body;
  PvModel pv_title;

  const TfIdfIndex& tfidf(TextField field) const {
    return field == TextField::Title ? tfidf_title : tfidf_body;
  }

  bool operator==(const IndexBundle&) const = default;
};

/// Content hash over every post field, independent of the file encoding.
inline std::uint64_t corpus_hash(const Corpus& corpus) {
  Fnv1a64 h;
  auto str = [&](const std::string& s) {
    h.update_u64(s.size());
    h.update(s);
  };
  h.update_u64(corpus.posts.size());
  for (const auto& p : corpus.posts) {
    str(p.id);
    str(p.title);
    str(p.body);
    str(p.created_at);
    h.update_u64(p.comments.size());
    for (const auto& c : p.comments) {
      str(c.text);
      h.update_u64(c.likes);
      h.update_u64(c.dislikes);
    }
  }
  return h.digest();
}

inline ManifestCounts count_payload(const IndexBundle& b) {
  return {b.corpus.size(), b.tfidf_title.vocabulary().size(), b.tfidf_body.vocabulary().size(),
          b.pv_title.dim(), b.pv_title.vocabulary().size()};
}

/// Runs the offline stages: both TF-IDF indexes and the title PV model.
inline std::pair<IndexBundle, TrainingReport> build_bundle(Corpus corpus,
                                                           const TokenizerConfig& tok,
                                                           const PvConfig& pv,
                                                           const PipelineConfig& pipeline,
                                                           const LossObserver& observer = {}) {
  pipeline.validate();
  pv.validate();
  const RuleTokenizer tokenizer(tok);
  IndexBundle bundle;
  bundle.tfidf_title = build_index(corpus, TextField::Title, tokenizer);
  bundle.tfidf_body = build_index(corpus, TextField::Body, tokenizer);
  auto [model, report] = train(corpus, TextField::Title, pv, tokenizer, observer);
  bundle.pv_title = std::move(model);
  bundle.corpus = std::move(corpus);

  bundle.manifest.corpus_hash = corpus_hash(bundle.corpus);
  bundle.manifest.tokenizer = tok;
  bundle.manifest.pv = pv;
  bundle.manifest.pipeline_defaults = pipeline;
  bundle.manifest.counts = count_payload(bundle);
  return {std::move(bundle), std::move(report)};
}

}  // namespace stc
