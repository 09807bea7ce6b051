#pragma once

// Paragraph vectors, PV-DBOW variant with negative sampling.
//
// Each document d owns a vector v_d; each vocabulary term t owns an output
// vector w_t. For every token position the model minimizes
//
//   -log s(v_d . w_t) - sum_{n in negatives} log s(-v_d . w_n)
//
// with negatives drawn from the unigram distribution raised to 0.75. Training
// is plain single-threaded SGD and is bit-reproducible for a given seed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "stc/corpus.hpp"
#include "stc/error.hpp"
#include "stc/hash.hpp"
#include "stc/matrix.hpp"
#include "stc/tokenizer.hpp"
#include "stc/vocabulary.hpp"

namespace stc {

struct PvConfig {
  std::uint32_t dim = 2000;
  // Kept for configuration compatibility with PV-DM; PV-DBOW has no context window.
  std::uint32_t window = 5;
  std::uint32_t negative_samples = 5;
  std::uint32_t epochs = 20;
  double initial_learning_rate = 0.025;
  std::uint32_t min_token_count = 1;
  std::uint32_t infer_steps = 50;
  std::uint64_t rng_seed = 1;

  void validate() const {
    if (dim < 2) throw Error(ErrorCode::InvalidConfig, "pv.dim must be >= 2");
    if (window == 0 || negative_samples == 0 || epochs == 0 || min_token_count == 0 ||
        infer_steps == 0) {
      throw Error(ErrorCode::InvalidConfig, "pv integer parameters must be positive");
    }
    if (!(initial_learning_rate > 0.0) || !std::isfinite(initial_learning_rate)) {
      throw Error(ErrorCode::InvalidConfig, "pv.initial_learning_rate must be positive");
    }
  }

  bool operator==(const PvConfig&) const = default;
};

struct TrainingReport {
  std::vector<double> per_epoch_mean_loss;
  std::uint64_t total_examples = 0;
  double wall_time_seconds = 0.0;
};

namespace pv {

inline constexpr double kUnigramPower = 0.75;
inline constexpr double kFinalLearningRateFraction = 0.01;

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(sigmoid(x)) without overflow.
inline double log_sigmoid(double x) {
  if (x >= 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

template <std::floating_point T>
double dot(std::span<const T> a, std::span<const T> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

/// Samples term ids with probability proportional to count^0.75.
class UnigramSampler {
 public:
  UnigramSampler() = default;
  explicit UnigramSampler(std::span<const std::uint64_t> counts) {
    cdf_.reserve(counts.size());
    double total = 0.0;
    for (std::uint64_t c : counts) {
      total += std::pow(static_cast<double>(c), kUnigramPower);
      cdf_.push_back(total);
    }
    if (total > 0.0) {
      for (double& x : cdf_) x /= total;
    }
  }

  TermId sample(std::mt19937_64& rng) const {
    const double u = uniform01(rng);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<TermId>(it - cdf_.begin());
  }

  double probability(TermId id) const { return id == 0 ? cdf_[0] : cdf_[id] - cdf_[id - 1]; }
  std::size_t size() const noexcept { return cdf_.size(); }

  bool operator==(const UnigramSampler&) const = default;

 private:
  std::vector<double> cdf_;
};

/// Per-example negative-sampling loss for one (document, positive term) pair.
template <std::floating_point T>
double negative_sampling_loss(std::span<const T> doc, const Matrix<T>& output, TermId positive,
                              std::span<const TermId> negatives) {
  double loss = -log_sigmoid(dot<T>(doc, output.row(positive)));
  for (TermId n : negatives) loss -= log_sigmoid(-dot<T>(doc, output.row(n)));
  return loss;
}

/// d(loss)/d(v . w_j) is sigmoid(v . w_j) - label.
template <std::floating_point T>
double score_gradient(std::span<const T> doc, std::span<const T> target, bool is_positive) {
  return sigmoid(dot<T>(doc, target)) - (is_positive ? 1.0 : 0.0);
}

/// Analytic gradient of negative_sampling_loss with respect to the document vector.
template <std::floating_point T>
void negative_sampling_doc_gradient(std::span<const T> doc, const Matrix<T>& output,
                                    TermId positive, std::span<const TermId> negatives,
                                    std::span<T> grad) {
  std::ranges::fill(grad, T{0});
  auto accumulate = [&](TermId id, bool is_positive) {
    const auto w = output.row(id);
    const double g = score_gradient<T>(doc, w, is_positive);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += static_cast<T>(g * w[i]);
  };
  accumulate(positive, true);
  for (TermId n : negatives) accumulate(n, false);
}

namespace detail {

template <std::floating_point T, bool UpdateOutput, typename Output>
double sgd_step_impl(std::span<T> doc, Output& output, TermId positive,
                     std::span<const TermId> negatives, double learning_rate,
                     std::span<T> scratch) {
  std::ranges::fill(scratch, T{0});
  double loss = 0.0;
  auto step = [&](TermId id, bool is_positive) {
    auto w = output.row(id);
    const double score = dot<T>(std::span<const T>(doc), std::span<const T>(w));
    loss -= is_positive ? log_sigmoid(score) : log_sigmoid(-score);
    const double g = sigmoid(score) - (is_positive ? 1.0 : 0.0);
    const T scaled = static_cast<T>(-learning_rate * g);
    for (std::size_t i = 0; i < doc.size(); ++i) scratch[i] += scaled * w[i];
    if constexpr (UpdateOutput) {
      for (std::size_t i = 0; i < doc.size(); ++i) w[i] += scaled * doc[i];
    }
  };
  step(positive, true);
  for (TermId n : negatives) step(n, false);
  for (std::size_t i = 0; i < doc.size(); ++i) doc[i] += scratch[i];
  return loss;
}

}  // namespace detail

/// One SGD step on a single example, updating the document vector and the
/// touched output vectors. `scratch` must have the model dimension. Returns
/// the loss before the update.
template <std::floating_point T>
double sgd_step(std::span<T> doc, Matrix<T>& output, TermId positive,
                std::span<const TermId> negatives, double learning_rate, std::span<T> scratch) {
  return detail::sgd_step_impl<T, true>(doc, output, positive, negatives, learning_rate, scratch);
}

/// As sgd_step, with output vectors frozen (query inference).
template <std::floating_point T>
double sgd_step_frozen(std::span<T> doc, const Matrix<T>& output, TermId positive,
                       std::span<const TermId> negatives, double learning_rate,
                       std::span<T> scratch) {
  return detail::sgd_step_impl<T, false>(doc, output, positive, negatives, learning_rate, scratch);
}

inline double learning_rate_at(double initial, std::uint64_t done, std::uint64_t total) {
  if (total == 0) return initial;
  const double progress = static_cast<double>(done) / static_cast<double>(total);
  return initial * (1.0 - (1.0 - kFinalLearningRateFraction) * progress);
}

template <std::floating_point T>
void init_uniform(std::span<T> values, std::uint32_t dim, std::mt19937_64& rng) {
  for (T& x : values) x = static_cast<T>((uniform01(rng) - 0.5) / static_cast<double>(dim));
}

}  // namespace pv

/// dot(a, b) / (na * nb) given precomputed norms; 0 when a norm is 0.
template <std::floating_point T>
double cosine_with_norms(std::span<const T> a, std::span<const T> b, double norm_a, double norm_b) {
  if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
  return std::clamp(pv::dot<T>(a, b) / (norm_a * norm_b), -1.0, 1.0);
}

template <std::floating_point T>
double l2_norm(std::span<const T> v) {
  return std::sqrt(pv::dot<T>(v, v));
}

template <std::floating_point T>
double cosine_dense(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  return cosine_with_norms<T>(a, b, l2_norm<T>(a), l2_norm<T>(b));
}

template <std::floating_point T>
double cosine_dense(const std::vector<T>& a, const std::vector<T>& b) {
  return cosine_dense<T>(std::span<const T>(a), std::span<const T>(b));
}

class PvModel {
 public:
  PvModel() = default;

  PvModel(PvConfig config, Vocabulary vocabulary, Matrix<float> doc_vectors,
          Matrix<float> word_output_vectors)
      : config_(std::move(config)),
        vocabulary_(std::move(vocabulary)),
        doc_vectors_(std::move(doc_vectors)),
        word_output_vectors_(std::move(word_output_vectors)),
        sampler_(vocabulary_.counts()) {
    doc_norms_.reserve(doc_vectors_.rows());
    for (std::size_t d = 0; d < doc_vectors_.rows(); ++d) {
      doc_norms_.push_back(l2_norm<float>(doc_vectors_.row(d)));
    }
  }

  const PvConfig& config() const noexcept { return config_; }
  std::uint32_t dim() const noexcept { return config_.dim; }
  const Vocabulary& vocabulary() const noexcept { return vocabulary_; }
  const Matrix<float>& doc_vectors() const noexcept { return doc_vectors_; }
  const Matrix<float>& word_output_vectors() const noexcept { return word_output_vectors_; }
  const pv::UnigramSampler& sampler() const noexcept { return sampler_; }
  std::span<const float> doc_vector(std::size_t ordinal) const { return doc_vectors_.row(ordinal); }
  double doc_norm(std::size_t ordinal) const { return doc_norms_[ordinal]; }

  bool operator==(const PvModel& other) const {
    return config_ == other.config_ && vocabulary_ == other.vocabulary_ &&
           doc_vectors_ == other.doc_vectors_ && word_output_vectors_ == other.word_output_vectors_;
  }

 private:
  PvConfig config_;
  Vocabulary vocabulary_;
  Matrix<float> doc_vectors_;
  Matrix<float> word_output_vectors_;
  pv::UnigramSampler sampler_;
  std::vector<double> doc_norms_;
};

/// Called with every per-example loss during training.
using LossObserver = std::function<void(double)>;

inline std::pair<PvModel, TrainingReport> train(const Corpus& corpus, TextField field,
                                                const PvConfig& config, const Tokenizer& tokenizer,
                                                const LossObserver& observer = {}) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();

  std::vector<TokenStream> docs;
  docs.reserve(corpus.size());
  Vocabulary all_terms;
  for (const auto& post : corpus.posts) {
    docs.push_back(tokenizer.tokenize(field_text(post, field)));
    for (const auto& t : docs.back()) all_terms.increment(all_terms.intern(t));
  }
  Vocabulary vocab;
  for (TermId t = 0; t < all_terms.size(); ++t) {
    if (all_terms.count(t) >= config.min_token_count) vocab.add(all_terms.term(t), all_terms.count(t));
  }

  std::vector<std::vector<TermId>> doc_ids(docs.size());
  std::uint64_t positions = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& t : docs[d]) {
      if (auto id = vocab.find(t)) doc_ids[d].push_back(*id);
    }
    positions += doc_ids[d].size();
  }
  if (corpus.posts.empty() || positions == 0) {
    throw Error(ErrorCode::EmptyTrainingCorpus,
                std::string("no trainable tokens in field '") + std::string(to_string(field)) + "'");
  }

  std::mt19937_64 rng(config.rng_seed);
  Matrix<float> doc_vectors(corpus.size(), config.dim);
  Matrix<float> output(vocab.size(), config.dim);
  pv::init_uniform(doc_vectors.data(), config.dim, rng);
  pv::init_uniform(output.data(), config.dim, rng);
  const pv::UnigramSampler sampler(vocab.counts());

  TrainingReport report;
  const std::uint64_t total_updates = positions * config.epochs;
  std::uint64_t done = 0;
  std::vector<float> scratch(config.dim);
  std::vector<TermId> negatives;
  negatives.reserve(config.negative_samples);

  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t d = 0; d < doc_ids.size(); ++d) {
      auto doc = doc_vectors.row(d);
      for (TermId positive : doc_ids[d]) {
        negatives.clear();
        for (std::uint32_t k = 0; k < config.negative_samples; ++k) {
          const TermId n = sampler.sample(rng);
          if (n != positive) negatives.push_back(n);
        }
        const double lr = pv::learning_rate_at(config.initial_learning_rate, done, total_updates);
        const double loss = pv::sgd_step<float>(doc, output, positive, negatives, lr, scratch);
        if (!std::isfinite(loss)) {
          throw Error(ErrorCode::NonFiniteLoss, "epoch " + std::to_string(epoch));
        }
        if (observer) observer(loss);
        epoch_loss += loss;
        ++done;
      }
    }
    report.per_epoch_mean_loss.push_back(epoch_loss / static_cast<double>(positions));
  }
  report.total_examples = done;
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  return {PvModel(config, std::move(vocab), std::move(doc_vectors), std::move(output)),
          std::move(report)};
}

inline std::pair<PvModel, TrainingReport> train(const Corpus& corpus, TextField field,
                                                const PvConfig& config, const TokenizerConfig& tok) {
  return train(corpus, field, config, RuleTokenizer(tok));
}

/// Seed for query inference, derived from the model seed and the query tokens.
inline std::uint64_t inference_seed(std::uint64_t model_seed, const TokenStream& tokens) {
  Fnv1a64 h;
  h.update_u64(model_seed);
  for (const auto& t : tokens) {
    h.update_u64(t.size());
    h.update(t);
  }
  return h.digest();
}

/// Fits a fresh document vector to `query_tokens` with output vectors frozen.
/// Deterministic for a given model and token sequence.
inline std::vector<float> infer_vector(const TokenStream& query_tokens, const PvModel& model) {
  std::vector<TermId> ids;
  for (const auto& t : query_tokens) {
    if (auto id = model.vocabulary().find(t)) ids.push_back(*id);
  }
  if (ids.empty()) throw Error(ErrorCode::EmptyQueryAfterOov, "no query token is in vocabulary");

  const PvConfig& config = model.config();
  std::mt19937_64 rng(inference_seed(config.rng_seed, query_tokens));
  std::vector<float> doc(config.dim);
  pv::init_uniform(std::span<float>(doc), config.dim, rng);

  std::vector<float> scratch(config.dim);
  std::vector<TermId> negatives;
  const std::uint64_t total = static_cast<std::uint64_t>(config.infer_steps) * ids.size();
  std::uint64_t done = 0;
  for (std::uint32_t step = 0; step < config.infer_steps; ++step) {
    for (TermId positive : ids) {
      negatives.clear();
      for (std::uint32_t k = 0; k < config.negative_samples; ++k) {
        const TermId n = model.sampler().sample(rng);
        if (n != positive) negatives.push_back(n);
      }
      const double lr = pv::learning_rate_at(config.initial_learning_rate, done, total);
      pv::sgd_step_frozen<float>(doc, model.word_output_vectors(), positive, negatives, lr,
                                 scratch);
      ++done;
    }
  }
  return doc;
}

}  // namespace stc
