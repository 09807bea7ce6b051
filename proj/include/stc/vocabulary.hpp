#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stc {

using TermId = std::uint32_t;

/// Dense term ids in order of first appearance. `counts` is the document
/// frequency for TF-IDF vocabularies and the corpus frequency for
/// paragraph-vector vocabularies.
class Vocabulary {
 public:
  /// Returns the id for `term`, adding it with count 0 if new.
  TermId intern(std::string_view term) {
    auto [it, inserted] = ids_.try_emplace(std::string(term), static_cast<TermId>(terms_.size()));
    if (inserted) {
      terms_.emplace_back(term);
      counts_.push_back(0);
    }
    return it->second;
  }

  void add(std::string term, std::uint64_t count) {
    const TermId id = intern(term);
    counts_[id] = count;
  }

  std::optional<TermId> find(std::string_view term) const {
    // C++20 heterogeneous lookup needs a transparent hash; short keys make the copy cheap.
    auto it = ids_.find(std::string(term));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  void increment(TermId id, std::uint64_t by = 1) { counts_[id] += by; }

  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  const std::string& term(TermId id) const { return terms_[id]; }
  std::uint64_t count(TermId id) const { return counts_[id]; }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

  bool operator==(const Vocabulary& other) const {
    return terms_ == other.terms_ && counts_ == other.counts_;
  }

 private:
  std::unordered_map<std::string, TermId> ids_;
  std::vector<std::string> terms_;
  std::vector<std::uint64_t> counts_;
};

}  // namespace stc
