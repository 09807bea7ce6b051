#pragma once

#include <cstdint>
#include <optional>

#include "stc/corpus.hpp"
#include "stc/error.hpp"

namespace stc {

struct PipelineConfig {
  std::uint32_t retrieve_k = 200;
  std::uint32_t match_m = 5;
  std::uint32_t comments_per_post = 2;
  TextField match_field = TextField::Body;
  std::optional<std::uint64_t> response_seed;

  void validate() const {
    if (retrieve_k == 0 || match_m == 0 || comments_per_post == 0) {
      throw Error(ErrorCode::InvalidConfig, "pipeline sizes must be positive");
    }
    if (match_m > retrieve_k) {
      throw Error(ErrorCode::InvalidConfig, "pipeline.match_m must not exceed retrieve_k");
    }
  }

  bool operator==(const PipelineConfig&) const = default;
};

}  // namespace stc
