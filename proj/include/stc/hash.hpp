#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace stc {

// 64-bit FNV-1a. Stable across platforms, used for content hashes and seeds.
class Fnv1a64 {
 public:
  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  constexpr Fnv1a64() = default;
  constexpr explicit Fnv1a64(std::uint64_t state) : state_(state) {}

  constexpr Fnv1a64& update(std::string_view bytes) noexcept {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= kPrime;
    }
    return *this;
  }

  Fnv1a64& update(std::span<const std::uint8_t> bytes) noexcept {
    for (std::uint8_t c : bytes) {
      state_ ^= c;
      state_ *= kPrime;
    }
    return *this;
  }

  constexpr Fnv1a64& update_u64(std::uint64_t v) noexcept {
    for (int i = 0; i < 8; ++i) {
      state_ ^= static_cast<std::uint8_t>(v >> (8 * i));
      state_ *= kPrime;
    }
    return *this;
  }

  constexpr std::uint64_t digest() const noexcept { return state_; }

 private:
  std::uint64_t state_ = kOffset;
};

}  // namespace stc
