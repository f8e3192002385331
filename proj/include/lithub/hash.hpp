#pragma once
#include <cstdint>
#include <string_view>

namespace lithub {

// 64-bit FNV-1a, used for content hashes and model fingerprints.
class Fnv1a {
 public:
  Fnv1a& add(std::string_view bytes) noexcept {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  Fnv1a& sep() noexcept { return add(std::string_view("\x1f", 1)); }
  std::uint64_t value() const noexcept { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace lithub
