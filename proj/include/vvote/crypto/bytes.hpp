#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vvote {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);  // throws Error(Decode)

std::string to_base64(ByteView data);
Bytes from_base64(std::string_view text);  // throws Error(Format)

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

void append_u64_be(Bytes& out, std::uint64_t v);
std::uint64_t read_u64_be(const std::uint8_t* p);

}  // namespace vvote
