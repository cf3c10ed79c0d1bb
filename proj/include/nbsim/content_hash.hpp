#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "nbsim/notebook.hpp"

namespace nbsim {

/// SHA-256 digest of a canonical serialization of one piece of content.
struct ContentHash {
    std::array<std::uint8_t, 32> bytes{};

    friend auto operator<=>(const ContentHash&, const ContentHash&) = default;

    std::string hex() const;
};

struct ContentHashHasher {
    std::size_t operator()(const ContentHash& h) const noexcept;
};

ContentHash sha256(std::string_view data);

ContentHash hash_code(std::string_view source);
/// Covers column names and values; the table's own name is not content.
ContentHash hash_table(const TableData& table);
ContentHash hash_output(OutputKind kind);

}  // namespace nbsim
