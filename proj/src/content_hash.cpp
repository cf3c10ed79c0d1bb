#include "nbsim/content_hash.hpp"

#include <openssl/sha.h>

#include <cstring>

namespace nbsim {
namespace {

void append_field(std::string& out, std::string_view field) {
    out += std::to_string(field.size());
    out.push_back(':');
    out.append(field);
}

}  // namespace

std::string ContentHash::hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

std::size_t ContentHashHasher::operator()(const ContentHash& h) const noexcept {
    std::size_t v;
    std::memcpy(&v, h.bytes.data(), sizeof(v));
    return v;
}

ContentHash sha256(std::string_view data) {
    ContentHash h;
    SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), h.bytes.data());
    return h;
}

ContentHash hash_code(std::string_view source) {
    std::string buf = "code\n";
    append_field(buf, source);
    return sha256(buf);
}

ContentHash hash_table(const TableData& table) {
    std::string buf = "table\n";
    buf += std::to_string(table.columns.size());
    for (const auto& col : table.columns) {
        buf.push_back('\n');
        append_field(buf, col.name);
        buf.push_back('|');
        buf += std::to_string(col.values.size());
        for (const auto& v : col.values) {
            buf.push_back('|');
            append_field(buf, v);
        }
    }
    return sha256(buf);
}

ContentHash hash_output(OutputKind kind) {
    std::string buf = "output\n";
    buf.append(to_string(kind));
    return sha256(buf);
}

}  // namespace nbsim
