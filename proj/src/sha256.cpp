#include "heliosim/sha256.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace heliosim {

Sha256Digest sha256(std::span<const std::uint8_t> data) {
    Sha256Digest out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != out.size()) {
        throw std::runtime_error("sha256: EVP_Digest failed");
    }
    return out;
}

std::string hex_lower(std::span<const std::uint8_t> bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

TranscriptBuilder& TranscriptBuilder::add_bytes(std::span<const std::uint8_t> field) {
    const auto n = static_cast<std::uint32_t>(field.size());
    bytes_.push_back(static_cast<std::uint8_t>(n >> 24));
    bytes_.push_back(static_cast<std::uint8_t>(n >> 16));
    bytes_.push_back(static_cast<std::uint8_t>(n >> 8));
    bytes_.push_back(static_cast<std::uint8_t>(n));
    bytes_.insert(bytes_.end(), field.begin(), field.end());
    return *this;
}

TranscriptBuilder& TranscriptBuilder::add_str(std::string_view field) {
    return add_bytes({reinterpret_cast<const std::uint8_t*>(field.data()), field.size()});
}

TranscriptBuilder& TranscriptBuilder::add_dec(const BigInt& value) {
    return add_str(value.str());
}

TranscriptBuilder& TranscriptBuilder::add_time(std::int64_t ticks) {
    std::array<std::uint8_t, 8> be{};
    auto u = static_cast<std::uint64_t>(ticks);
    for (int i = 7; i >= 0; --i) {
        be[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(u & 0xff);
        u >>= 8;
    }
    return add_bytes(be);
}

Sha256Digest TranscriptBuilder::digest() const { return sha256(bytes_); }

std::string TranscriptBuilder::hex_digest() const {
    auto d = digest();
    return hex_lower(d);
}

} // namespace heliosim
