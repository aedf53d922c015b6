#pragma once

#include "heliosim/bigint.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace heliosim {

using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(std::span<const std::uint8_t> data);

std::string hex_lower(std::span<const std::uint8_t> bytes);

// Builds the length-prefixed canonical byte encoding used for digests and
// Fiat-Shamir transcripts: every field is framed as a 4-byte big-endian
// length followed by the field bytes. Integers are framed as their ASCII
// decimal digits; logical times as fixed-width 8-byte big-endian values.
class TranscriptBuilder {
public:
    TranscriptBuilder& add_bytes(std::span<const std::uint8_t> field);
    TranscriptBuilder& add_str(std::string_view field);
    TranscriptBuilder& add_dec(const BigInt& value);
    TranscriptBuilder& add_time(std::int64_t ticks); // fixed-width 8-byte BE

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    Sha256Digest digest() const;
    std::string hex_digest() const;

private:
    std::vector<std::uint8_t> bytes_;
};

} // namespace heliosim
