#include "heliosim/rng.hpp"

#include <cstring>
#include <stdexcept>

namespace heliosim {

namespace {

Sha256Digest key_from(std::uint64_t seed, std::string_view label) {
    TranscriptBuilder t;
    t.add_str("heliosim/drbg/v1");
    t.add_time(static_cast<std::int64_t>(seed));
    t.add_str(label);
    return t.digest();
}

} // namespace

Drbg::Drbg(std::uint64_t seed, std::string_view label) : key_(key_from(seed, label)) {}

Drbg::Drbg(std::span<const std::uint8_t> seed_material) {
    TranscriptBuilder t;
    t.add_str("heliosim/drbg/raw/v1");
    t.add_bytes(seed_material);
    key_ = t.digest();
}

Drbg Drbg::derive(std::string_view label) const {
    TranscriptBuilder t;
    t.add_str("heliosim/drbg/derive/v1");
    t.add_bytes(key_);
    t.add_str(label);
    Drbg child(t.bytes());
    return child;
}

void Drbg::refill() {
    TranscriptBuilder t;
    t.add_bytes(key_);
    t.add_time(static_cast<std::int64_t>(counter_++));
    block_ = t.digest();
    block_used_ = 0;
}

void Drbg::fill(std::span<std::uint8_t> out) {
    for (auto& b : out) {
        if (block_used_ == block_.size()) refill();
        b = block_[block_used_++];
    }
}

std::vector<std::uint8_t> Drbg::bytes(std::size_t n) {
    std::vector<std::uint8_t> out(n);
    fill(out);
    return out;
}

std::uint64_t Drbg::u64() {
    std::array<std::uint8_t, 8> b{};
    fill(b);
    std::uint64_t v = 0;
    for (auto x : b) v = (v << 8) | x;
    return v;
}

BigInt Drbg::below(const BigInt& n) {
    if (n < 1) throw std::invalid_argument("Drbg::below: n must be >= 1");
    if (n == 1) return 0;
    const std::size_t bits = msb(n) + 1; // msb is 0-based
    const std::size_t nbytes = (bits + 7) / 8;
    const unsigned top_keep = bits % 8 == 0 ? 8 : bits % 8;
    const std::uint8_t mask = static_cast<std::uint8_t>(0xffu >> (8 - top_keep));
    // Rejection sampling keeps the draw uniform.
    for (;;) {
        auto raw = bytes(nbytes);
        raw[0] &= mask;
        BigInt v = 0;
        for (auto b : raw) v = (v << 8) | b;
        if (v < n) return v;
    }
}

BigInt Drbg::scalar(const BigInt& q) {
    if (q < 2) throw std::invalid_argument("Drbg::scalar: q must be >= 2");
    return below(q - 1) + 1;
}

std::uint64_t Drbg::range(std::uint64_t lo, std::uint64_t hi) {
    if (lo > hi) throw std::invalid_argument("Drbg::range: lo > hi");
    const BigInt span = BigInt(hi) - lo + 1;
    return lo + below(span).convert_to<std::uint64_t>();
}

} // namespace heliosim
