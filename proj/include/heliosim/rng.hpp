#pragma once

#include "heliosim/bigint.hpp"
#include "heliosim/sha256.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace heliosim {

// Deterministic byte stream: SHA-256 in counter mode over a 32-byte key.
// Every source of randomness in the simulator is one of these, so a run is
// a pure function of its seed. Not a CSPRNG for production use; the model
// only needs reproducibility and uniformity.
class Drbg {
public:
    Drbg(std::uint64_t seed, std::string_view label);
    explicit Drbg(std::span<const std::uint8_t> seed_material);

    // Independent child stream; the parent is unaffected.
    Drbg derive(std::string_view label) const;

    void fill(std::span<std::uint8_t> out);
    std::vector<std::uint8_t> bytes(std::size_t n);
    std::uint64_t u64();

    // Uniform in [0, n), n >= 1, by rejection sampling.
    BigInt below(const BigInt& n);
    // Uniform in [1, q), the scalar domain of a prime-order group.
    BigInt scalar(const BigInt& q);
    // Uniform in [lo, hi] for small control decisions.
    std::uint64_t range(std::uint64_t lo, std::uint64_t hi);

private:
    Sha256Digest key_{};
    std::uint64_t counter_ = 0;
    std::array<std::uint8_t, 32> block_{};
    std::size_t block_used_ = 32; // forces refill on first use

    void refill();
};

} // namespace heliosim
