#pragma once

#include "heliosim/bigint.hpp"
#include "heliosim/errors.hpp"
#include "heliosim/sha256.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace heliosim::crypto {

// Prime-order subgroup of Z_p^*: q | p-1, g generates the order-q subgroup.
struct GroupParams {
    BigInt p;
    BigInt q;
    BigInt g;

    // Throws std::invalid_argument when any type invariant fails.
    void validate() const;
    bool is_valid() const;

    // x is a subgroup element: 1 <= x < p and x^q = 1 (mod p).
    bool in_subgroup(const BigInt& x) const;

    bool operator==(const GroupParams&) const = default;

    // Pinned (23, 11, 2) group for unit tests and fast demo runs.
    static GroupParams tiny();
    // Pinned 64-bit safe-prime group; large enough that hash collisions in
    // proof challenges are not a practical concern in tests.
    static GroupParams test64();
    // Pinned 256-bit safe-prime group, the CLI default.
    static GroupParams default256();
};

// Deterministic safe-prime group generation: p = 2q + 1 with p, q prime and
// g a non-identity quadratic residue. Throws ParameterError when the search
// budget runs out.
GroupParams generate_group(unsigned bit_length, std::uint64_t seed);

struct KeyPair {
    BigInt sk; // administrator decryption key, 1 <= sk < q
    BigInt pk; // g^sk mod p
};

KeyPair keygen(const GroupParams& params, std::span<const std::uint8_t> seed);
KeyPair keypair_from_sk(const GroupParams& params, const BigInt& sk);

// Exponential-ElGamal ciphertext (g^r, pk^r * g^m); multiplying ciphertexts
// componentwise adds plaintexts, which is what makes the tally a product.
struct Ciphertext {
    BigInt a;
    BigInt b;

    bool operator==(const Ciphertext&) const = default;
};

// Two-branch proof that a ciphertext encrypts 0 or 1: a real transcript for
// the actual plaintext and a simulated one for the other branch, with the
// two sub-challenges summing to the Fiat-Shamir challenge mod q.
struct DisjunctiveProof {
    std::array<BigInt, 4> commitments; // A0, B0, A1, B1
    std::array<BigInt, 2> challenges;  // c0, c1
    std::array<BigInt, 2> responses;   // s0, s1

    bool operator==(const DisjunctiveProof&) const = default;
};

struct Ballot {
    Ciphertext ct;
    DisjunctiveProof proof;
    std::optional<std::int64_t> timestamp; // logical ticks, hashed into the challenge when present

    bool operator==(const Ballot&) const = default;
};

// Normative encoding: length-prefixed decimal fields in the order
// a, b, commitments[4], challenges[2], responses[2], then the timestamp
// (fixed-width 8-byte big-endian) when present.
std::vector<std::uint8_t> canonical_ballot_encoding(const Ballot& ballot);
// Lowercase-hex SHA-256 of the canonical encoding.
std::string ballot_digest(const Ballot& ballot);

// Fiat-Shamir challenge: SHA-256 of the framed transcript, with the
// timestamp appended as a fixed-width framed field when present, reduced
// mod q.
BigInt fs_challenge(std::span<const std::uint8_t> transcript,
                    std::optional<std::int64_t> timestamp, const BigInt& q);

// Encrypts m in {0,1} under pk with explicit randomness r in [0, q).
// Proof nonces are derived deterministically from the inputs, so equal
// inputs give bit-identical ballots. Throws std::invalid_argument when m is
// not a valid choice or r is out of range.
Ballot encrypt_choice(const GroupParams& params, const BigInt& pk, int m, const BigInt& r,
                      std::optional<std::int64_t> timestamp = std::nullopt);

// True iff both branch equations hold and the recomputed challenge (which
// covers the timestamp when present) matches the sub-challenge sum. Never
// throws; malformed input verifies false.
bool verify_ballot(const GroupParams& params, const BigInt& pk, const Ballot& ballot);

// Componentwise product mod p. Throws std::invalid_argument on an empty
// list or a component outside the subgroup.
Ciphertext homomorphic_combine(std::span<const Ciphertext> cts, const GroupParams& params);

// Recovers m with b * (a^sk)^-1 = g^m by scanning 0..max_count. Throws
// DecryptionError when no plaintext in range matches.
int decrypt_tally(const GroupParams& params, const KeyPair& kp, const Ciphertext& ct,
                  int max_count);

nlohmann::ordered_json ballot_to_json(const Ballot& ballot);
Ballot ballot_from_json(const nlohmann::json& j);
nlohmann::ordered_json group_to_json(const GroupParams& params);
GroupParams group_from_json(const nlohmann::json& j);

} // namespace heliosim::crypto
