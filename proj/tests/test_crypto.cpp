#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "heliosim/crypto.hpp"
#include "heliosim/rng.hpp"
#include "support/oracles.hpp"

#include <array>
#include <vector>

using namespace heliosim;
using namespace heliosim::crypto;
using heliosim::testsupport::naive_mod_pow;
using heliosim::testsupport::recount;

namespace {
const GroupParams kTiny = GroupParams::tiny();

Ballot honest_ballot(const GroupParams& g, const BigInt& pk, int m, std::uint64_t salt,
                     std::optional<std::int64_t> ts = std::nullopt) {
    Drbg rng(salt, "test-ballot");
    return encrypt_choice(g, pk, m, rng.below(g.q), ts);
}
} // namespace

TEST_CASE("group validation accepts the pinned tiny group") {
    CHECK(kTiny.is_valid());
    // Independent oracle: 2^11 mod 23 = 1 by repeated multiplication.
    CHECK(naive_mod_pow(2, 11, 23) == 1);
}

TEST_CASE("group validation rejects bad parameters") {
    CHECK_THROWS_AS((GroupParams{23, 11, 1}.validate()), std::invalid_argument);  // g = 1
    CHECK_THROWS_AS((GroupParams{24, 11, 2}.validate()), std::invalid_argument);  // p composite
    CHECK_THROWS_AS((GroupParams{23, 12, 2}.validate()), std::invalid_argument);  // q composite
    CHECK_THROWS_AS((GroupParams{23, 11, 23}.validate()), std::invalid_argument); // g out of range
    CHECK_THROWS_AS((GroupParams{29, 11, 2}.validate()), std::invalid_argument);  // q !| p-1
}

TEST_CASE("pinned production groups satisfy the invariants") {
    CHECK(GroupParams::test64().is_valid());
    CHECK(GroupParams::default256().is_valid());
    CHECK(msb(GroupParams::default256().p) + 1 == 256);
}

TEST_CASE("generate_group finds valid safe-prime groups deterministically") {
    for (unsigned bits : {16u, 24u, 32u}) {
        const auto g1 = generate_group(bits, 42);
        CHECK(g1.is_valid());
        CHECK(g1.p == 2 * g1.q + 1);
        CHECK(msb(g1.p) + 1 == bits);
        const auto g2 = generate_group(bits, 42);
        CHECK(g1 == g2);
        CHECK(generate_group(bits, 43).p != g1.p);
    }
    CHECK_THROWS_AS(generate_group(8, 1), std::invalid_argument);
}

TEST_CASE("keygen matches the fixed vectors") {
    const auto kp3 = keypair_from_sk(kTiny, 3);
    CHECK(kp3.pk == 8);
    CHECK(kp3.pk == naive_mod_pow(2, 3, 23));
    const auto kp1 = keypair_from_sk(kTiny, 1);
    CHECK(kp1.pk == kTiny.g);
    CHECK_THROWS_AS(keypair_from_sk(kTiny, 0), std::invalid_argument);
    CHECK_THROWS_AS(keypair_from_sk(kTiny, 11), std::invalid_argument);

    const std::vector<std::uint8_t> seed{1, 2, 3};
    const auto a = keygen(kTiny, seed);
    const auto b = keygen(kTiny, seed);
    CHECK(a.sk == b.sk);
    CHECK(a.pk == b.pk);
    CHECK(a.pk == mod_pow(kTiny.g, a.sk, kTiny.p));
}

TEST_CASE("encrypt_choice matches the fixed vectors") {
    const auto kp = keypair_from_sk(kTiny, 3); // pk = 8
    const auto b0 = encrypt_choice(kTiny, kp.pk, 0, 4);
    CHECK(b0.ct.a == 16);
    CHECK(b0.ct.b == 2);
    CHECK(b0.ct.a == naive_mod_pow(2, 4, 23));
    CHECK(b0.ct.b == naive_mod_pow(8, 4, 23));

    const auto zero_r = encrypt_choice(kTiny, kp.pk, 0, 0);
    CHECK(zero_r.ct.a == 1);
    CHECK(zero_r.ct.b == 1);

    CHECK_THROWS_AS(encrypt_choice(kTiny, kp.pk, 2, 4), std::invalid_argument);
    CHECK_THROWS_AS(encrypt_choice(kTiny, kp.pk, -1, 4), std::invalid_argument);
    CHECK_THROWS_AS(encrypt_choice(kTiny, kp.pk, 0, 11), std::invalid_argument);
}

TEST_CASE("proof completeness: every honest ballot verifies") {
    const auto kp = keypair_from_sk(kTiny, 7);
    for (int m : {0, 1}) {
        for (BigInt r = 0; r < kTiny.q; ++r) {
            const auto ballot = encrypt_choice(kTiny, kp.pk, m, r);
            CAPTURE(m);
            CHECK(verify_ballot(kTiny, kp.pk, ballot));
        }
    }
    // and with timestamps bound in
    const auto ts_ballot = encrypt_choice(kTiny, kp.pk, 1, 5, 42);
    CHECK(verify_ballot(kTiny, kp.pk, ts_ballot));
}

TEST_CASE("all group-element outputs lie in the order-q subgroup") {
    const auto kp = keypair_from_sk(kTiny, 5);
    CHECK(kTiny.in_subgroup(kp.pk));
    for (int m : {0, 1}) {
        const auto ballot = honest_ballot(kTiny, kp.pk, m, 17);
        CHECK(kTiny.in_subgroup(ballot.ct.a));
        CHECK(kTiny.in_subgroup(ballot.ct.b));
        for (const auto& c : ballot.proof.commitments) CHECK(kTiny.in_subgroup(c));
    }
}

TEST_CASE("roundtrip: decrypt of a single encryption recovers the choice") {
    const auto kp = keypair_from_sk(kTiny, 9);
    for (int m : {0, 1}) {
        for (BigInt r = 0; r < kTiny.q; ++r) {
            const auto ballot = encrypt_choice(kTiny, kp.pk, m, r);
            CHECK(decrypt_tally(kTiny, kp, ballot.ct, 1) == m);
        }
    }
}

TEST_CASE("decrypt_tally matches the fixed vectors and flags out-of-range") {
    const auto kp = keypair_from_sk(kTiny, 3);
    // (16, 2) encrypts 0: 16^3 mod 23 = 2, so b / a^sk = 1 = g^0.
    CHECK(naive_mod_pow(16, 3, 23) == 2);
    CHECK(decrypt_tally(kTiny, kp, Ciphertext{16, 2}, 5) == 0);

    const auto one = encrypt_choice(kTiny, kp.pk, 1, 6);
    CHECK(decrypt_tally(kTiny, kp, one.ct, 1) == 1);
    // Enc(1) cannot decrypt with max_count 0.
    CHECK_THROWS_AS(decrypt_tally(kTiny, kp, one.ct, 0), DecryptionError);
    CHECK_THROWS_AS(decrypt_tally(kTiny, kp, one.ct, -1), std::invalid_argument);
}

TEST_CASE("homomorphic combination tallies sums, order-independently") {
    const auto kp = keypair_from_sk(kTiny, 4);
    Drbg rng(11, "combine-test");

    SUBCASE("fixed vector {1,0,1} -> 2") {
        std::vector<Ciphertext> cts;
        std::vector<int> plain{1, 0, 1};
        for (std::size_t i = 0; i < plain.size(); ++i) {
            cts.push_back(encrypt_choice(kTiny, kp.pk, plain[i], rng.below(kTiny.q)).ct);
        }
        const auto combined = homomorphic_combine(cts, kTiny);
        CHECK(decrypt_tally(kTiny, kp, combined, 3) == recount(plain));

        // any permutation gives the identical ciphertext
        std::vector<Ciphertext> perm{cts[2], cts[0], cts[1]};
        CHECK(homomorphic_combine(perm, kTiny) == combined);
    }

    SUBCASE("single Enc(0; r=0) is the identity pair") {
        const auto ct = encrypt_choice(kTiny, kp.pk, 0, 0).ct;
        const auto combined = homomorphic_combine(std::vector<Ciphertext>{ct}, kTiny);
        CHECK(combined == Ciphertext{1, 1});
    }

    // The plaintext space is Z_q, so sums past q-1 wrap; vectors longer
    // than 10 therefore run on the 64-bit group.
    const auto g64 = GroupParams::test64();
    const auto kp64 = keygen(g64, std::array<std::uint8_t, 1>{12});

    SUBCASE("random vectors up to length 20 match the recount oracle") {
        for (int trial = 0; trial < 25; ++trial) {
            const auto n = rng.range(1, 20);
            std::vector<Ciphertext> cts;
            std::vector<int> plain;
            for (std::uint64_t i = 0; i < n; ++i) {
                plain.push_back(static_cast<int>(rng.range(0, 1)));
                cts.push_back(encrypt_choice(g64, kp64.pk, plain.back(), rng.below(g64.q)).ct);
            }
            const auto combined = homomorphic_combine(cts, g64);
            CHECK(decrypt_tally(g64, kp64, combined, static_cast<int>(n)) == recount(plain));
        }
    }

    SUBCASE("n all-ones ballots decrypt to n, up to 20") {
        for (int n = 1; n <= 20; ++n) {
            std::vector<Ciphertext> cts;
            for (int i = 0; i < n; ++i) {
                cts.push_back(encrypt_choice(g64, kp64.pk, 1, rng.below(g64.q)).ct);
            }
            CHECK(decrypt_tally(g64, kp64, homomorphic_combine(cts, g64), n) == n);
        }
    }

    SUBCASE("tallies up to q-1 are exact in the tiny group") {
        for (int n = 1; n <= 10; ++n) {
            std::vector<Ciphertext> cts;
            for (int i = 0; i < n; ++i) {
                cts.push_back(encrypt_choice(kTiny, kp.pk, 1, rng.below(kTiny.q)).ct);
            }
            CHECK(decrypt_tally(kTiny, kp, homomorphic_combine(cts, kTiny), n) == n);
        }
    }

    SUBCASE("empty list is a domain error") {
        CHECK_THROWS_AS(homomorphic_combine(std::vector<Ciphertext>{}, kTiny),
                        std::invalid_argument);
    }
}

TEST_CASE("fiat-shamir challenge matches the frozen vectors") {
    TranscriptBuilder t;
    t.add_str("fs-test");
    t.add_dec(123);
    t.add_dec(456);

    CHECK(fs_challenge(t.bytes(), std::nullopt, 11) == 4);
    CHECK(fs_challenge(t.bytes(), 5, 11) == 2);
    CHECK(fs_challenge(t.bytes(), 6, 11) == 10);

    const BigInt q64 = GroupParams::test64().q;
    CHECK(fs_challenge(t.bytes(), std::nullopt, q64) == BigInt("7420669609697085859"));
    CHECK(fs_challenge(t.bytes(), 5, q64) == BigInt("6380600787597114916"));
    CHECK(fs_challenge(t.bytes(), 6, q64) == BigInt("1142764968799842250"));

    // determinism and range
    CHECK(fs_challenge(t.bytes(), 5, q64) == fs_challenge(t.bytes(), 5, q64));
    for (std::int64_t ts = 0; ts < 50; ++ts) {
        const auto c = fs_challenge(t.bytes(), ts, 11);
        CHECK(c >= 0);
        CHECK(c < 11);
    }
}

TEST_CASE("timestamps are proof-bound: edits break verification") {
    // A large enough group that a challenge collision mod q cannot sneak a
    // tampered timestamp through.
    const auto g64 = GroupParams::test64();
    const auto kp = keygen(g64, std::array<std::uint8_t, 2>{9, 9});
    for (std::uint64_t salt = 0; salt < 20; ++salt) {
        auto ballot = honest_ballot(g64, kp.pk, static_cast<int>(salt % 2), salt,
                                    static_cast<std::int64_t>(salt));
        REQUIRE(verify_ballot(g64, kp.pk, ballot));
        auto tampered = ballot;
        *tampered.timestamp += 1;
        CHECK_FALSE(verify_ballot(g64, kp.pk, tampered));
        // dropping the timestamp entirely also breaks it
        auto stripped = ballot;
        stripped.timestamp.reset();
        CHECK_FALSE(verify_ballot(g64, kp.pk, stripped));
    }
}

TEST_CASE("any single-field perturbation breaks verification") {
    const auto g64 = GroupParams::test64();
    const auto kp = keygen(g64, std::array<std::uint8_t, 1>{7});
    for (std::uint64_t salt = 0; salt < 4; ++salt) {
        const auto ballot = honest_ballot(g64, kp.pk, static_cast<int>(salt % 2), salt, 100);
        REQUIRE(verify_ballot(g64, kp.pk, ballot));

        auto bump_elem = [&](BigInt& x) { x = x + 1 == g64.p ? BigInt(1) : x + 1; };
        auto bump_scalar = [&](BigInt& x) { x = (x + 1) % g64.q; };

        for (int field = 0; field < 10; ++field) {
            auto mutant = ballot;
            switch (field) {
            case 0: bump_elem(mutant.ct.a); break;
            case 1: bump_elem(mutant.ct.b); break;
            case 2:
            case 3:
            case 4:
            case 5: bump_elem(mutant.proof.commitments[static_cast<std::size_t>(field - 2)]); break;
            case 6:
            case 7: bump_scalar(mutant.proof.challenges[static_cast<std::size_t>(field - 6)]); break;
            case 8:
            case 9: bump_scalar(mutant.proof.responses[static_cast<std::size_t>(field - 8)]); break;
            }
            CAPTURE(field);
            CHECK_FALSE(verify_ballot(g64, kp.pk, mutant));
        }
    }
}

TEST_CASE("special soundness spot-check: a forced m=2 ballot never verifies") {
    const auto g64 = GroupParams::test64();
    const auto kp = keygen(g64, std::array<std::uint8_t, 1>{3});
    Drbg rng(5, "forge");
    for (int claim : {0, 1}) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto forged =
                testsupport::forge_ballot(g64, kp.pk, 2, claim, rng.below(g64.q),
                                          rng.scalar(g64.q), rng.below(g64.q), rng.below(g64.q));
            CHECK_FALSE(verify_ballot(g64, kp.pk, forged));
        }
    }
    // the same forge routine with m in {0,1} and a true claim verifies,
    // so the check above fails for the right reason
    const auto honest = testsupport::forge_ballot(g64, kp.pk, 1, 1, rng.below(g64.q),
                                                  rng.scalar(g64.q), rng.below(g64.q),
                                                  rng.below(g64.q));
    CHECK(verify_ballot(g64, kp.pk, honest));
}

TEST_CASE("canonical encoding distinguishes the timestamp and round-trips JSON") {
    const auto kp = keypair_from_sk(kTiny, 6);
    const auto plain = encrypt_choice(kTiny, kp.pk, 1, 3);
    const auto stamped = encrypt_choice(kTiny, kp.pk, 1, 3, 9);
    CHECK(canonical_ballot_encoding(plain) != canonical_ballot_encoding(stamped));
    CHECK(ballot_digest(plain).size() == 64);
    CHECK(ballot_digest(plain) != ballot_digest(stamped));

    for (const auto& ballot : {plain, stamped}) {
        const auto round = ballot_from_json(ballot_to_json(ballot));
        CHECK(round == ballot);
        CHECK(ballot_digest(round) == ballot_digest(ballot));
    }

    const auto group_round = group_from_json(group_to_json(kTiny));
    CHECK(group_round == kTiny);
}

TEST_CASE("identical encrypt inputs give bit-identical ballots") {
    const auto kp = keypair_from_sk(kTiny, 8);
    const auto a = encrypt_choice(kTiny, kp.pk, 1, 7, 3);
    const auto b = encrypt_choice(kTiny, kp.pk, 1, 7, 3);
    CHECK(a == b);
}
