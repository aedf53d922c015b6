#include "heliosim/crypto.hpp"

#include "heliosim/rng.hpp"

#include <boost/multiprecision/miller_rabin.hpp>

#include <random>

namespace heliosim::crypto {

namespace {

bool is_prime(const BigInt& n) {
    // Fixed witness engine keeps the test deterministic run to run.
    std::mt19937_64 engine(0x48454c494f53u);
    return boost::multiprecision::miller_rabin_test(n, 32, engine);
}

// Challenge transcript per the canonical encoding: (g, pk, a, b, A0..B1),
// timestamp appended by fs_challenge when present.
std::vector<std::uint8_t> challenge_transcript(const GroupParams& params, const BigInt& pk,
                                               const Ciphertext& ct,
                                               const std::array<BigInt, 4>& commitments) {
    TranscriptBuilder t;
    t.add_dec(params.g);
    t.add_dec(pk);
    t.add_dec(ct.a);
    t.add_dec(ct.b);
    for (const auto& c : commitments) t.add_dec(c);
    return t.bytes();
}

// b divided by the branch message term: branch 0 leaves b, branch 1 strips
// one factor of g.
BigInt branch_b(const GroupParams& params, const BigInt& b, int branch) {
    if (branch == 0) return b;
    return mod_mul(b, subgroup_inverse(params.g, params.q, params.p), params.p);
}

} // namespace

void GroupParams::validate() const {
    if (p < 5 || !is_prime(p)) throw std::invalid_argument("group: p is not prime");
    if (q < 2 || !is_prime(q)) throw std::invalid_argument("group: q is not prime");
    if ((p - 1) % q != 0) throw std::invalid_argument("group: q does not divide p-1");
    if (g <= 1 || g >= p) throw std::invalid_argument("group: generator out of range");
    if (mod_pow(g, q, p) != 1) throw std::invalid_argument("group: g does not have order q");
}

bool GroupParams::is_valid() const {
    try {
        validate();
        return true;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

bool GroupParams::in_subgroup(const BigInt& x) const {
    return x >= 1 && x < p && mod_pow(x, q, p) == 1;
}

GroupParams GroupParams::tiny() { return {23, 11, 2}; }

GroupParams GroupParams::test64() {
    return {BigInt("15164647798083623699"), BigInt("7582323899041811849"), 4};
}

GroupParams GroupParams::default256() {
    return {
        BigInt("85387468309370453930591223759182744335607986682564130528228213759570389978123"),
        BigInt("42693734154685226965295611879591372167803993341282065264114106879785194989061"),
        4};
}

GroupParams generate_group(unsigned bit_length, std::uint64_t seed) {
    if (bit_length < 16) throw std::invalid_argument("generate_group: bit_length must be >= 16");
    Drbg rng(seed, "group-generation");
    const unsigned q_bits = bit_length - 1;
    constexpr int kBudget = 1 << 20;
    for (int i = 0; i < kBudget; ++i) {
        BigInt q = rng.below(BigInt(1) << q_bits);
        bit_set(q, q_bits - 1); // exact bit length
        bit_set(q, 0);          // odd
        if (!is_prime(q)) continue;
        BigInt p = 2 * q + 1;
        if (!is_prime(p)) continue;
        // Any square other than 1 generates the order-q subgroup of a safe
        // prime group.
        for (;;) {
            BigInt h = rng.below(p - 3) + 2; // [2, p-2]
            BigInt g = mod_mul(h, h, p);
            if (g == 1) continue;
            GroupParams params{p, q, g};
            params.validate();
            return params;
        }
    }
    throw ParameterError("generate_group: no safe prime found within budget");
}

KeyPair keypair_from_sk(const GroupParams& params, const BigInt& sk) {
    if (sk < 1 || sk >= params.q) throw std::invalid_argument("keypair: sk out of range");
    return {sk, mod_pow(params.g, sk, params.p)};
}

KeyPair keygen(const GroupParams& params, std::span<const std::uint8_t> seed) {
    Drbg rng(seed);
    return keypair_from_sk(params, rng.derive("elgamal-sk").scalar(params.q));
}

std::vector<std::uint8_t> canonical_ballot_encoding(const Ballot& ballot) {
    TranscriptBuilder t;
    t.add_dec(ballot.ct.a);
    t.add_dec(ballot.ct.b);
    for (const auto& c : ballot.proof.commitments) t.add_dec(c);
    for (const auto& c : ballot.proof.challenges) t.add_dec(c);
    for (const auto& s : ballot.proof.responses) t.add_dec(s);
    if (ballot.timestamp) t.add_time(*ballot.timestamp);
    return t.bytes();
}

std::string ballot_digest(const Ballot& ballot) {
    auto digest = sha256(canonical_ballot_encoding(ballot));
    return hex_lower(digest);
}

BigInt fs_challenge(std::span<const std::uint8_t> transcript,
                    std::optional<std::int64_t> timestamp, const BigInt& q) {
    std::vector<std::uint8_t> bytes(transcript.begin(), transcript.end());
    if (timestamp) {
        TranscriptBuilder ts_field;
        ts_field.add_time(*timestamp);
        bytes.insert(bytes.end(), ts_field.bytes().begin(), ts_field.bytes().end());
    }
    auto digest = sha256(bytes);
    BigInt v = 0;
    for (auto b : digest) v = (v << 8) | b;
    return v % q;
}

Ballot encrypt_choice(const GroupParams& params, const BigInt& pk, int m, const BigInt& r,
                      std::optional<std::int64_t> timestamp) {
    if (m != 0 && m != 1) throw std::invalid_argument("encrypt_choice: choice must be 0 or 1");
    if (r < 0 || r >= params.q) throw std::invalid_argument("encrypt_choice: r out of range");

    Ballot ballot;
    ballot.timestamp = timestamp;
    ballot.ct.a = mod_pow(params.g, r, params.p);
    ballot.ct.b = mod_mul(mod_pow(pk, r, params.p), mod_pow(params.g, m, params.p), params.p);

    // Proof nonces derived from the full input tuple: explicit randomness in,
    // reproducible ballot out.
    TranscriptBuilder seed;
    seed.add_str("heliosim/proof-nonces/v1");
    seed.add_dec(params.p);
    seed.add_dec(pk);
    seed.add_dec(r);
    seed.add_dec(m);
    if (timestamp) seed.add_time(*timestamp);
    Drbg nonces(seed.bytes());

    const int real = m;
    const int sim = 1 - m;
    const BigInt w = nonces.scalar(params.q);
    const BigInt c_sim = nonces.below(params.q);
    const BigInt s_sim = nonces.below(params.q);

    std::array<BigInt, 4> com;
    com[static_cast<std::size_t>(2 * real)] = mod_pow(params.g, w, params.p);
    com[static_cast<std::size_t>(2 * real + 1)] = mod_pow(pk, w, params.p);
    // Simulated branch: pick the response first, then solve for commitments.
    const BigInt neg_c = (params.q - c_sim) % params.q;
    com[static_cast<std::size_t>(2 * sim)] =
        mod_mul(mod_pow(params.g, s_sim, params.p), mod_pow(ballot.ct.a, neg_c, params.p), params.p);
    com[static_cast<std::size_t>(2 * sim + 1)] =
        mod_mul(mod_pow(pk, s_sim, params.p),
                mod_pow(branch_b(params, ballot.ct.b, sim), neg_c, params.p), params.p);

    const BigInt c = fs_challenge(challenge_transcript(params, pk, ballot.ct, com), timestamp,
                                  params.q);
    const BigInt c_real = (c - c_sim + params.q) % params.q;
    const BigInt s_real = (w + c_real * r) % params.q;

    ballot.proof.commitments = com;
    ballot.proof.challenges[static_cast<std::size_t>(real)] = c_real;
    ballot.proof.challenges[static_cast<std::size_t>(sim)] = c_sim;
    ballot.proof.responses[static_cast<std::size_t>(real)] = s_real;
    ballot.proof.responses[static_cast<std::size_t>(sim)] = s_sim;
    return ballot;
}

bool verify_ballot(const GroupParams& params, const BigInt& pk, const Ballot& ballot) {
    const auto& ct = ballot.ct;
    const auto& pr = ballot.proof;
    if (!params.in_subgroup(ct.a) || !params.in_subgroup(ct.b)) return false;
    for (const auto& c : pr.commitments) {
        if (!params.in_subgroup(c)) return false;
    }
    for (const auto& c : pr.challenges) {
        if (c < 0 || c >= params.q) return false;
    }
    for (const auto& s : pr.responses) {
        if (s < 0 || s >= params.q) return false;
    }

    const BigInt c = fs_challenge(challenge_transcript(params, pk, ct, pr.commitments),
                                  ballot.timestamp, params.q);
    if ((pr.challenges[0] + pr.challenges[1]) % params.q != c) return false;

    for (int branch = 0; branch < 2; ++branch) {
        const auto bi = static_cast<std::size_t>(branch);
        const BigInt& cb = pr.challenges[bi];
        const BigInt& sb = pr.responses[bi];
        if (mod_pow(params.g, sb, params.p) !=
            mod_mul(pr.commitments[2 * bi], mod_pow(ct.a, cb, params.p), params.p)) {
            return false;
        }
        if (mod_pow(pk, sb, params.p) !=
            mod_mul(pr.commitments[2 * bi + 1],
                    mod_pow(branch_b(params, ct.b, branch), cb, params.p), params.p)) {
            return false;
        }
    }
    return true;
}

Ciphertext homomorphic_combine(std::span<const Ciphertext> cts, const GroupParams& params) {
    if (cts.empty()) throw std::invalid_argument("homomorphic_combine: empty ciphertext list");
    Ciphertext acc{1, 1};
    for (const auto& ct : cts) {
        if (!params.in_subgroup(ct.a) || !params.in_subgroup(ct.b)) {
            throw std::invalid_argument("homomorphic_combine: component outside subgroup");
        }
        acc.a = mod_mul(acc.a, ct.a, params.p);
        acc.b = mod_mul(acc.b, ct.b, params.p);
    }
    return acc;
}

int decrypt_tally(const GroupParams& params, const KeyPair& kp, const Ciphertext& ct,
                  int max_count) {
    if (max_count < 0) throw std::invalid_argument("decrypt_tally: max_count must be >= 0");
    const BigInt shared = mod_pow(ct.a, kp.sk, params.p);
    const BigInt message = mod_mul(ct.b, subgroup_inverse(shared, params.q, params.p), params.p);
    BigInt acc = 1;
    for (int m = 0; m <= max_count; ++m) {
        if (acc == message) return m;
        acc = mod_mul(acc, params.g, params.p);
    }
    throw DecryptionError("decrypt_tally: no plaintext in 0.." + std::to_string(max_count));
}

nlohmann::ordered_json ballot_to_json(const Ballot& ballot) {
    nlohmann::ordered_json j;
    j["a"] = to_dec(ballot.ct.a);
    j["b"] = to_dec(ballot.ct.b);
    auto& com = j["commitments"] = nlohmann::ordered_json::array();
    for (const auto& c : ballot.proof.commitments) com.push_back(to_dec(c));
    auto& ch = j["challenges"] = nlohmann::ordered_json::array();
    for (const auto& c : ballot.proof.challenges) ch.push_back(to_dec(c));
    auto& resp = j["responses"] = nlohmann::ordered_json::array();
    for (const auto& s : ballot.proof.responses) resp.push_back(to_dec(s));
    if (ballot.timestamp) j["timestamp"] = *ballot.timestamp;
    return j;
}

Ballot ballot_from_json(const nlohmann::json& j) {
    Ballot ballot;
    ballot.ct.a = from_dec(j.at("a").get<std::string>());
    ballot.ct.b = from_dec(j.at("b").get<std::string>());
    const auto& com = j.at("commitments");
    const auto& ch = j.at("challenges");
    const auto& resp = j.at("responses");
    if (com.size() != 4 || ch.size() != 2 || resp.size() != 2) {
        throw std::invalid_argument("ballot_from_json: wrong proof arity");
    }
    for (std::size_t i = 0; i < 4; ++i) {
        ballot.proof.commitments[i] = from_dec(com[i].get<std::string>());
    }
    for (std::size_t i = 0; i < 2; ++i) {
        ballot.proof.challenges[i] = from_dec(ch[i].get<std::string>());
        ballot.proof.responses[i] = from_dec(resp[i].get<std::string>());
    }
    if (j.contains("timestamp")) ballot.timestamp = j.at("timestamp").get<std::int64_t>();
    return ballot;
}

nlohmann::ordered_json group_to_json(const GroupParams& params) {
    return nlohmann::ordered_json{
        {"p", to_dec(params.p)}, {"q", to_dec(params.q)}, {"g", to_dec(params.g)}};
}

GroupParams group_from_json(const nlohmann::json& j) {
    return {from_dec(j.at("p").get<std::string>()), from_dec(j.at("q").get<std::string>()),
            from_dec(j.at("g").get<std::string>())};
}

} // namespace heliosim::crypto
