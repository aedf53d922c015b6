#pragma once

#include "heliosim/errors.hpp"
#include "heliosim/rng.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace heliosim::authority {

struct Credential {
    std::string voter_id;
    std::string secret; // opaque bytes
};

struct AuthToken {
    std::string token_value; // 16 random bytes, hex encoded
    std::string voter_id;
    std::int64_t issued_at = 0;
};

// Answer to a token-validity query. issued_at is always the issuance-time
// clock; only timestamp-aware board policies read it.
struct Introspection {
    bool active = false;
    std::optional<std::string> voter_id;
    std::optional<std::int64_t> issued_at;
};

nlohmann::ordered_json introspection_to_json(const Introspection& intro);
Introspection introspection_from_json(const nlohmann::json& j);

// The token-issuing third party: holds the electoral roll, issues tokens on
// credential match, and answers the board's validity queries. Tokens are
// not consumed by introspection.
class Authority {
public:
    explicit Authority(std::uint64_t seed,
                       std::optional<std::int64_t> validity_window = std::nullopt);

    // Throws RegistrationError on a duplicate voter_id.
    void register_voter(const std::string& voter_id, const std::string& secret);

    // Throws AuthenticationError for unknown voters or wrong secrets;
    // nothing is recorded on failure.
    AuthToken authenticate(const std::string& voter_id, const std::string& secret,
                           std::int64_t now);

    // active iff the token was issued and (when a window is configured)
    // now - issued_at <= validity_window. Unknown tokens are inactive.
    Introspection introspect(const std::string& token_value, std::int64_t now) const;

    bool is_registered(const std::string& voter_id) const;
    std::vector<std::string> roll() const; // registration order

private:
    std::map<std::string, std::string> credentials_;
    std::vector<std::string> roll_;
    std::map<std::string, AuthToken> issued_; // token_value -> token
    std::optional<std::int64_t> validity_window_;
    Drbg rng_;
};

} // namespace heliosim::authority
