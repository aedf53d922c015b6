#include "heliosim/authority.hpp"

namespace heliosim::authority {

nlohmann::ordered_json introspection_to_json(const Introspection& intro) {
    nlohmann::ordered_json j;
    j["active"] = intro.active;
    if (intro.voter_id) j["voter_id"] = *intro.voter_id;
    if (intro.issued_at) j["issued_at"] = *intro.issued_at;
    return j;
}

Introspection introspection_from_json(const nlohmann::json& j) {
    Introspection intro;
    intro.active = j.at("active").get<bool>();
    if (j.contains("voter_id")) intro.voter_id = j.at("voter_id").get<std::string>();
    if (j.contains("issued_at")) intro.issued_at = j.at("issued_at").get<std::int64_t>();
    return intro;
}

Authority::Authority(std::uint64_t seed, std::optional<std::int64_t> validity_window)
    : validity_window_(validity_window), rng_(seed, "authority-tokens") {}

void Authority::register_voter(const std::string& voter_id, const std::string& secret) {
    if (credentials_.contains(voter_id)) {
        throw RegistrationError("voter already registered: " + voter_id);
    }
    credentials_[voter_id] = secret;
    roll_.push_back(voter_id);
}

AuthToken Authority::authenticate(const std::string& voter_id, const std::string& secret,
                                  std::int64_t now) {
    auto it = credentials_.find(voter_id);
    if (it == credentials_.end()) {
        throw AuthenticationError("unknown voter: " + voter_id);
    }
    if (it->second != secret) {
        throw AuthenticationError("bad credentials for voter: " + voter_id);
    }
    AuthToken token;
    do {
        token.token_value = hex_lower(rng_.bytes(16));
    } while (issued_.contains(token.token_value));
    token.voter_id = voter_id;
    token.issued_at = now;
    issued_[token.token_value] = token;
    return token;
}

Introspection Authority::introspect(const std::string& token_value, std::int64_t now) const {
    auto it = issued_.find(token_value);
    if (it == issued_.end()) return {};
    const AuthToken& token = it->second;
    if (validity_window_ && now - token.issued_at > *validity_window_) return {};
    Introspection intro;
    intro.active = true;
    intro.voter_id = token.voter_id;
    intro.issued_at = token.issued_at;
    return intro;
}

bool Authority::is_registered(const std::string& voter_id) const {
    return credentials_.contains(voter_id);
}

std::vector<std::string> Authority::roll() const { return roll_; }

} // namespace heliosim::authority
