#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "heliosim/authority.hpp"

using namespace heliosim;
using namespace heliosim::authority;

TEST_CASE("registration and authentication roundtrip") {
    Authority auth(1);
    auth.register_voter("alice", "s3cret");
    const auto token = auth.authenticate("alice", "s3cret", 7);
    CHECK(token.voter_id == "alice");
    CHECK(token.issued_at == 7);
    CHECK(token.token_value.size() == 32); // 16 bytes hex

    const auto intro = auth.introspect(token.token_value, 8);
    CHECK(intro.active);
    CHECK(*intro.voter_id == "alice");
    CHECK(*intro.issued_at == 7);
}

TEST_CASE("duplicate registration is rejected") {
    Authority auth(1);
    auth.register_voter("alice", "x");
    CHECK_THROWS_AS(auth.register_voter("alice", "y"), RegistrationError);
}

TEST_CASE("unknown voters and wrong secrets never get tokens") {
    Authority auth(1);
    auth.register_voter("alice", "right");
    CHECK_THROWS_AS(auth.authenticate("mallory", "w/e", 1), AuthenticationError);
    CHECK_THROWS_AS(auth.authenticate("alice", "wrong", 1), AuthenticationError);
    // the failures left nothing introspectable behind
    CHECK_FALSE(auth.introspect("deadbeef", 2).active);
}

TEST_CASE("successive tokens are distinct") {
    Authority auth(9);
    auth.register_voter("alice", "s");
    const auto t1 = auth.authenticate("alice", "s", 1);
    const auto t2 = auth.authenticate("alice", "s", 2);
    CHECK(t1.token_value != t2.token_value);
    // multi-check: introspection does not consume tokens, and issued_at
    // stays the issuance time regardless of when we ask
    for (std::int64_t now : {2, 50, 1000}) {
        const auto intro = auth.introspect(t1.token_value, now);
        CHECK(intro.active);
        CHECK(*intro.issued_at == 1);
    }
}

TEST_CASE("unknown token values introspect inactive with no metadata") {
    Authority auth(2);
    const auto intro = auth.introspect("0123456789abcdef0123456789abcdef", 5);
    CHECK_FALSE(intro.active);
    CHECK_FALSE(intro.voter_id.has_value());
    CHECK_FALSE(intro.issued_at.has_value());
}

TEST_CASE("validity window gates late introspection") {
    Authority auth(3, 100);
    auth.register_voter("alice", "s");
    const auto token = auth.authenticate("alice", "s", 3);
    // a long-delayed token still validates inside the window
    CHECK(auth.introspect(token.token_value, 90).active);
    CHECK(auth.introspect(token.token_value, 103).active);
    CHECK_FALSE(auth.introspect(token.token_value, 104).active);

    // the default window is unbounded
    Authority open_auth(3);
    open_auth.register_voter("alice", "s");
    const auto t2 = open_auth.authenticate("alice", "s", 0);
    CHECK(open_auth.introspect(t2.token_value, 1000000).active);
}

TEST_CASE("same seed reproduces the same token stream") {
    Authority a(77), b(77);
    a.register_voter("alice", "s");
    b.register_voter("alice", "s");
    CHECK(a.authenticate("alice", "s", 1).token_value ==
          b.authenticate("alice", "s", 1).token_value);
}

TEST_CASE("introspection JSON mirrors the token metadata shape") {
    Introspection active{true, "alice", 7};
    const auto j = introspection_to_json(active);
    CHECK(j.at("active") == true);
    CHECK(j.at("voter_id") == "alice");
    CHECK(j.at("issued_at") == 7);
    const auto round = introspection_from_json(j);
    CHECK(round.active);
    CHECK(*round.voter_id == "alice");

    const auto inactive = introspection_to_json(Introspection{});
    CHECK(inactive.at("active") == false);
    CHECK_FALSE(inactive.contains("voter_id"));
    CHECK_FALSE(inactive.contains("issued_at"));
}

TEST_CASE("roll preserves registration order") {
    Authority auth(4);
    auth.register_voter("zoe", "a");
    auth.register_voter("abe", "b");
    CHECK(auth.roll() == std::vector<std::string>{"zoe", "abe"});
    CHECK(auth.is_registered("zoe"));
    CHECK_FALSE(auth.is_registered("nobody"));
}
