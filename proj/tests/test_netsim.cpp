#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "heliosim/netsim.hpp"

#include <sstream>

using namespace heliosim;
using namespace heliosim::netsim;

namespace {

Payload auth_req(const std::string& voter) { return AuthRequestMsg{voter, "secret"}; }

Payload token_fwd(const std::string& sub) { return TokenForwardMsg{sub, "feedface"}; }

} // namespace

TEST_CASE("messages deliver FIFO and tick the clock") {
    Network net;
    CHECK(net.quiescent());
    CHECK(net.clock() == 0);
    net.send("alice", "authority", auth_req("alice"));
    net.send("bob", "authority", auth_req("bob"));
    CHECK_FALSE(net.quiescent());

    auto m1 = net.begin_delivery();
    REQUIRE(m1.has_value());
    CHECK(m1->from == "alice");
    CHECK(net.clock() == 1);
    auto m2 = net.begin_delivery();
    REQUIRE(m2.has_value());
    CHECK(m2->from == "bob");
    CHECK(net.clock() == 2);
    CHECK(net.quiescent());
    CHECK_FALSE(net.begin_delivery().has_value());
    CHECK(net.clock() == 2); // quiescent polling does not tick
}

TEST_CASE("a matching hold rule diverts the message and traces the hold") {
    Network net;
    AdversaryRule rule;
    rule.kind = PayloadKind::TokenForward;
    rule.from = "alice";
    net.add_rule(rule);

    net.send("alice", "board", token_fwd("s1"));
    CHECK(net.quiescent()); // held, not queued
    REQUIRE(net.held_handles().size() == 1);

    // specificity: a different principal passes through
    net.send("bob", "board", token_fwd("s2"));
    CHECK_FALSE(net.quiescent());
    auto m = net.begin_delivery();
    CHECK(m->from == "bob");

    const auto& trace = net.trace();
    REQUIRE(trace.size() == 4); // send, hold, send, deliver
    CHECK(trace[0].kind == "send");
    CHECK(trace[1].kind == "hold");
    CHECK(trace[1].payload_digest == trace[0].payload_digest);
}

TEST_CASE("release re-enqueues at the tail, exactly once") {
    Network net;
    AdversaryRule rule;
    rule.kind = PayloadKind::TokenForward;
    const auto rule_id = net.add_rule(rule);

    const auto handle = net.send("alice", "board", token_fwd("s1"));
    CHECK(net.held_by_rule(rule_id) == handle);
    net.send("alice", "authority", auth_req("alice")); // other traffic

    net.release(handle);
    CHECK_FALSE(net.held_by_rule(rule_id).has_value());
    // earlier traffic goes first, the released message after
    auto m1 = net.begin_delivery();
    CHECK(kind_of(m1->payload) == PayloadKind::AuthRequest);
    auto m2 = net.begin_delivery();
    CHECK(kind_of(m2->payload) == PayloadKind::TokenForward);

    CHECK_THROWS_AS(net.release(handle), AdversaryError); // double release
    CHECK_THROWS_AS(net.release(12345), AdversaryError);  // unknown handle
}

TEST_CASE("hold then immediate release delivers next on an empty queue") {
    Network net;
    AdversaryRule rule;
    rule.kind = PayloadKind::TokenForward;
    net.add_rule(rule);
    const auto handle = net.send("alice", "board", token_fwd("s1"));
    net.release(handle);
    auto m = net.begin_delivery();
    REQUIRE(m.has_value());
    CHECK(kind_of(m->payload) == PayloadKind::TokenForward);
}

TEST_CASE("interception transparency: the payload digest survives hold and release") {
    Network net;
    AdversaryRule rule;
    rule.kind = PayloadKind::TokenForward;
    net.add_rule(rule);
    const auto handle = net.send("alice", "board", token_fwd("s1"));
    net.release(handle);
    net.begin_delivery();

    const auto& trace = net.trace();
    REQUIRE(trace.size() == 4); // send, hold, release, deliver
    CHECK(trace[0].kind == "send");
    CHECK(trace[1].kind == "hold");
    CHECK(trace[2].kind == "release");
    CHECK(trace[3].kind == "deliver");
    for (std::size_t i = 1; i < trace.size(); ++i) {
        CHECK(trace[i].payload_digest == trace[0].payload_digest);
    }
}

TEST_CASE("occurrence-scoped rules pick the n-th match and count independently") {
    Network net;
    AdversaryRule second;
    second.kind = PayloadKind::TokenForward;
    second.occurrence = 2;
    const auto r2 = net.add_rule(second);
    AdversaryRule third;
    third.kind = PayloadKind::TokenForward;
    third.occurrence = 3;
    const auto r3 = net.add_rule(third);

    net.send("alice", "board", token_fwd("s1")); // occurrence 1: passes
    net.send("alice", "board", token_fwd("s2")); // occurrence 2: held by r2
    net.send("alice", "board", token_fwd("s3")); // occurrence 3: held by r3
    net.send("alice", "board", token_fwd("s4")); // occurrence 4: passes

    CHECK(net.queued_seqs().size() == 2);
    REQUIRE(net.held_by_rule(r2).has_value());
    REQUIRE(net.held_by_rule(r3).has_value());
    // the right messages were held
    auto m1 = net.begin_delivery();
    CHECK(std::get<TokenForwardMsg>(m1->payload).submission == "s1");
    auto m4 = net.begin_delivery();
    CHECK(std::get<TokenForwardMsg>(m4->payload).submission == "s4");
}

TEST_CASE("an explicit Deliver rule shadows a later Hold rule") {
    Network net;
    AdversaryRule pass;
    pass.kind = PayloadKind::TokenForward;
    pass.from = "alice";
    pass.action = RuleAction::Deliver;
    net.add_rule(pass);
    AdversaryRule hold_all;
    hold_all.kind = PayloadKind::TokenForward;
    net.add_rule(hold_all);

    net.send("alice", "board", token_fwd("s1")); // whitelisted
    net.send("bob", "board", token_fwd("s2"));   // held
    CHECK(net.queued_seqs().size() == 1);
    CHECK(net.held_handles().size() == 1);
}

TEST_CASE("FIFO order among never-held messages matches send order") {
    Network net;
    AdversaryRule rule;
    rule.kind = PayloadKind::TokenForward;
    rule.occurrence = 1;
    net.add_rule(rule);

    std::vector<std::uint64_t> sent;
    sent.push_back(net.send("alice", "board", token_fwd("held"))); // captured
    for (int i = 0; i < 5; ++i) {
        sent.push_back(net.send("bob", "authority", auth_req("bob")));
    }
    std::vector<std::uint64_t> delivered;
    while (auto m = net.begin_delivery()) delivered.push_back(m->seq);
    CHECK(delivered == std::vector<std::uint64_t>(sent.begin() + 1, sent.end()));
}

TEST_CASE("trace events serialize and parse byte-stably") {
    Network net;
    net.send("alice", "board", token_fwd("s1"), {{"cast_index", 0}});
    net.begin_delivery();
    net.emit("close", "administrator", "board", "", nlohmann::ordered_json::object());

    std::ostringstream out1, out2;
    write_trace(out1, net.trace());
    write_trace(out2, net.trace());
    CHECK(out1.str() == out2.str());

    std::istringstream in(out1.str());
    const auto parsed = parse_trace(in);
    REQUIRE(parsed.size() == net.trace().size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        CHECK(parsed[i].to_json() == net.trace()[i].to_json());
    }

    std::istringstream junk("not json\n");
    CHECK_THROWS_AS(parse_trace(junk), TraceError);
}

TEST_CASE("steps are dense and clocks only advance on delivery") {
    Network net;
    net.send("a", "authority", auth_req("a"));
    net.send("b", "authority", auth_req("b"));
    net.begin_delivery();
    net.begin_delivery();
    const auto& trace = net.trace();
    for (std::size_t i = 0; i < trace.size(); ++i) {
        CHECK(trace[i].step == i);
    }
    CHECK(trace[0].clock == 0); // sends before any delivery
    CHECK(trace[1].clock == 0);
    CHECK(trace[2].clock == 1); // first delivery
    CHECK(trace[3].clock == 2);
}

TEST_CASE("out-of-order delivery hook only touches queued messages") {
    Network net;
    const auto s1 = net.send("a", "authority", auth_req("a"));
    const auto s2 = net.send("b", "authority", auth_req("b"));
    auto m = net.begin_delivery_of(s2);
    CHECK(m.seq == s2);
    CHECK_THROWS_AS(net.begin_delivery_of(s2), AdversaryError);
    CHECK(net.begin_delivery()->seq == s1);
}
