#pragma once

#include "heliosim/authority.hpp"
#include "heliosim/crypto.hpp"
#include "heliosim/errors.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace heliosim::netsim {

// One payload variant per protocol arrow: ballot to board, credential to
// third party, token back, token relayed to board, validity query, validity
// answer.
struct BallotSubmissionMsg {
    std::string session;
    crypto::Ballot ballot;
};
struct AuthRequestMsg {
    std::string voter_id;
    std::string secret;
};
struct TokenGrantMsg {
    bool granted = false;
    std::string token_value;
};
struct TokenForwardMsg {
    std::string submission;
    std::string token_value;
};
struct IntrospectRequestMsg {
    std::string submission;
    std::string token_value;
};
struct IntrospectResponseMsg {
    std::string submission;
    authority::Introspection intro;
};

using Payload = std::variant<BallotSubmissionMsg, AuthRequestMsg, TokenGrantMsg, TokenForwardMsg,
                             IntrospectRequestMsg, IntrospectResponseMsg>;

enum class PayloadKind {
    BallotSubmission,
    AuthRequest,
    TokenGrant,
    TokenForward,
    IntrospectRequest,
    IntrospectResponse,
};

PayloadKind kind_of(const Payload& payload);
std::string to_string(PayloadKind kind);
PayloadKind kind_from_string(const std::string& name); // throws ConfigError

// For ballot submissions this is the ballot digest, so trace rows about the
// same ballot correlate by digest; other payloads hash their framed fields.
std::string payload_digest(const Payload& payload);
// Secrets (credentials, token values) stay out of the trace.
nlohmann::ordered_json payload_brief(const Payload& payload);

struct Message {
    std::uint64_t seq = 0;
    std::string from;
    std::string to;
    Payload payload;
    std::int64_t sent_at = 0;
};

enum class RuleAction { Hold, Deliver };

// Matches messages by payload kind / principals / seq. With `occurrence`
// set, only the n-th filter match (1-based) triggers the action; the rule
// is inert for the rest. First matching rule wins, default is delivery.
struct AdversaryRule {
    std::optional<PayloadKind> kind;
    std::optional<std::string> from;
    std::optional<std::string> to;
    std::optional<std::uint64_t> seq;
    std::optional<std::uint64_t> occurrence;
    RuleAction action = RuleAction::Hold;

    bool matches_filter(const Message& msg) const;

    std::uint64_t id = 0;           // assigned by Network::add_rule
    std::uint64_t matches_seen = 0; // internal counter
};

// One line of the run transcript. kind is one of: send, hold, release,
// deliver, board_accept, board_archive, board_reject, close, tally, lookup.
struct TraceEvent {
    std::uint64_t step = 0;
    std::int64_t clock = 0;
    std::string kind;
    std::string from;
    std::string to;
    std::string payload_digest;
    nlohmann::ordered_json detail;

    nlohmann::ordered_json to_json() const;
    static TraceEvent from_json(const nlohmann::ordered_json& j);
};

void write_trace(std::ostream& out, const std::vector<TraceEvent>& events);
std::vector<TraceEvent> parse_trace(std::istream& in);

// FIFO message queue with a logical clock (one tick per delivery), a held
// set controlled by adversary rules, and the append-only trace. Holding
// never mutates a message; release re-enqueues at the tail.
class Network {
public:
    // Enqueues (or holds) the message, traces the send. extra_detail is
    // merged into the send event only; deliver events carry the plain
    // payload brief.
    std::uint64_t send(const std::string& from, const std::string& to, Payload payload,
                       const nlohmann::ordered_json& extra_detail = {});

    // Pops the FIFO head, ticks the clock, traces the deliver. nullopt when
    // quiescent. The caller dispatches to the recipient.
    std::optional<Message> begin_delivery();
    // Delivers a specific queued message out of FIFO order; exploration
    // hook for schedule-enumeration tests. Throws AdversaryError for an
    // unknown seq.
    Message begin_delivery_of(std::uint64_t seq);

    std::uint64_t add_rule(AdversaryRule rule);
    // Throws AdversaryError for unknown or already-released handles.
    void release(std::uint64_t handle);

    bool quiescent() const { return queue_.empty(); }
    std::int64_t clock() const { return clock_; }
    std::vector<std::uint64_t> queued_seqs() const;
    std::vector<std::uint64_t> held_handles() const;
    // Handle of the message held by the given rule, if any.
    std::optional<std::uint64_t> held_by_rule(std::uint64_t rule_id) const;

    void emit(const std::string& kind, const std::string& from, const std::string& to,
              const std::string& digest, nlohmann::ordered_json detail);

    const std::vector<TraceEvent>& trace() const { return trace_; }
    std::uint64_t sent_count() const { return next_seq_; }
    std::uint64_t delivered_count() const { return delivered_; }

private:
    std::uint64_t next_seq_ = 0;
    std::uint64_t next_step_ = 0;
    std::uint64_t delivered_ = 0;
    std::int64_t clock_ = 0;
    std::deque<Message> queue_;
    std::map<std::uint64_t, Message> held_;               // handle (= seq) -> message
    std::map<std::uint64_t, std::uint64_t> held_by_rule_; // rule id -> handle
    std::vector<AdversaryRule> rules_;
    std::vector<TraceEvent> trace_;

    TraceEvent& append(const std::string& kind, const std::string& from, const std::string& to,
                       const std::string& digest, nlohmann::ordered_json detail);
};

} // namespace heliosim::netsim
