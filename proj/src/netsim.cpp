#include "heliosim/netsim.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

namespace heliosim::netsim {

PayloadKind kind_of(const Payload& payload) {
    return static_cast<PayloadKind>(payload.index());
}

std::string to_string(PayloadKind kind) {
    switch (kind) {
    case PayloadKind::BallotSubmission: return "BallotSubmission";
    case PayloadKind::AuthRequest: return "AuthRequest";
    case PayloadKind::TokenGrant: return "TokenGrant";
    case PayloadKind::TokenForward: return "TokenForward";
    case PayloadKind::IntrospectRequest: return "IntrospectRequest";
    case PayloadKind::IntrospectResponse: return "IntrospectResponse";
    }
    return "?";
}

PayloadKind kind_from_string(const std::string& name) {
    for (int i = 0; i <= static_cast<int>(PayloadKind::IntrospectResponse); ++i) {
        const auto kind = static_cast<PayloadKind>(i);
        if (to_string(kind) == name) return kind;
    }
    throw ConfigError("unknown payload kind: " + name);
}

std::string payload_digest(const Payload& payload) {
    if (const auto* sub = std::get_if<BallotSubmissionMsg>(&payload)) {
        return crypto::ballot_digest(sub->ballot);
    }
    TranscriptBuilder t;
    t.add_str("heliosim/payload/" + to_string(kind_of(payload)));
    std::visit(
        [&t](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, AuthRequestMsg>) {
                t.add_str(msg.voter_id);
                t.add_str(msg.secret);
            } else if constexpr (std::is_same_v<T, TokenGrantMsg>) {
                t.add_str(msg.granted ? "granted" : "denied");
                t.add_str(msg.token_value);
            } else if constexpr (std::is_same_v<T, TokenForwardMsg> ||
                                 std::is_same_v<T, IntrospectRequestMsg>) {
                t.add_str(msg.submission);
                t.add_str(msg.token_value);
            } else if constexpr (std::is_same_v<T, IntrospectResponseMsg>) {
                t.add_str(msg.submission);
                t.add_str(introspection_to_json(msg.intro).dump());
            }
        },
        payload);
    return t.hex_digest();
}

nlohmann::ordered_json payload_brief(const Payload& payload) {
    nlohmann::ordered_json j;
    j["payload"] = to_string(kind_of(payload));
    std::visit(
        [&j](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, BallotSubmissionMsg>) {
                j["session"] = msg.session;
                if (msg.ballot.timestamp) j["ballot_timestamp"] = *msg.ballot.timestamp;
            } else if constexpr (std::is_same_v<T, AuthRequestMsg>) {
                j["voter"] = msg.voter_id;
            } else if constexpr (std::is_same_v<T, TokenGrantMsg>) {
                j["granted"] = msg.granted;
            } else if constexpr (std::is_same_v<T, TokenForwardMsg>) {
                j["submission"] = msg.submission;
            } else if constexpr (std::is_same_v<T, IntrospectRequestMsg>) {
                j["submission"] = msg.submission;
            } else if constexpr (std::is_same_v<T, IntrospectResponseMsg>) {
                j["submission"] = msg.submission;
                j["active"] = msg.intro.active;
                if (msg.intro.voter_id) j["voter"] = *msg.intro.voter_id;
                if (msg.intro.issued_at) j["issued_at"] = *msg.intro.issued_at;
            }
        },
        payload);
    return j;
}

bool AdversaryRule::matches_filter(const Message& msg) const {
    if (kind && *kind != kind_of(msg.payload)) return false;
    if (from && *from != msg.from) return false;
    if (to && *to != msg.to) return false;
    if (seq && *seq != msg.seq) return false;
    return true;
}

nlohmann::ordered_json TraceEvent::to_json() const {
    nlohmann::ordered_json j;
    j["step"] = step;
    j["clock"] = clock;
    j["kind"] = kind;
    j["from"] = from;
    j["to"] = to;
    j["payload_digest"] = payload_digest;
    j["detail"] = detail.is_null() ? nlohmann::ordered_json::object() : detail;
    return j;
}

TraceEvent TraceEvent::from_json(const nlohmann::ordered_json& j) {
    TraceEvent ev;
    ev.step = j.at("step").get<std::uint64_t>();
    ev.clock = j.at("clock").get<std::int64_t>();
    ev.kind = j.at("kind").get<std::string>();
    ev.from = j.at("from").get<std::string>();
    ev.to = j.at("to").get<std::string>();
    ev.payload_digest = j.at("payload_digest").get<std::string>();
    ev.detail = j.at("detail");
    return ev;
}

void write_trace(std::ostream& out, const std::vector<TraceEvent>& events) {
    for (const auto& ev : events) out << ev.to_json().dump() << '\n';
}

std::vector<TraceEvent> parse_trace(std::istream& in) {
    std::vector<TraceEvent> events;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            events.push_back(TraceEvent::from_json(nlohmann::ordered_json::parse(line)));
        } catch (const std::exception& e) {
            throw TraceError("trace line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return events;
}

TraceEvent& Network::append(const std::string& kind, const std::string& from,
                            const std::string& to, const std::string& digest,
                            nlohmann::ordered_json detail) {
    TraceEvent ev;
    ev.step = next_step_++;
    ev.clock = clock_;
    ev.kind = kind;
    ev.from = from;
    ev.to = to;
    ev.payload_digest = digest;
    ev.detail = std::move(detail);
    trace_.push_back(std::move(ev));
    return trace_.back();
}

std::uint64_t Network::send(const std::string& from, const std::string& to, Payload payload,
                            const nlohmann::ordered_json& extra_detail) {
    Message msg;
    msg.seq = next_seq_++;
    msg.from = from;
    msg.to = to;
    msg.payload = std::move(payload);
    msg.sent_at = clock_;

    const std::string digest = netsim::payload_digest(msg.payload);
    auto detail = payload_brief(msg.payload);
    detail["seq"] = msg.seq;
    for (auto it = extra_detail.begin(); it != extra_detail.end(); ++it) {
        detail[it.key()] = it.value();
    }
    append("send", from, to, digest, std::move(detail));

    // Every rule's occurrence counter advances on a filter match, even when
    // an earlier rule captures the message; the first rule whose occurrence
    // fires decides the action.
    const AdversaryRule* acting = nullptr;
    for (auto& rule : rules_) {
        if (!rule.matches_filter(msg)) continue;
        ++rule.matches_seen;
        const bool fires = !rule.occurrence || *rule.occurrence == rule.matches_seen;
        if (fires && acting == nullptr) acting = &rule;
    }
    if (acting != nullptr && acting->action == RuleAction::Hold) {
        const std::uint64_t handle = msg.seq;
        held_[handle] = std::move(msg);
        held_by_rule_[acting->id] = handle;
        append("hold", from, to, digest,
               {{"seq", handle}, {"handle", handle}, {"rule", acting->id}});
        return handle;
    }
    const std::uint64_t seq = msg.seq;
    queue_.push_back(std::move(msg));
    return seq;
}

std::optional<Message> Network::begin_delivery() {
    if (queue_.empty()) return std::nullopt;
    Message msg = std::move(queue_.front());
    queue_.pop_front();
    ++clock_;
    ++delivered_;
    auto detail = payload_brief(msg.payload);
    detail["seq"] = msg.seq;
    append("deliver", msg.from, msg.to, payload_digest(msg.payload), std::move(detail));
    return msg;
}

Message Network::begin_delivery_of(std::uint64_t seq) {
    auto it = std::find_if(queue_.begin(), queue_.end(),
                           [seq](const Message& m) { return m.seq == seq; });
    if (it == queue_.end()) throw AdversaryError("begin_delivery_of: seq not queued");
    Message msg = std::move(*it);
    queue_.erase(it);
    ++clock_;
    ++delivered_;
    auto detail = payload_brief(msg.payload);
    detail["seq"] = msg.seq;
    append("deliver", msg.from, msg.to, payload_digest(msg.payload), std::move(detail));
    return msg;
}

std::uint64_t Network::add_rule(AdversaryRule rule) {
    rule.id = rules_.empty() ? 1 : rules_.back().id + 1;
    rule.matches_seen = 0;
    rules_.push_back(std::move(rule));
    return rules_.back().id;
}

void Network::release(std::uint64_t handle) {
    auto it = held_.find(handle);
    if (it == held_.end()) {
        throw AdversaryError("release: unknown or already-released handle " +
                             std::to_string(handle));
    }
    Message msg = std::move(it->second);
    held_.erase(it);
    append("release", msg.from, msg.to, payload_digest(msg.payload),
           {{"handle", handle}, {"seq", msg.seq}});
    queue_.push_back(std::move(msg));
}

std::vector<std::uint64_t> Network::queued_seqs() const {
    std::vector<std::uint64_t> out;
    out.reserve(queue_.size());
    for (const auto& m : queue_) out.push_back(m.seq);
    return out;
}

std::vector<std::uint64_t> Network::held_handles() const {
    std::vector<std::uint64_t> out;
    out.reserve(held_.size());
    for (const auto& [handle, _] : held_) out.push_back(handle);
    return out;
}

std::optional<std::uint64_t> Network::held_by_rule(std::uint64_t rule_id) const {
    auto it = held_by_rule_.find(rule_id);
    if (it == held_by_rule_.end()) return std::nullopt;
    if (!held_.contains(it->second)) return std::nullopt; // already released
    return it->second;
}

void Network::emit(const std::string& kind, const std::string& from, const std::string& to,
                   const std::string& digest, nlohmann::ordered_json detail) {
    append(kind, from, to, digest, std::move(detail));
}

} // namespace heliosim::netsim
