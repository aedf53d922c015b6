#pragma once

#include "heliosim/authority.hpp"
#include "heliosim/board.hpp"
#include "heliosim/crypto.hpp"
#include "heliosim/netsim.hpp"
#include "heliosim/properties.hpp"
#include "heliosim/rng.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace heliosim::scenario {

// Points at the n-th trace event matching the filter, or at quiescence
// ("fire once nothing is left to deliver"). Used to time releases and the
// close relative to the unfolding run.
struct EventRef {
    bool at_quiescence = false;
    std::string kind;                   // trace event kind: send, deliver, board_accept, ...
    std::optional<std::string> payload; // payload name for send/deliver refs
    std::optional<std::string> from;
    std::optional<std::string> to;
    std::uint64_t occurrence = 1; // 1-based

    static EventRef quiescent();
    bool satisfied_by(const std::vector<netsim::TraceEvent>& events) const;

    nlohmann::ordered_json to_json() const;
    static EventRef from_json(const nlohmann::json& j);
};

struct HoldDirective {
    netsim::AdversaryRule rule; // action is always Hold
    EventRef release_after;
};

struct VoterScript {
    std::string voter_id;
    std::vector<int> choices; // cast order
    bool registered = true;   // unregistered principals exercise eligibility
};

struct ScenarioConfig {
    std::string name;
    board::ArchivePolicy policy = board::ArchivePolicy::Vulnerable;
    std::vector<VoterScript> voters;
    std::vector<HoldDirective> adversary_script;
    std::optional<EventRef> close_after; // default: close at final quiescence
    std::uint64_t seed = 1;

    nlohmann::ordered_json to_json() const;
    static ScenarioConfig from_json(const nlohmann::json& j);
};

// One election under simulation: the network, the third party, the board,
// and scripted voter clients. Everything is a value, so a simulation can be
// copied mid-run and driven down alternative delivery schedules.
class Simulation {
public:
    Simulation(crypto::GroupParams group, board::ArchivePolicy policy, std::uint64_t seed,
               std::optional<std::int64_t> validity_window = std::nullopt);

    void register_voter(const std::string& voter_id);
    void add_unregistered(const std::string& voter_id);

    // Encrypts now (ballot timestamp = current clock), sends the ballot to
    // the board and the credentials to the third party, and records the
    // cast in the ground truth.
    void cast(const std::string& voter_id, int choice);

    // Delivers the FIFO head and dispatches it; false when quiescent.
    bool deliver_next();
    // Out-of-order delivery for schedule exploration.
    void deliver_seq(std::uint64_t seq);
    // Drains the queue. Throws LivelockError past the step budget.
    void run_until_quiescent(std::uint64_t budget = 100000);

    netsim::Network& net() { return net_; }
    const netsim::Network& net() const { return net_; }
    board::BulletinBoard& board() { return board_; }
    const board::BulletinBoard& board() const { return board_; }
    authority::Authority& auth() { return authority_; }

    const properties::GroundTruth& ground_truth() const { return ground_truth_; }
    const crypto::KeyPair& admin_keys() const { return admin_keys_; }
    const crypto::GroupParams& group() const { return group_; }
    std::vector<std::string> roll() const { return authority_.roll(); }

    // Digest of the n-th ballot this voter cast (0-based).
    std::string cast_digest(const std::string& voter_id, std::size_t index) const;

    // Performs the voter's individual-verifiability check against the
    // expected digest and traces it as a lookup event.
    properties::VerifyOutcome verify_and_trace(const std::string& voter_id,
                                               const std::string& expected_digest);

    properties::TraceData trace_data() const;

private:
    struct VoterClient {
        std::string secret;
        std::deque<std::string> awaiting_token; // submission ids, cast order
        Drbg rng;
        std::uint64_t casts = 0;
    };

    crypto::GroupParams group_;
    std::uint64_t seed_ = 0;
    crypto::KeyPair admin_keys_;
    netsim::Network net_;
    authority::Authority authority_;
    board::BulletinBoard board_;
    std::map<std::string, VoterClient> voters_;
    properties::GroundTruth ground_truth_;

    VoterClient make_client(const std::string& voter_id) const;
    void dispatch(const netsim::Message& msg);
    void handle_authority(const netsim::Message& msg);
    void handle_voter(const std::string& voter_id, const netsim::Message& msg);
};

struct RunResult {
    properties::TraceData trace;
    nlohmann::ordered_json board_export;
    std::vector<properties::Verdict> verdicts; // eligibility, non-reusability, strong
    int tally = 0;
    std::vector<std::string> roll;

    bool all_hold() const;
    const properties::Verdict& verdict(const std::string& property) const;
};

// Drives a declarative config end to end: casts in round-robin order,
// adversary holds/releases per script, close, drain, tally, predicates.
RunResult run_scenario(const ScenarioConfig& cfg, const crypto::GroupParams& group);

// The poll-station variant: the first listed choice of the victim is the
// supervisor's, its token is intercepted and released mid-validation just
// before close; the victim then runs the verifiability check and, on a
// mismatch, attempts (and fails) to recover by recasting.
RunResult run_poll_station_scenario(const ScenarioConfig& cfg, const crypto::GroupParams& group);

std::vector<std::string> builtin_names();
bool is_builtin(const std::string& name);
// Throws ConfigError for unknown names.
ScenarioConfig builtin_config(const std::string& name, board::ArchivePolicy policy,
                              std::uint64_t seed);
RunResult run_builtin(const std::string& name, board::ArchivePolicy policy, std::uint64_t seed,
                      const crypto::GroupParams& group);

// Randomized honest elections: up to 20 voters, up to 3 casts each, no
// adversary.
ScenarioConfig make_honest_fuzz_config(std::uint64_t seed);
// Randomized runs with held-and-always-released tokens plus occasional
// unregistered principals.
ScenarioConfig make_adversarial_fuzz_config(std::uint64_t seed);

} // namespace heliosim::scenario
