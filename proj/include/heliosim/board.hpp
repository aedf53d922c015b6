#pragma once

#include "heliosim/authority.hpp"
#include "heliosim/crypto.hpp"
#include "heliosim/netsim.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace heliosim::board {

// Which re-vote wins when a validation lands:
//   Vulnerable      - the most recently validated ballot, unconditionally
//                     (the newcomer displaces whatever was accepted).
//   TokenTimestamp  - the ballot whose token was issued latest.
//   BallotTimestamp - the ballot constructed latest, judged by the
//                     proof-bound ballot timestamp.
enum class ArchivePolicy { Vulnerable, TokenTimestamp, BallotTimestamp };

std::string to_string(ArchivePolicy policy);
ArchivePolicy policy_from_string(const std::string& name); // throws ConfigError

enum class EntryStatus { Pending, Accepted, Archived };
std::string to_string(EntryStatus status);

struct BoardEntry {
    std::string submission; // canonical ballot digest
    std::string voter_id;   // empty until a validation names the voter
    crypto::Ballot ballot;
    EntryStatus status = EntryStatus::Pending;
    std::optional<std::int64_t> auth_issued_at; // from the validating token
    std::optional<std::int64_t> accepted_at;
};

enum class Phase { Open, Closed, Tallied };
std::string to_string(Phase phase);

struct SubmitResult {
    bool ok = false;
    std::string submission;
    std::string reason; // set when !ok
};

enum class AcceptDecision {
    Accepted,
    ArchivedStale, // valid token, but an accepted ballot outranks it
    RejectedInactive,
    RejectedMissingTimestamp,
    RejectedNotPending,
    RejectedPhase, // validation after tally
};

struct AuditViolation {
    std::string kind; // invalid-proof | multiple-accepted | off-roll-accept
    std::string submission;
    std::string voter_id;
};

struct AuditReport {
    std::vector<AuditViolation> violations;
    bool clean() const { return violations.empty(); }
};

// The bulletin board: pending encrypted choices keyed by submission id
// (identity is unknown until introspection), an accept/archive policy, the
// phase gate, and the homomorphic tally. Single-writer; every mutation is
// driven by a delivered event and traced through the Network.
class BulletinBoard {
public:
    BulletinBoard(crypto::GroupParams params, BigInt election_pk, ArchivePolicy policy);

    // Creates a pending entry when the proof verifies and voting is open.
    // Rejections are traced and never stored.
    SubmitResult submit_ballot(const std::string& session, const crypto::Ballot& ballot,
                               netsim::Network& net);

    // Relays the token to the authority as an IntrospectRequest.
    SubmitResult submit_token(const std::string& submission, const std::string& token_value,
                              netsim::Network& net);

    // Applies the archive policy to a validation result. Runs while open or
    // closed (validations in flight at close still land) but never after
    // the tally.
    AcceptDecision process_validation(const std::string& submission,
                                      const authority::Introspection& intro,
                                      netsim::Network& net);

    // The currently accepted entry's digest for the voter, if any.
    std::optional<std::pair<std::string, EntryStatus>>
    lookup_voter_entry(const std::string& voter_id) const;

    void close_voting(netsim::Network& net); // throws PhaseError when not open
    // Homomorphic combination of accepted ciphertexts, decrypted by bounded
    // search. Throws PhaseError outside the closed phase, DecryptionError
    // on corrupted contents.
    int tally(const crypto::KeyPair& kp, netsim::Network& net);

    AuditReport audit(const std::vector<std::string>& roll) const;

    nlohmann::ordered_json export_json() const;

    Phase phase() const { return phase_; }
    ArchivePolicy policy() const { return policy_; }
    std::optional<int> result() const { return result_; }
    const std::vector<BoardEntry>& entries() const { return entries_; }

    // Message adapter: BallotSubmission, TokenForward, IntrospectResponse.
    void handle(const netsim::Message& msg, netsim::Network& net);

    // Fault-injection hook for audit tests: appends an entry without any
    // validation.
    void debug_inject_entry(BoardEntry entry);

private:
    crypto::GroupParams params_;
    BigInt pk_;
    ArchivePolicy policy_;
    Phase phase_ = Phase::Open;
    std::vector<BoardEntry> entries_;
    std::map<std::string, std::size_t> by_submission_;
    std::set<std::string> discarded_; // submissions dropped after an inactive introspection
    std::optional<int> result_;

    BoardEntry* find_accepted(const std::string& voter_id);
    void archive(BoardEntry& entry, const std::string& reason, netsim::Network& net);
    void accept(BoardEntry& entry, const authority::Introspection& intro, netsim::Network& net,
                const std::optional<std::string>& displaced);
};

} // namespace heliosim::board
