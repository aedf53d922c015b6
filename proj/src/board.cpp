#include "heliosim/board.hpp"

#include <algorithm>

namespace heliosim::board {

std::string to_string(ArchivePolicy policy) {
    switch (policy) {
    case ArchivePolicy::Vulnerable: return "vulnerable";
    case ArchivePolicy::TokenTimestamp: return "token-timestamp";
    case ArchivePolicy::BallotTimestamp: return "ballot-timestamp";
    }
    return "?";
}

ArchivePolicy policy_from_string(const std::string& name) {
    if (name == "vulnerable") return ArchivePolicy::Vulnerable;
    if (name == "token-timestamp") return ArchivePolicy::TokenTimestamp;
    if (name == "ballot-timestamp") return ArchivePolicy::BallotTimestamp;
    throw ConfigError("unknown archive policy: " + name);
}

std::string to_string(EntryStatus status) {
    switch (status) {
    case EntryStatus::Pending: return "pending";
    case EntryStatus::Accepted: return "accepted";
    case EntryStatus::Archived: return "archived";
    }
    return "?";
}

std::string to_string(Phase phase) {
    switch (phase) {
    case Phase::Open: return "open";
    case Phase::Closed: return "closed";
    case Phase::Tallied: return "tallied";
    }
    return "?";
}

BulletinBoard::BulletinBoard(crypto::GroupParams params, BigInt election_pk, ArchivePolicy policy)
    : params_(std::move(params)), pk_(std::move(election_pk)), policy_(policy) {}

SubmitResult BulletinBoard::submit_ballot(const std::string& session,
                                          const crypto::Ballot& ballot, netsim::Network& net) {
    const std::string digest = crypto::ballot_digest(ballot);
    if (phase_ != Phase::Open) {
        net.emit("board_reject", "board", "board", digest,
                 {{"reason", "voting-closed"}, {"session", session}});
        return {false, digest, "voting-closed"};
    }
    if (!crypto::verify_ballot(params_, pk_, ballot)) {
        net.emit("board_reject", "board", "board", digest,
                 {{"reason", "invalid-proof"}, {"session", session}});
        return {false, digest, "invalid-proof"};
    }
    if (by_submission_.contains(digest)) {
        net.emit("board_reject", "board", "board", digest,
                 {{"reason", "duplicate-submission"}, {"session", session}});
        return {false, digest, "duplicate-submission"};
    }
    BoardEntry entry;
    entry.submission = digest;
    entry.ballot = ballot;
    entry.status = EntryStatus::Pending;
    by_submission_[digest] = entries_.size();
    entries_.push_back(std::move(entry));
    return {true, digest, {}};
}

SubmitResult BulletinBoard::submit_token(const std::string& submission,
                                         const std::string& token_value, netsim::Network& net) {
    if (phase_ != Phase::Open) {
        net.emit("board_reject", "board", "board", submission,
                 {{"reason", "voting-closed"}, {"submission", submission}});
        return {false, submission, "voting-closed"};
    }
    auto it = by_submission_.find(submission);
    if (it == by_submission_.end()) {
        net.emit("board_reject", "board", "board", submission,
                 {{"reason", "unknown-submission"}, {"submission", submission}});
        return {false, submission, "unknown-submission"};
    }
    if (discarded_.contains(submission) || entries_[it->second].status != EntryStatus::Pending) {
        net.emit("board_reject", "board", "board", submission,
                 {{"reason", "submission-not-pending"}, {"submission", submission}});
        return {false, submission, "submission-not-pending"};
    }
    net.send("board", "authority", netsim::IntrospectRequestMsg{submission, token_value});
    return {true, submission, {}};
}

BoardEntry* BulletinBoard::find_accepted(const std::string& voter_id) {
    for (auto& entry : entries_) {
        if (entry.status == EntryStatus::Accepted && entry.voter_id == voter_id) return &entry;
    }
    return nullptr;
}

void BulletinBoard::archive(BoardEntry& entry, const std::string& reason, netsim::Network& net) {
    entry.status = EntryStatus::Archived;
    net.emit("board_archive", "board", "board", entry.submission,
             {{"submission", entry.submission}, {"voter", entry.voter_id}, {"reason", reason}});
}

void BulletinBoard::accept(BoardEntry& entry, const authority::Introspection& intro,
                           netsim::Network& net, const std::optional<std::string>& displaced) {
    entry.status = EntryStatus::Accepted;
    entry.voter_id = *intro.voter_id;
    entry.auth_issued_at = intro.issued_at;
    entry.accepted_at = net.clock();
    nlohmann::ordered_json detail{{"submission", entry.submission}, {"voter", entry.voter_id}};
    if (entry.auth_issued_at) detail["auth_issued_at"] = *entry.auth_issued_at;
    if (entry.ballot.timestamp) detail["ballot_timestamp"] = *entry.ballot.timestamp;
    if (displaced) detail["displaced"] = *displaced;
    net.emit("board_accept", "board", "board", entry.submission, std::move(detail));
}

AcceptDecision BulletinBoard::process_validation(const std::string& submission,
                                                 const authority::Introspection& intro,
                                                 netsim::Network& net) {
    if (phase_ == Phase::Tallied) {
        net.emit("board_reject", "board", "board", submission,
                 {{"reason", "tally-finalized"}, {"submission", submission}});
        return AcceptDecision::RejectedPhase;
    }
    auto it = by_submission_.find(submission);
    if (it == by_submission_.end() || discarded_.contains(submission) ||
        entries_[it->second].status != EntryStatus::Pending) {
        net.emit("board_reject", "board", "board", submission,
                 {{"reason", "submission-not-pending"}, {"submission", submission}});
        return AcceptDecision::RejectedNotPending;
    }
    BoardEntry& entry = entries_[it->second];
    if (!intro.active) {
        discarded_.insert(submission);
        net.emit("board_reject", "board", "board", submission,
                 {{"reason", "token-inactive"}, {"submission", submission}});
        return AcceptDecision::RejectedInactive;
    }
    const std::string voter = *intro.voter_id;

    if (policy_ == ArchivePolicy::BallotTimestamp && !entry.ballot.timestamp) {
        discarded_.insert(submission);
        net.emit("board_reject", "board", "board", submission,
                 {{"reason", "missing-ballot-timestamp"},
                  {"submission", submission},
                  {"voter", voter}});
        return AcceptDecision::RejectedMissingTimestamp;
    }

    BoardEntry* incumbent = find_accepted(voter);
    if (incumbent == nullptr) {
        accept(entry, intro, net, std::nullopt);
        return AcceptDecision::Accepted;
    }

    bool newcomer_wins = false;
    switch (policy_) {
    case ArchivePolicy::Vulnerable:
        // Archives whatever was previously accepted, no questions asked;
        // this is the behaviour the token-delay exploit leans on.
        newcomer_wins = true;
        break;
    case ArchivePolicy::TokenTimestamp:
        newcomer_wins = intro.issued_at && incumbent->auth_issued_at &&
                        *intro.issued_at > *incumbent->auth_issued_at;
        break;
    case ArchivePolicy::BallotTimestamp:
        newcomer_wins = entry.ballot.timestamp && incumbent->ballot.timestamp &&
                        *entry.ballot.timestamp > *incumbent->ballot.timestamp;
        break;
    }

    if (newcomer_wins) {
        const std::string displaced = incumbent->submission;
        archive(*incumbent, "superseded", net);
        accept(entry, intro, net, displaced);
        return AcceptDecision::Accepted;
    }
    entry.voter_id = voter;
    entry.auth_issued_at = intro.issued_at;
    archive(entry, "stale-timestamp", net);
    return AcceptDecision::ArchivedStale;
}

std::optional<std::pair<std::string, EntryStatus>>
BulletinBoard::lookup_voter_entry(const std::string& voter_id) const {
    for (const auto& entry : entries_) {
        if (entry.status == EntryStatus::Accepted && entry.voter_id == voter_id) {
            return std::make_pair(entry.submission, entry.status);
        }
    }
    return std::nullopt;
}

void BulletinBoard::close_voting(netsim::Network& net) {
    if (phase_ != Phase::Open) throw PhaseError("close_voting: phase is " + to_string(phase_));
    phase_ = Phase::Closed;
    net.emit("close", "administrator", "board", "", nlohmann::ordered_json::object());
}

int BulletinBoard::tally(const crypto::KeyPair& kp, netsim::Network& net) {
    if (phase_ != Phase::Closed) throw PhaseError("tally: phase is " + to_string(phase_));
    std::vector<crypto::Ciphertext> accepted;
    for (const auto& entry : entries_) {
        if (entry.status == EntryStatus::Accepted) accepted.push_back(entry.ballot.ct);
    }
    int result = 0;
    if (BigInt(accepted.size()) >= params_.q) {
        // The plaintext space is Z_q; a bigger tally would wrap silently.
        throw DecryptionError("tally: group order too small for " +
                              std::to_string(accepted.size()) + " accepted ballots");
    }
    if (!accepted.empty()) {
        const auto combined = crypto::homomorphic_combine(accepted, params_);
        result = crypto::decrypt_tally(params_, kp, combined, static_cast<int>(accepted.size()));
    }
    phase_ = Phase::Tallied;
    result_ = result;
    net.emit("tally", "administrator", "board", "",
             {{"result", result}, {"accepted_count", accepted.size()}});
    return result;
}

AuditReport BulletinBoard::audit(const std::vector<std::string>& roll) const {
    AuditReport report;
    std::map<std::string, int> accepted_per_voter;
    for (const auto& entry : entries_) {
        if (entry.status == EntryStatus::Pending || discarded_.contains(entry.submission)) {
            continue;
        }
        if (!crypto::verify_ballot(params_, pk_, entry.ballot)) {
            report.violations.push_back({"invalid-proof", entry.submission, entry.voter_id});
        }
        if (entry.status == EntryStatus::Accepted) {
            if (++accepted_per_voter[entry.voter_id] == 2) {
                report.violations.push_back(
                    {"multiple-accepted", entry.submission, entry.voter_id});
            }
            if (std::find(roll.begin(), roll.end(), entry.voter_id) == roll.end()) {
                report.violations.push_back({"off-roll-accept", entry.submission, entry.voter_id});
            }
        }
    }
    return report;
}

nlohmann::ordered_json BulletinBoard::export_json() const {
    nlohmann::ordered_json j;
    j["phase"] = to_string(phase_);
    j["policy"] = to_string(policy_);
    auto& arr = j["entries"] = nlohmann::ordered_json::array();
    for (const auto& entry : entries_) {
        if (discarded_.contains(entry.submission)) continue;
        nlohmann::ordered_json e;
        e["voter_id"] = entry.voter_id.empty() ? nlohmann::ordered_json(nullptr)
                                               : nlohmann::ordered_json(entry.voter_id);
        e["ballot"] = crypto::ballot_to_json(entry.ballot);
        e["status"] = to_string(entry.status);
        e["auth_issued_at"] = entry.auth_issued_at
                                  ? nlohmann::ordered_json(*entry.auth_issued_at)
                                  : nlohmann::ordered_json(nullptr);
        e["accepted_at"] = entry.accepted_at ? nlohmann::ordered_json(*entry.accepted_at)
                                             : nlohmann::ordered_json(nullptr);
        e["digest"] = entry.submission;
        arr.push_back(std::move(e));
    }
    j["result"] = result_ ? nlohmann::ordered_json(*result_) : nlohmann::ordered_json(nullptr);
    return j;
}

void BulletinBoard::handle(const netsim::Message& msg, netsim::Network& net) {
    if (const auto* sub = std::get_if<netsim::BallotSubmissionMsg>(&msg.payload)) {
        submit_ballot(sub->session, sub->ballot, net);
    } else if (const auto* fwd = std::get_if<netsim::TokenForwardMsg>(&msg.payload)) {
        submit_token(fwd->submission, fwd->token_value, net);
    } else if (const auto* resp = std::get_if<netsim::IntrospectResponseMsg>(&msg.payload)) {
        process_validation(resp->submission, resp->intro, net);
    }
}

void BulletinBoard::debug_inject_entry(BoardEntry entry) {
    by_submission_[entry.submission] = entries_.size();
    entries_.push_back(std::move(entry));
}

} // namespace heliosim::board
