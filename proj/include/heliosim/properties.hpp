#pragma once

#include "heliosim/board.hpp"
#include "heliosim/netsim.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace heliosim::properties {

struct CastRecord {
    std::string digest;
    std::optional<int> plaintext; // harness annotation; absent in redacted traces
    std::uint64_t cast_index = 0;
    std::uint64_t step = 0; // send event step
};

// voter -> casts in cast order, recorded at encryption time. "Last choice"
// means last in this order, not anything a timestamp says.
using GroundTruth = std::map<std::string, std::vector<CastRecord>>;

// A finished run: the event log plus what the harness knows about who cast
// what. Ground truth is recoverable from the BallotSubmission send events,
// so a transcript file is self-contained.
struct TraceData {
    std::vector<netsim::TraceEvent> events;
    GroundTruth ground_truth;

    static TraceData from_events(std::vector<netsim::TraceEvent> events);
    static TraceData from_jsonl(std::istream& in);

    bool has_tally() const;
};

struct Verdict {
    std::string property;
    bool holds = true;
    std::vector<netsim::TraceEvent> witness; // non-empty iff !holds
    std::string detail;

    nlohmann::ordered_json to_json() const;
};

// Replay of the board decisions in a trace: which submissions are accepted
// per voter at each point, finishing at the tally when present.
struct AcceptedStateAtTally {
    // voter -> accepted submissions (more than one only in corrupted traces)
    std::map<std::string, std::set<std::string>> accepted;
    std::optional<std::uint64_t> tally_step;
    std::optional<int> tally_result;
};

AcceptedStateAtTally replay_accepts(const std::vector<netsim::TraceEvent>& events);

// Every accepted ballot belongs to a voter on the roll.
Verdict check_eligibility(const TraceData& trace, const std::set<std::string>& roll);

// At tally time no voter has more than one accepted ballot. Throws
// TraceError when the trace has no tally event.
Verdict check_non_reusability(const TraceData& trace);

// Every voter's accepted-at-tally ballot is their last cast one. Voters
// with no accepted ballot contribute no constraint. Throws TraceError when
// the trace has no tally event.
Verdict check_strong_non_reusability(const TraceData& trace);

enum class VerifyOutcome { Verified, Mismatch, Absent };
std::string to_string(VerifyOutcome outcome);

// The individual-verifiability check: does the board's accepted entry for
// the voter match the ballot they expect?
VerifyOutcome voter_verify(const board::BulletinBoard& board, const std::string& voter_id,
                           const std::string& expected_digest);

} // namespace heliosim::properties
