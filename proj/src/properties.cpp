#include "heliosim/properties.hpp"

#include "heliosim/errors.hpp"

#include <algorithm>
#include <istream>

namespace heliosim::properties {

TraceData TraceData::from_events(std::vector<netsim::TraceEvent> events) {
    TraceData trace;
    trace.events = std::move(events);
    for (const auto& ev : trace.events) {
        if (ev.kind != "send" || ev.detail.value("payload", "") != "BallotSubmission") continue;
        CastRecord rec;
        rec.digest = ev.payload_digest;
        rec.step = ev.step;
        auto& casts = trace.ground_truth[ev.from];
        rec.cast_index = casts.size();
        if (ev.detail.contains("plaintext")) rec.plaintext = ev.detail["plaintext"].get<int>();
        casts.push_back(std::move(rec));
    }
    return trace;
}

TraceData TraceData::from_jsonl(std::istream& in) {
    return from_events(netsim::parse_trace(in));
}

bool TraceData::has_tally() const {
    return std::any_of(events.begin(), events.end(),
                       [](const netsim::TraceEvent& ev) { return ev.kind == "tally"; });
}

nlohmann::ordered_json Verdict::to_json() const {
    nlohmann::ordered_json j;
    j["property"] = property;
    j["holds"] = holds;
    auto& steps = j["witness_steps"] = nlohmann::ordered_json::array();
    for (const auto& ev : witness) steps.push_back(ev.step);
    if (!detail.empty()) j["detail"] = detail;
    return j;
}

AcceptedStateAtTally replay_accepts(const std::vector<netsim::TraceEvent>& events) {
    AcceptedStateAtTally state;
    for (const auto& ev : events) {
        if (ev.kind == "board_accept") {
            state.accepted[ev.detail.value("voter", "")].insert(ev.detail.value("submission", ""));
        } else if (ev.kind == "board_archive") {
            auto it = state.accepted.find(ev.detail.value("voter", ""));
            if (it != state.accepted.end()) {
                it->second.erase(ev.detail.value("submission", ""));
            }
        } else if (ev.kind == "tally") {
            state.tally_step = ev.step;
            state.tally_result = ev.detail.value("result", 0);
            break; // the state at tally is what the predicates judge
        }
    }
    return state;
}

namespace {

// Events that carry the late-validation evidence for a submission: its
// token-forward / introspection deliveries and any hold/release of those
// messages.
void collect_validation_evidence(const std::vector<netsim::TraceEvent>& events,
                                 const std::string& submission,
                                 std::vector<const netsim::TraceEvent*>& out) {
    std::set<std::string> digests;
    for (const auto& ev : events) {
        if (ev.kind == "deliver" && ev.detail.value("submission", "") == submission) {
            out.push_back(&ev);
            digests.insert(ev.payload_digest);
        }
    }
    for (const auto& ev : events) {
        if ((ev.kind == "hold" || ev.kind == "release") && digests.contains(ev.payload_digest)) {
            out.push_back(&ev);
        }
    }
}

std::vector<netsim::TraceEvent> finalize_witness(std::vector<const netsim::TraceEvent*> picked) {
    std::sort(picked.begin(), picked.end(),
              [](const netsim::TraceEvent* a, const netsim::TraceEvent* b) {
                  return a->step < b->step;
              });
    picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
    std::vector<netsim::TraceEvent> out;
    out.reserve(picked.size());
    for (const auto* ev : picked) out.push_back(*ev);
    return out;
}

const netsim::TraceEvent* find_tally(const std::vector<netsim::TraceEvent>& events) {
    for (const auto& ev : events) {
        if (ev.kind == "tally") return &ev;
    }
    return nullptr;
}

} // namespace

Verdict check_eligibility(const TraceData& trace, const std::set<std::string>& roll) {
    Verdict verdict;
    verdict.property = "eligibility";
    std::vector<const netsim::TraceEvent*> offending;
    for (const auto& ev : trace.events) {
        if (ev.kind != "board_accept") continue;
        const std::string voter = ev.detail.value("voter", "");
        if (!roll.contains(voter)) offending.push_back(&ev);
    }
    if (!offending.empty()) {
        verdict.holds = false;
        verdict.detail = "accepted ballot for unregistered identity";
        verdict.witness = finalize_witness(std::move(offending));
    }
    return verdict;
}

Verdict check_non_reusability(const TraceData& trace) {
    if (!trace.has_tally()) throw TraceError("check_non_reusability: trace has no tally event");
    Verdict verdict;
    verdict.property = "non-reusability";
    const auto state = replay_accepts(trace.events);
    std::vector<const netsim::TraceEvent*> picked;
    for (const auto& [voter, subs] : state.accepted) {
        if (subs.size() <= 1) continue;
        verdict.holds = false;
        verdict.detail = "voter " + voter + " has " + std::to_string(subs.size()) +
                         " accepted ballots at tally";
        for (const auto& ev : trace.events) {
            if (ev.kind == "board_accept" && ev.detail.value("voter", "") == voter &&
                subs.contains(ev.detail.value("submission", ""))) {
                picked.push_back(&ev);
            }
        }
    }
    if (!verdict.holds) {
        if (const auto* tally = find_tally(trace.events)) picked.push_back(tally);
        verdict.witness = finalize_witness(std::move(picked));
    }
    return verdict;
}

Verdict check_strong_non_reusability(const TraceData& trace) {
    if (!trace.has_tally()) {
        throw TraceError("check_strong_non_reusability: trace has no tally event");
    }
    Verdict verdict;
    verdict.property = "strong-non-reusability";
    const auto state = replay_accepts(trace.events);
    std::vector<const netsim::TraceEvent*> picked;
    for (const auto& [voter, casts] : trace.ground_truth) {
        if (casts.empty()) continue;
        auto it = state.accepted.find(voter);
        if (it == state.accepted.end() || it->second.empty()) {
            // No ballot of this voter has influence; censorship is outside
            // this predicate.
            continue;
        }
        const std::string& last_cast = casts.back().digest;
        std::vector<std::string> wrong;
        for (const auto& sub : it->second) {
            if (sub != last_cast) wrong.push_back(sub);
        }
        if (wrong.empty()) continue;
        verdict.holds = false;
        if (!verdict.detail.empty()) verdict.detail += "; ";
        verdict.detail += "voter " + voter + ": accepted ballot is not the last cast";
        // The voter's cast history makes the witness self-contained.
        for (const auto& ev : trace.events) {
            if (ev.kind == "send" && ev.from == voter &&
                ev.detail.value("payload", "") == "BallotSubmission") {
                picked.push_back(&ev);
            }
        }
        for (const auto& sub : wrong) {
            for (const auto& ev : trace.events) {
                if (ev.kind == "board_accept" && ev.detail.value("submission", "") == sub) {
                    picked.push_back(&ev);
                }
                if (ev.kind == "board_archive" && ev.detail.value("voter", "") == voter &&
                    ev.detail.value("submission", "") == last_cast) {
                    picked.push_back(&ev);
                }
            }
            collect_validation_evidence(trace.events, sub, picked);
        }
    }
    if (!verdict.holds) {
        if (const auto* tally = find_tally(trace.events)) picked.push_back(tally);
        verdict.witness = finalize_witness(std::move(picked));
    }
    return verdict;
}

std::string to_string(VerifyOutcome outcome) {
    switch (outcome) {
    case VerifyOutcome::Verified: return "Verified";
    case VerifyOutcome::Mismatch: return "Mismatch";
    case VerifyOutcome::Absent: return "Absent";
    }
    return "?";
}

VerifyOutcome voter_verify(const board::BulletinBoard& board, const std::string& voter_id,
                           const std::string& expected_digest) {
    auto entry = board.lookup_voter_entry(voter_id);
    if (!entry) return VerifyOutcome::Absent;
    return entry->first == expected_digest ? VerifyOutcome::Verified : VerifyOutcome::Mismatch;
}

} // namespace heliosim::properties
