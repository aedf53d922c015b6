#include "heliosim/scenario.hpp"

#include "heliosim/errors.hpp"

#include <algorithm>

namespace heliosim::scenario {

using nlohmann::ordered_json;

EventRef EventRef::quiescent() {
    EventRef ref;
    ref.at_quiescence = true;
    return ref;
}

bool EventRef::satisfied_by(const std::vector<netsim::TraceEvent>& events) const {
    if (at_quiescence) return false; // quiescence is the driver's call, not the trace's
    std::uint64_t seen = 0;
    for (const auto& ev : events) {
        if (ev.kind != kind) continue;
        if (payload && ev.detail.value("payload", "") != *payload) continue;
        if (from && ev.from != *from) continue;
        if (to && ev.to != *to) continue;
        if (++seen >= occurrence) return true;
    }
    return false;
}

ordered_json EventRef::to_json() const {
    if (at_quiescence) return ordered_json{{"at_quiescence", true}};
    ordered_json j;
    j["kind"] = kind;
    if (payload) j["payload"] = *payload;
    if (from) j["from"] = *from;
    if (to) j["to"] = *to;
    j["occurrence"] = occurrence;
    return j;
}

EventRef EventRef::from_json(const nlohmann::json& j) {
    EventRef ref;
    if (j.value("at_quiescence", false)) {
        ref.at_quiescence = true;
        return ref;
    }
    ref.kind = j.at("kind").get<std::string>();
    if (j.contains("payload")) ref.payload = j.at("payload").get<std::string>();
    if (j.contains("from")) ref.from = j.at("from").get<std::string>();
    if (j.contains("to")) ref.to = j.at("to").get<std::string>();
    ref.occurrence = j.value("occurrence", std::uint64_t{1});
    return ref;
}

namespace {

ordered_json rule_to_json(const netsim::AdversaryRule& rule) {
    ordered_json j;
    if (rule.kind) j["kind"] = netsim::to_string(*rule.kind);
    if (rule.from) j["from"] = *rule.from;
    if (rule.to) j["to"] = *rule.to;
    if (rule.seq) j["seq"] = *rule.seq;
    if (rule.occurrence) j["occurrence"] = *rule.occurrence;
    return j;
}

netsim::AdversaryRule rule_from_json(const nlohmann::json& j) {
    netsim::AdversaryRule rule;
    if (j.contains("kind")) rule.kind = netsim::kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("from")) rule.from = j.at("from").get<std::string>();
    if (j.contains("to")) rule.to = j.at("to").get<std::string>();
    if (j.contains("seq")) rule.seq = j.at("seq").get<std::uint64_t>();
    if (j.contains("occurrence")) rule.occurrence = j.at("occurrence").get<std::uint64_t>();
    rule.action = netsim::RuleAction::Hold;
    return rule;
}

} // namespace

ordered_json ScenarioConfig::to_json() const {
    ordered_json j;
    j["name"] = name;
    j["policy"] = board::to_string(policy);
    j["seed"] = seed;
    auto& vs = j["voters"] = ordered_json::array();
    for (const auto& v : voters) {
        ordered_json vj;
        vj["voter_id"] = v.voter_id;
        vj["choices"] = v.choices;
        vj["registered"] = v.registered;
        vs.push_back(std::move(vj));
    }
    auto& script = j["adversary_script"] = ordered_json::array();
    for (const auto& h : adversary_script) {
        script.push_back(
            ordered_json{{"hold", rule_to_json(h.rule)}, {"release_after", h.release_after.to_json()}});
    }
    j["close_after"] = close_after ? close_after->to_json() : ordered_json(nullptr);
    return j;
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
    ScenarioConfig cfg;
    cfg.name = j.at("name").get<std::string>();
    cfg.policy = board::policy_from_string(j.at("policy").get<std::string>());
    cfg.seed = j.value("seed", std::uint64_t{1});
    for (const auto& vj : j.at("voters")) {
        VoterScript v;
        v.voter_id = vj.at("voter_id").get<std::string>();
        v.choices = vj.at("choices").get<std::vector<int>>();
        v.registered = vj.value("registered", true);
        if (v.choices.empty()) throw ConfigError("voter " + v.voter_id + " has no choices");
        cfg.voters.push_back(std::move(v));
    }
    if (j.contains("adversary_script")) {
        for (const auto& hj : j.at("adversary_script")) {
            HoldDirective h;
            h.rule = rule_from_json(hj.at("hold"));
            h.release_after = EventRef::from_json(hj.at("release_after"));
            cfg.adversary_script.push_back(std::move(h));
        }
    }
    if (j.contains("close_after") && !j.at("close_after").is_null()) {
        cfg.close_after = EventRef::from_json(j.at("close_after"));
    }
    return cfg;
}

Simulation::Simulation(crypto::GroupParams group, board::ArchivePolicy policy, std::uint64_t seed,
                       std::optional<std::int64_t> validity_window)
    : group_(std::move(group)), seed_(seed),
      admin_keys_(
          crypto::keypair_from_sk(group_, Drbg(seed, "administrator-key").scalar(group_.q))),
      authority_(seed, validity_window),
      board_(group_, admin_keys_.pk, policy) {}

// Credentials and per-voter encryption randomness all hang off the run seed.
Simulation::VoterClient Simulation::make_client(const std::string& voter_id) const {
    return VoterClient{hex_lower(Drbg(seed_, "credential/" + voter_id).bytes(16)),
                       {},
                       Drbg(seed_, "voter/" + voter_id),
                       0};
}

void Simulation::register_voter(const std::string& voter_id) {
    auto client = make_client(voter_id);
    authority_.register_voter(voter_id, client.secret);
    voters_.insert_or_assign(voter_id, std::move(client));
}

void Simulation::add_unregistered(const std::string& voter_id) {
    voters_.insert_or_assign(voter_id, make_client(voter_id));
}

void Simulation::cast(const std::string& voter_id, int choice) {
    auto it = voters_.find(voter_id);
    if (it == voters_.end()) throw ConfigError("cast: unknown principal " + voter_id);
    VoterClient& client = it->second;

    const BigInt r = client.rng.below(group_.q);
    const auto ballot =
        crypto::encrypt_choice(group_, admin_keys_.pk, choice, r, net_.clock());
    const std::string digest = crypto::ballot_digest(ballot);

    auto& casts = ground_truth_[voter_id];
    const std::uint64_t send_step = net_.trace().size();
    net_.send(voter_id, "board", netsim::BallotSubmissionMsg{voter_id, ballot},
              {{"cast_index", casts.size()}, {"plaintext", choice}});
    client.awaiting_token.push_back(digest);
    net_.send(voter_id, "authority", netsim::AuthRequestMsg{voter_id, client.secret});
    casts.push_back({digest, choice, casts.size(), send_step});
    ++client.casts;
}

bool Simulation::deliver_next() {
    auto msg = net_.begin_delivery();
    if (!msg) return false;
    dispatch(*msg);
    return true;
}

void Simulation::deliver_seq(std::uint64_t seq) { dispatch(net_.begin_delivery_of(seq)); }

void Simulation::run_until_quiescent(std::uint64_t budget) {
    std::uint64_t steps = 0;
    while (deliver_next()) {
        if (++steps > budget) {
            throw LivelockError("run_until_quiescent: budget of " + std::to_string(budget) +
                                " deliveries exceeded");
        }
    }
}

void Simulation::dispatch(const netsim::Message& msg) {
    if (msg.to == "board") {
        board_.handle(msg, net_);
    } else if (msg.to == "authority") {
        handle_authority(msg);
    } else {
        handle_voter(msg.to, msg);
    }
}

void Simulation::handle_authority(const netsim::Message& msg) {
    if (const auto* req = std::get_if<netsim::AuthRequestMsg>(&msg.payload)) {
        try {
            const auto token = authority_.authenticate(req->voter_id, req->secret, net_.clock());
            net_.send("authority", msg.from, netsim::TokenGrantMsg{true, token.token_value});
        } catch (const AuthenticationError&) {
            net_.send("authority", msg.from, netsim::TokenGrantMsg{false, ""});
        }
    } else if (const auto* req = std::get_if<netsim::IntrospectRequestMsg>(&msg.payload)) {
        const auto intro = authority_.introspect(req->token_value, net_.clock());
        net_.send("authority", "board", netsim::IntrospectResponseMsg{req->submission, intro});
    }
}

void Simulation::handle_voter(const std::string& voter_id, const netsim::Message& msg) {
    auto it = voters_.find(voter_id);
    if (it == voters_.end()) return;
    VoterClient& client = it->second;
    if (const auto* grant = std::get_if<netsim::TokenGrantMsg>(&msg.payload)) {
        if (client.awaiting_token.empty()) return;
        const std::string submission = client.awaiting_token.front();
        client.awaiting_token.pop_front();
        if (!grant->granted) return; // authentication failed; nothing to forward
        net_.send(voter_id, "board", netsim::TokenForwardMsg{submission, grant->token_value});
    }
}

std::string Simulation::cast_digest(const std::string& voter_id, std::size_t index) const {
    return ground_truth_.at(voter_id).at(index).digest;
}

properties::VerifyOutcome Simulation::verify_and_trace(const std::string& voter_id,
                                                       const std::string& expected_digest) {
    const auto outcome = properties::voter_verify(board_, voter_id, expected_digest);
    ordered_json detail{{"voter", voter_id}, {"outcome", properties::to_string(outcome)}};
    if (auto entry = board_.lookup_voter_entry(voter_id)) detail["accepted"] = entry->first;
    net_.emit("lookup", voter_id, "board", expected_digest, std::move(detail));
    return outcome;
}

properties::TraceData Simulation::trace_data() const {
    properties::TraceData trace;
    trace.events = net_.trace();
    trace.ground_truth = ground_truth_;
    return trace;
}

bool RunResult::all_hold() const {
    return std::all_of(verdicts.begin(), verdicts.end(),
                       [](const properties::Verdict& v) { return v.holds; });
}

const properties::Verdict& RunResult::verdict(const std::string& property) const {
    for (const auto& v : verdicts) {
        if (v.property == property) return v;
    }
    throw std::out_of_range("no verdict for property " + property);
}

namespace {

std::vector<std::pair<std::string, int>> flatten_casts(const ScenarioConfig& cfg) {
    std::vector<std::pair<std::string, int>> casts;
    for (std::size_t round = 0;; ++round) {
        bool any = false;
        for (const auto& v : cfg.voters) {
            if (round < v.choices.size()) {
                casts.emplace_back(v.voter_id, v.choices[round]);
                any = true;
            }
        }
        if (!any) break;
    }
    return casts;
}

void setup_principals(Simulation& sim, const ScenarioConfig& cfg) {
    for (const auto& v : cfg.voters) {
        if (v.registered) {
            sim.register_voter(v.voter_id);
        } else {
            sim.add_unregistered(v.voter_id);
        }
    }
}

RunResult finish(Simulation& sim) {
    RunResult result;
    result.roll = sim.roll();
    result.tally = *sim.board().result();
    result.board_export = sim.board().export_json();
    result.trace = sim.trace_data();
    const std::set<std::string> roll(result.roll.begin(), result.roll.end());
    result.verdicts.push_back(properties::check_eligibility(result.trace, roll));
    result.verdicts.push_back(properties::check_non_reusability(result.trace));
    result.verdicts.push_back(properties::check_strong_non_reusability(result.trace));
    return result;
}

} // namespace

RunResult run_scenario(const ScenarioConfig& cfg, const crypto::GroupParams& group) {
    if (cfg.voters.empty()) throw ConfigError("scenario has no voters");
    for (const auto& v : cfg.voters) {
        if (v.choices.empty()) throw ConfigError("voter " + v.voter_id + " has no choices");
    }
    Simulation sim(group, cfg.policy, cfg.seed);
    setup_principals(sim, cfg);

    struct PendingRelease {
        std::uint64_t rule_id;
        EventRef after;
        bool fired = false;
    };
    std::vector<PendingRelease> releases;
    for (const auto& h : cfg.adversary_script) {
        auto rule = h.rule;
        rule.action = netsim::RuleAction::Hold;
        releases.push_back({sim.net().add_rule(rule), h.release_after, false});
    }

    bool closed = false;
    const auto casts = flatten_casts(cfg);
    std::size_t next_cast = 0;

    auto fire_ready = [&](bool at_quiescence) {
        bool fired = false;
        for (auto& r : releases) {
            if (r.fired) continue;
            const auto handle = sim.net().held_by_rule(r.rule_id);
            if (!handle) continue; // nothing intercepted yet
            const bool ready = r.after.at_quiescence ? at_quiescence
                                                     : r.after.satisfied_by(sim.net().trace());
            if (!ready) continue;
            sim.net().release(*handle);
            r.fired = true;
            fired = true;
        }
        if (!closed && cfg.close_after && !cfg.close_after->at_quiescence &&
            cfg.close_after->satisfied_by(sim.net().trace())) {
            sim.board().close_voting(sim.net());
            closed = true;
            fired = true;
        }
        return fired;
    };

    constexpr std::uint64_t kBudget = 200000;
    for (std::uint64_t steps = 0;; ++steps) {
        if (steps > kBudget) throw LivelockError("run_scenario: driver budget exceeded");
        if (fire_ready(false)) continue;
        if (!sim.net().quiescent()) {
            sim.deliver_next();
            continue;
        }
        if (next_cast < casts.size()) {
            sim.cast(casts[next_cast].first, casts[next_cast].second);
            ++next_cast;
            continue;
        }
        if (fire_ready(true)) continue;
        break;
    }

    for (const auto& r : releases) {
        if (!r.fired) {
            throw ConfigError("scenario '" + cfg.name +
                              "': a release_after never became ready (rule " +
                              std::to_string(r.rule_id) + ")");
        }
    }
    if (!closed) {
        sim.board().close_voting(sim.net());
    }
    sim.run_until_quiescent(); // validations in flight at close still land
    sim.board().tally(sim.admin_keys(), sim.net());
    return finish(sim);
}

RunResult run_poll_station_scenario(const ScenarioConfig& cfg, const crypto::GroupParams& group) {
    if (cfg.voters.empty() || cfg.voters.front().choices.size() < 2) {
        throw ConfigError("poll-station scenario needs a victim with a supervisor-chosen first "
                          "ballot and a private re-vote");
    }
    const auto& victim = cfg.voters.front();
    Simulation sim(group, cfg.policy, cfg.seed);
    setup_principals(sim, cfg);

    // The polling-station router intercepts the token of the demonstration
    // ballot.
    netsim::AdversaryRule rule;
    rule.kind = netsim::PayloadKind::TokenForward;
    rule.from = victim.voter_id;
    rule.occurrence = 1;
    const auto rule_id = sim.net().add_rule(rule);

    sim.cast(victim.voter_id, victim.choices[0]); // supervisor's suggestion
    sim.run_until_quiescent();
    sim.cast(victim.voter_id, victim.choices[1]); // the private re-vote
    sim.run_until_quiescent();
    for (std::size_t i = 1; i < cfg.voters.size(); ++i) {
        for (int choice : cfg.voters[i].choices) {
            sim.cast(cfg.voters[i].voter_id, choice);
            sim.run_until_quiescent();
        }
    }

    const auto handle = sim.net().held_by_rule(rule_id);
    if (!handle) throw ConfigError("poll-station: no token was intercepted");
    sim.net().release(*handle);

    // Let the released token reach the board and the validity answer get
    // onto the wire, then close: the validation is still in flight when
    // voting ends.
    const std::string demo_sub = sim.cast_digest(victim.voter_id, 0);
    auto response_in_flight = [&] {
        for (const auto& ev : sim.net().trace()) {
            if (ev.kind == "send" && ev.detail.value("payload", "") == "IntrospectResponse" &&
                ev.detail.value("submission", "") == demo_sub) {
                return true;
            }
        }
        return false;
    };
    while (!response_in_flight() && sim.deliver_next()) {
    }
    sim.board().close_voting(sim.net());
    sim.run_until_quiescent();

    // Detection: the victim checks their private re-vote, and on a mismatch
    // tries to recover by recasting. Voting is closed; the recast bounces.
    const std::string revote = sim.cast_digest(victim.voter_id, 1);
    if (sim.verify_and_trace(victim.voter_id, revote) == properties::VerifyOutcome::Mismatch) {
        sim.cast(victim.voter_id, victim.choices[1]);
        sim.run_until_quiescent();
    }
    sim.board().tally(sim.admin_keys(), sim.net());
    sim.verify_and_trace(victim.voter_id, revote); // after tally there is no recovery
    return finish(sim);
}

std::vector<std::string> builtin_names() {
    return {"honest-single", "honest-revote", "fig2-attack", "poll-station", "fuzz",
            "honest-fuzz"};
}

bool is_builtin(const std::string& name) {
    const auto names = builtin_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

ScenarioConfig builtin_config(const std::string& name, board::ArchivePolicy policy,
                              std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.name = name;
    cfg.policy = policy;
    cfg.seed = seed;
    if (name == "honest-single") {
        cfg.voters = {{"alice", {1}, true}};
        return cfg;
    }
    if (name == "honest-revote") {
        cfg.voters = {{"alice", {0, 1}, true}};
        return cfg;
    }
    if (name == "fig2-attack") {
        cfg.voters = {{"alice", {0, 1}, true}};
        HoldDirective hold;
        hold.rule.kind = netsim::PayloadKind::TokenForward;
        hold.rule.from = "alice";
        hold.rule.occurrence = 1;
        EventRef after;
        after.kind = "board_accept";
        after.occurrence = 1;
        hold.release_after = after;
        cfg.adversary_script.push_back(std::move(hold));
        return cfg;
    }
    if (name == "poll-station") {
        // First choice is the supervisor's suggestion, second the victim's.
        cfg.voters = {{"alice", {1, 0}, true}};
        HoldDirective hold;
        hold.rule.kind = netsim::PayloadKind::TokenForward;
        hold.rule.from = "alice";
        hold.rule.occurrence = 1;
        hold.release_after = EventRef::quiescent();
        cfg.adversary_script.push_back(std::move(hold));
        return cfg;
    }
    if (name == "fuzz") {
        auto fuzz = make_adversarial_fuzz_config(seed);
        fuzz.policy = policy;
        return fuzz;
    }
    if (name == "honest-fuzz") {
        auto fuzz = make_honest_fuzz_config(seed);
        fuzz.policy = policy;
        return fuzz;
    }
    throw ConfigError("unknown scenario: " + name);
}

RunResult run_builtin(const std::string& name, board::ArchivePolicy policy, std::uint64_t seed,
                      const crypto::GroupParams& group) {
    const auto cfg = builtin_config(name, policy, seed);
    if (name == "poll-station") return run_poll_station_scenario(cfg, group);
    return run_scenario(cfg, group);
}

ScenarioConfig make_honest_fuzz_config(std::uint64_t seed) {
    Drbg rng(seed, "honest-fuzz");
    ScenarioConfig cfg;
    cfg.name = "honest-fuzz";
    cfg.seed = seed;
    const auto n_voters = rng.range(1, 20);
    for (std::uint64_t i = 0; i < n_voters; ++i) {
        VoterScript v;
        v.voter_id = "voter-" + std::to_string(i + 1);
        const auto n_casts = rng.range(1, 3);
        for (std::uint64_t c = 0; c < n_casts; ++c) {
            v.choices.push_back(static_cast<int>(rng.range(0, 1)));
        }
        cfg.voters.push_back(std::move(v));
    }
    return cfg;
}

ScenarioConfig make_adversarial_fuzz_config(std::uint64_t seed) {
    Drbg rng(seed, "adversarial-fuzz");
    ScenarioConfig cfg;
    cfg.name = "fuzz";
    cfg.seed = seed;
    const auto n_voters = rng.range(2, 8);
    std::uint64_t registered_casts = 0;
    std::uint64_t total_casts = 0;
    for (std::uint64_t i = 0; i < n_voters; ++i) {
        VoterScript v;
        v.voter_id = "voter-" + std::to_string(i + 1);
        const auto n_casts = rng.range(1, 3);
        for (std::uint64_t c = 0; c < n_casts; ++c) {
            v.choices.push_back(static_cast<int>(rng.range(0, 1)));
        }
        registered_casts += n_casts;
        total_casts += n_casts;
        cfg.voters.push_back(std::move(v));
    }
    const auto n_unregistered = rng.range(0, 2);
    for (std::uint64_t i = 0; i < n_unregistered; ++i) {
        VoterScript v;
        v.voter_id = "mallory-" + std::to_string(i + 1);
        v.registered = false;
        const auto n_casts = rng.range(1, 2);
        for (std::uint64_t c = 0; c < n_casts; ++c) {
            v.choices.push_back(static_cast<int>(rng.range(0, 1)));
        }
        total_casts += n_casts;
        cfg.voters.push_back(std::move(v));
    }

    // Hold a few token forwards; every hold is guaranteed an eventual
    // release, so no ballot is censored forever. Only registered casts
    // produce token forwards.
    const auto max_holds = std::min<std::uint64_t>(3, registered_casts);
    const auto n_holds = rng.range(0, max_holds);
    std::vector<std::uint64_t> occurrences;
    for (std::uint64_t i = 1; i <= registered_casts; ++i) occurrences.push_back(i);
    for (std::uint64_t h = 0; h < n_holds; ++h) {
        const auto pick = rng.range(0, occurrences.size() - 1);
        const auto occurrence = occurrences[pick];
        occurrences.erase(occurrences.begin() + static_cast<std::ptrdiff_t>(pick));
        HoldDirective hold;
        hold.rule.kind = netsim::PayloadKind::TokenForward;
        hold.rule.occurrence = occurrence;
        if (rng.range(0, 1) == 0) {
            hold.release_after = EventRef::quiescent();
        } else {
            EventRef after;
            after.kind = "deliver";
            after.payload = "BallotSubmission";
            after.occurrence = rng.range(1, total_casts);
            hold.release_after = after;
        }
        cfg.adversary_script.push_back(std::move(hold));
    }
    return cfg;
}

} // namespace heliosim::scenario
