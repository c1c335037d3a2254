#include "taulab/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "taulab/batch_operator.hpp"
#include "taulab/contract.hpp"
#include "taulab/contributor.hpp"
#include "taulab/gas.hpp"

namespace taulab {

namespace {

void validate(const ScenarioConfig& cfg) {
    if (cfg.n < 1 || cfg.k < 1 || cfg.n > kMaxPowers || cfg.k > kMaxPowers)
        throw std::invalid_argument("dimensions out of range");
    if (cfg.batches < 1) throw std::invalid_argument("need at least one batch");
    if (cfg.contributors_per_batch < 1)
        throw std::invalid_argument("need at least one contributor per batch");
    for (const InjectionSpec& inj : cfg.injections) {
        if (inj.round < 1 || inj.round > cfg.batches)
            throw std::invalid_argument("injection round outside the schedule");
        if (inj.mode == InjectMode::None || inj.mode == InjectMode::InconsistentQ1) continue;
        uint32_t limit = inj.group_index == 1 ? cfg.n : cfg.k;
        if (inj.group_index != 1 && inj.group_index != 2)
            throw std::invalid_argument("injection group must be 1 or 2");
        if (inj.element_index < 2 || inj.element_index > limit)
            throw std::invalid_argument("injection element untargetable");
    }
}

// One gas CSV row per logged transaction, using the cost model the contract
// itself charges from. The first column is the round the transaction aimed
// at (0 for deployment).
std::string gas_rows(const Contract& contract) {
    std::ostringstream out;
    out << cost_csv_header() << "\n";
    uint32_t round = 0;
    for (const LogEntry& entry : contract.log()) {
        if (std::holds_alternative<SetupEntry>(entry)) {
            const SetupEntry& e = std::get<SetupEntry>(entry);
            CostReport deploy;
            deploy.scheme = "deploy";
            deploy.n = e.params.n;
            deploy.k = e.params.k;
            deploy.overhead = e.gas;
            out << cost_csv_row(0, deploy) << "\n";
        } else if (std::holds_alternative<UpdateEntry>(entry)) {
            const UpdateEntry& e = std::get<UpdateEntry>(entry);
            out << cost_csv_row(round + 1, estimate_update_ours(contract.params(),
                                                                contract.schedule()))
                << "\n";
            if (e.outcome == UpdateOutcome::Accepted) round++;
        } else {
            const FraudEntry& e = std::get<FraudEntry>(entry);
            out << cost_csv_row(e.proof.t, estimate_fraud(contract.params(),
                                                          contract.schedule()))
                << "\n";
            if (e.accepted) round = e.proof.t - 1;
        }
    }
    return out.str();
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    ScenarioConfig cfg;
    try {
        cfg.n = j.value("n", cfg.n);
        cfg.k = j.value("k", cfg.k);
        cfg.batches = j.value("batches", cfg.batches);
        cfg.contributors_per_batch =
            j.value("contributors_per_batch", cfg.contributors_per_batch);
        cfg.seed = j.value("seed", cfg.seed);
        for (const auto& ij : j.value("injections", nlohmann::json::array())) {
            InjectionSpec spec;
            spec.round = ij.at("round").get<uint32_t>();
            std::string mode = ij.at("mode").get<std::string>();
            std::optional<InjectMode> parsed = inject_mode_from_name(mode);
            if (!parsed) throw std::invalid_argument("unknown injection mode: " + mode);
            spec.mode = *parsed;
            spec.group_index = ij.value("group", 0u);
            spec.element_index = ij.value("element", 0u);
            cfg.injections.push_back(spec);
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad config field: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

std::string ScenarioConfig::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["k"] = k;
    j["batches"] = batches;
    j["contributors_per_batch"] = contributors_per_batch;
    j["seed"] = seed;
    j["injections"] = nlohmann::json::array();
    for (const InjectionSpec& inj : injections) {
        nlohmann::json ij;
        ij["round"] = inj.round;
        ij["mode"] = inject_mode_name(inj.mode);
        ij["group"] = inj.group_index;
        ij["element"] = inj.element_index;
        j["injections"].push_back(ij);
    }
    return j.dump(2);
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    validate(cfg);
    ScenarioResult res;
    res.ok = true;
    auto fail = [&res](const std::string& msg) {
        res.ok = false;
        res.notes.push_back("FAIL: " + msg);
    };
    auto note = [&res](const std::string& msg) { res.notes.push_back(msg); };

    Contract contract(CeremonyParams{cfg.n, cfg.k});
    Drbg contrib_rng = Drbg::from_u64(cfg.seed, 1);
    Drbg inject_rng = Drbg::from_u64(cfg.seed, 2);

    for (uint32_t b = 1; b <= cfg.batches; b++) {
        for (const InjectionSpec& inj : cfg.injections) {
            if (inj.round != b) continue;
            InjectionReport rep = inject_illformed(contract, inj.mode, inj.group_index,
                                                   inj.element_index, inject_rng);
            std::ostringstream line;
            line << "batch " << b << ": injected " << inject_mode_name(inj.mode)
                 << " update, verdict " << update_outcome_name(rep.outcome);
            if (rep.outcome != UpdateOutcome::Accepted) {
                fail(line.str());
                continue;
            }
            note(line.str());
            if (!rep.where.ill) {
                if (inj.mode != InjectMode::None)
                    fail("defect landed but the audit found nothing");
                continue;
            }
            res.injections_landed++;
            std::ostringstream audit;
            audit << "  audit: round " << rep.round << " defective at group "
                  << rep.where.group_index << " element " << rep.where.element_index;
            note(audit.str());
            DisproveResult dis = disprove(contract, rep.round);
            if (!dis.proof_ready) {
                fail("disprove did not produce a proof: " + dis.note);
                continue;
            }
            if (!contract.recv_fraud(dis.proof)) {
                fail("contract refused the fraud proof");
                continue;
            }
            res.frauds_proven++;
            note("  fraud proof accepted, chain rewound to round " +
                 std::to_string(contract.round()));
        }

        BatchOperator op(contract);
        std::vector<ContributeResult> accepted;
        for (uint32_t i = 0; i < cfg.contributors_per_batch; i++) {
            ContributeResult cr = off_contribute(op, contrib_rng);
            if (!cr.accepted()) {
                fail("contribution refused: " + std::string(contribute_status_name(cr.status)));
                continue;
            }
            accepted.push_back(cr);
        }
        BatchOperator::OnUpdateStatus status = op.server_on_update(contract);
        if (status != BatchOperator::OnUpdateStatus::Accepted) {
            fail("batch " + std::to_string(b) + " did not land on chain");
            continue;
        }
        res.rounds_accepted++;
        uint32_t t = contract.round();
        PublishedBatch pub = op.publish_stpk();
        PowersOfTau chain_pp = contract.fetch_pp(t);
        G1 chain_vk = contract.fetch_record(t).sub.vk_cur;
        uint32_t included = 0;
        for (const ContributeResult& cr : accepted) {
            res.inclusions_checked++;
            InclusionReport rep = check_inclusion(pub, chain_pp, chain_vk, cr.sent.pk);
            if (rep.included()) {
                res.inclusions_ok++;
                included++;
            } else {
                fail(std::string("inclusion check: ") + inclusion_status_name(rep.status));
            }
        }
        std::ostringstream line;
        line << "batch " << b << ": landed as round " << t << " with " << accepted.size()
             << " contributors, " << included << " inclusion checks passed";
        note(line.str());
    }

    res.gas_total = contract.gas_total();
    res.gas_csv = gas_rows(contract);
    res.contract_log = contract.serialize_log();
    res.events_jsonl = contract.log_json_lines();
    res.final_state = contract.state_bytes();
    res.state_digest_hex = to_hex(contract.state_digest());
    res.final_pp_hex = pp_to_hex(contract.fetch_pp(contract.round()));

    // The log must reproduce the exact final state when replayed.
    try {
        Contract replayed = Contract::replay(res.contract_log);
        if (!(replayed.state_digest() == contract.state_digest()))
            fail("replayed log does not reproduce the state digest");
    } catch (const std::exception& e) {
        fail(std::string("log replay threw: ") + e.what());
    }
    return res;
}

namespace {

void write_file(const std::string& path, const void* data, size_t len) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    if (!out) throw std::runtime_error("short write: " + path);
}

}  // namespace

std::vector<std::string> write_scenario_artifacts(const ScenarioConfig& cfg,
                                                  const ScenarioResult& result,
                                                  const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& text) {
        std::string path = dir + "/" + name;
        write_file(path, text.data(), text.size());
        written.push_back(path);
    };

    emit("scenario.json", cfg.to_json() + "\n");
    std::string log_path = dir + "/contract_log.bin";
    write_file(log_path, result.contract_log.data(), result.contract_log.size());
    written.push_back(log_path);
    emit("events.jsonl", result.events_jsonl);
    emit("gas.csv", result.gas_csv);
    std::string state_path = dir + "/state.bin";
    write_file(state_path, result.final_state.data(), result.final_state.size());
    written.push_back(state_path);

    nlohmann::json summary;
    summary["ok"] = result.ok;
    summary["rounds_accepted"] = result.rounds_accepted;
    summary["injections_landed"] = result.injections_landed;
    summary["frauds_proven"] = result.frauds_proven;
    summary["inclusions_checked"] = result.inclusions_checked;
    summary["inclusions_ok"] = result.inclusions_ok;
    summary["gas_total"] = result.gas_total;
    summary["state_digest"] = result.state_digest_hex;
    summary["notes"] = result.notes;
    emit("summary.json", summary.dump(2) + "\n");
    return written;
}

}  // namespace taulab
