// Command-line front end: scenario runs, gas sweeps, log replay and audit,
// fraud-proof construction and submission, a live operator service, and the
// scripted attack demos. Every command that verifies something exits 0 only
// when the verification holds.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "taulab/attacks.hpp"
#include "taulab/contract.hpp"
#include "taulab/contributor.hpp"
#include "taulab/gas.hpp"
#include "taulab/http_service.hpp"
#include "taulab/scenario.hpp"
#include "taulab/veccom.hpp"

using namespace taulab;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out.good()) throw std::runtime_error("cannot write " + path);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

Bytes read_bytes(const std::string& path) {
    std::string s = read_file(path);
    return Bytes(s.begin(), s.end());
}

void print_chain_summary(const Contract& contract) {
    std::cout << "rounds accepted: " << contract.round() << "\n";
    std::cout << "records logged:  " << contract.records().size() << "\n";
    std::cout << "gas total:       " << contract.gas_total() << "\n";
    std::cout << "state digest:    " << to_hex(contract.state_digest()) << "\n";
}

std::atomic<bool> g_stop{false};
void handle_stop(int) { g_stop.store(true); }

int cmd_run(const std::string& config_path, const std::string& out_dir) {
    ScenarioConfig cfg;
    if (!config_path.empty()) cfg = ScenarioConfig::from_json(read_file(config_path));
    ScenarioResult res = run_scenario(cfg);
    for (const std::string& note : res.notes) std::cout << note << "\n";
    std::cout << "rounds accepted:   " << res.rounds_accepted << "\n"
              << "injections landed: " << res.injections_landed << "\n"
              << "frauds proven:     " << res.frauds_proven << "\n"
              << "inclusions:        " << res.inclusions_ok << "/" << res.inclusions_checked
              << "\n"
              << "gas total:         " << res.gas_total << "\n"
              << "state digest:      " << res.state_digest_hex << "\n";
    if (!out_dir.empty()) {
        for (const std::string& path : write_scenario_artifacts(cfg, res, out_dir))
            std::cout << "wrote " << path << "\n";
    }
    std::cout << (res.ok ? "scenario ok" : "scenario FAILED") << "\n";
    return res.ok ? 0 : 1;
}

int cmd_gas(uint32_t min_exp, uint32_t max_exp, uint32_t k, const std::string& out_path) {
    if (min_exp > max_exp) throw std::runtime_error("--min-exp must not exceed --max-exp");
    if (max_exp > 24) throw std::runtime_error("--max-exp capped at 24");
    std::ostringstream csv;
    // Same columns as the ceremony gas log, keyed by total degree d = n + k.
    std::string header = cost_csv_header();
    csv << "d" << header.substr(header.find(',')) << "\n";
    for (uint32_t e = min_exp; e <= max_exp; e++) {
        uint64_t d = uint64_t{1} << e;
        if (d <= k) throw std::runtime_error("degree 2^" + std::to_string(e) + " not above k");
        CeremonyParams params{static_cast<uint32_t>(d - k), k};
        csv << cost_csv_row(d, estimate_update_ours(params)) << "\n";
        csv << cost_csv_row(d, estimate_update_prior(params)) << "\n";
        csv << cost_csv_row(d, estimate_fraud(params)) << "\n";
    }
    if (out_path.empty())
        std::cout << csv.str();
    else {
        write_file(out_path, csv.str());
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_replay(const std::string& log_path, const std::string& expect_digest) {
    Contract contract = Contract::replay(read_bytes(log_path));
    print_chain_summary(contract);
    if (!expect_digest.empty() && to_hex(contract.state_digest()) != expect_digest) {
        std::cerr << "digest mismatch: expected " << expect_digest << "\n";
        return 1;
    }
    return 0;
}

int cmd_audit(const std::string& log_path, uint32_t round) {
    Contract contract = Contract::replay(read_bytes(log_path));
    if (round == 0 || round > contract.round())
        throw std::runtime_error("round is not on the current chain");
    const UpdateRecord& rec = contract.fetch_record(round);
    std::cout << "round " << round << ": outcome " << update_outcome_name(rec.outcome)
              << (rec.voided ? " (voided)" : "") << ", gas " << rec.gas_charged << "\n";
    if (commit_pp(rec.sub.pp).root != contract.compp_history()[round - 1].root) {
        std::cout << "logged string does not match the stored commitment\n";
        return 1;
    }
    PinpointResult where = pinpoint_ill_formed(rec.sub.pp);
    if (!where.ill) {
        std::cout << "string is well-formed\n";
        return 0;
    }
    std::cout << "ill-formed at group " << where.group_index << ", element "
              << where.element_index << "\n";
    return 1;
}

int cmd_disprove(const std::string& log_path, uint32_t round, const std::string& out_path) {
    Contract contract = Contract::replay(read_bytes(log_path));
    DisproveResult res = disprove(contract, round);
    std::cout << res.note << "\n";
    if (!res.proof_ready) return 1;
    std::cout << "defect at group " << res.where.group_index << ", element "
              << res.where.element_index << "\n";
    if (!contract.fraud_verify(res.proof)) {
        std::cerr << "contract refused the assembled proof\n";
        return 1;
    }
    if (!out_path.empty()) {
        Bytes enc = fraud_proof_to_bytes(res.proof);
        write_file(out_path, std::string(enc.begin(), enc.end()));
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_submit_fraud(const std::string& log_path, const std::string& proof_path,
                     const std::string& out_log) {
    Contract contract = Contract::replay(read_bytes(log_path));
    std::optional<FraudProof> proof = fraud_proof_from_bytes(read_bytes(proof_path));
    if (!proof) throw std::runtime_error("proof file does not decode");
    bool accepted = contract.recv_fraud(*proof);
    std::cout << (accepted ? "fraud proof accepted; chain rewound\n"
                           : "fraud proof rejected\n");
    print_chain_summary(contract);
    if (!out_log.empty()) {
        Bytes log = contract.serialize_log();
        write_file(out_log, std::string(log.begin(), log.end()));
        std::cout << "wrote " << out_log << "\n";
    }
    return accepted ? 0 : 1;
}

int cmd_serve(const std::string& host, int port, uint32_t n, uint32_t k, bool skip_pops) {
    Contract contract(CeremonyParams{n, k});
    OperatorPolicy policy;
    policy.verify_pops = !skip_pops;
    OperatorService service(contract, policy);
    if (!service.start(host, port)) throw std::runtime_error("cannot bind service");
    std::cout << "operator listening on " << host << ":" << service.port() << " (n=" << n
              << ", k=" << k << ")" << std::endl;
    std::signal(SIGINT, handle_stop);
    std::signal(SIGTERM, handle_stop);
    while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    service.stop();
    std::cout << "stopped; contract at round " << contract.round() << "\n";
    return 0;
}

int cmd_contribute(const std::string& host, int port, uint64_t seed, bool have_seed,
                   bool insecure_debug) {
    OperatorClient client(host, port);
    Drbg rng = [&] {
        if (have_seed) return Drbg::from_u64(seed);
        std::random_device rd;
        Bytes entropy;
        for (int i = 0; i < 8; i++) append_u32be(entropy, rd());
        return Drbg(entropy);
    }();
    ContributeResult res = http_contribute(client, rng);
    std::cout << contribute_status_name(res.status) << "\n";
    if (res.status == ContributeStatus::LocalIllFormed)
        std::cout << "served string ill-formed at group " << res.pinpoint.group_index
                  << ", element " << res.pinpoint.element_index << "\n";
    if (res.status == ContributeStatus::OperatorRejected)
        std::cout << off_update_outcome_name(res.operator_outcome) << "\n";
    if (!res.accepted()) return 1;
    std::cout << "pk: " << to_hex(g1_to_bytes(res.sent.pk)) << "\n";
    if (insecure_debug) {
        // Printing the toxic waste defeats the ceremony; debug runs only.
        std::cout << "r:  " << to_hex(res.secrets.r.to_bytes()) << "\n"
                  << "sk: " << to_hex(res.secrets.sk.to_bytes()) << "\n";
    }
    return 0;
}

int cmd_check_inclusion(const std::string& host, int port, const std::string& pk_hex,
                        const std::string& log_path, uint32_t round) {
    std::optional<Bytes> raw = from_hex(pk_hex);
    if (!raw) throw std::runtime_error("--pk is not valid hex");
    std::optional<G1> pk = g1_from_bytes(raw->data(), raw->size());
    if (!pk) throw std::runtime_error("--pk does not decode to a curve point");
    OperatorClient client(host, port);
    PublishedBatch pub = client.fetch_published();
    PowersOfTau chain_pp = pub.pp;
    G1 chain_vk = pub.vk_cur;
    if (!log_path.empty()) {
        // Cross-check the operator claims against the on-chain record.
        Contract contract = Contract::replay(read_bytes(log_path));
        uint32_t t = round == 0 ? contract.round() : round;
        chain_pp = contract.fetch_pp(t);
        chain_vk = contract.fetch_record(t).sub.vk_cur;
    }
    InclusionReport rep = check_inclusion(pub, chain_pp, chain_vk, *pk);
    std::cout << inclusion_status_name(rep.status) << "\n";
    if (rep.status == InclusionStatus::IllFormed)
        std::cout << "ill-formed at group " << rep.pinpoint.group_index << ", element "
                  << rep.pinpoint.element_index << "\n";
    return rep.included() ? 0 : 1;
}

int cmd_attacks_list() {
    for (const AttackInfo& info : list_attacks())
        std::cout << info.name << "\n    " << info.summary << "\n";
    return 0;
}

int cmd_attacks_run(const std::string& name, uint64_t seed) {
    AttackRunResult res = run_attack(name, seed);
    std::cout << res.report;
    if (res.report.empty() || res.report.back() != '\n') std::cout << "\n";
    std::cout << (res.defenses_held ? "defenses held" : "DEFENSES BREACHED") << "\n";
    return res.defenses_held ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"powers-of-tau ceremony lab: optimistic on-chain updates, batched "
                 "off-chain aggregation, fraud proofs, and attack demos"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    CLI::App* run = app.add_subcommand("run", "run a scripted ceremony scenario");
    run->add_option("--config", config_path, "scenario config JSON; defaults when omitted")
        ->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "directory for run artifacts");

    CLI::App* config = app.add_subcommand("config", "print the default scenario config");

    uint32_t min_exp = 6, max_exp = 12, gas_k = 2;
    std::string gas_out;
    CLI::App* gas = app.add_subcommand("gas", "estimate per-update and fraud-proof gas "
                                              "across string degrees");
    gas->add_option("--min-exp", min_exp, "smallest degree as a power of two");
    gas->add_option("--max-exp", max_exp, "largest degree as a power of two");
    gas->add_option("--k", gas_k, "number of second-group powers");
    gas->add_option("--out", gas_out, "write CSV here instead of stdout");

    std::string log_path, expect_digest;
    CLI::App* replay = app.add_subcommand("replay", "re-execute a contract log and print "
                                                    "the resulting state");
    replay->add_option("--log", log_path, "binary contract log")->required()
        ->check(CLI::ExistingFile);
    replay->add_option("--expect-digest", expect_digest, "fail unless the replayed state "
                                                         "digest equals this hex value");

    std::string audit_log;
    uint32_t audit_round = 0;
    CLI::App* audit = app.add_subcommand("audit", "check one accepted round for "
                                                  "well-formedness");
    audit->add_option("--log", audit_log, "binary contract log")->required()
        ->check(CLI::ExistingFile);
    audit->add_option("--round", audit_round, "round to audit, 1-based")->required();

    std::string dis_log, dis_out;
    uint32_t dis_round = 0;
    CLI::App* dis = app.add_subcommand("disprove", "build a fraud proof against an "
                                                   "ill-formed accepted round");
    dis->add_option("--log", dis_log, "binary contract log")->required()
        ->check(CLI::ExistingFile);
    dis->add_option("--round", dis_round, "round to challenge, 1-based")->required();
    dis->add_option("--out", dis_out, "write the serialized proof here");

    std::string sf_log, sf_proof, sf_out;
    CLI::App* sf = app.add_subcommand("submit-fraud", "apply a fraud proof to a replayed "
                                                      "chain and rewind it");
    sf->add_option("--log", sf_log, "binary contract log")->required()
        ->check(CLI::ExistingFile);
    sf->add_option("--proof", sf_proof, "serialized fraud proof")->required()
        ->check(CLI::ExistingFile);
    sf->add_option("--out", sf_out, "write the rewound log here");

    std::string serve_host = "127.0.0.1";
    int serve_port = 8080;
    uint32_t serve_n = 8, serve_k = 2;
    bool skip_pops = false;
    CLI::App* serve = app.add_subcommand("serve", "run a live operator over HTTP");
    serve->add_option("--host", serve_host, "bind address");
    serve->add_option("--port", serve_port, "bind port; 0 picks a free one");
    serve->add_option("--n", serve_n, "first-group powers");
    serve->add_option("--k", serve_k, "second-group powers");
    serve->add_flag("--skip-pop-checks", skip_pops,
                    "accept contributions without possession proofs (attack demos only)");

    std::string c_host = "127.0.0.1";
    int c_port = 8080;
    uint64_t c_seed = 0;
    bool insecure_debug = false;
    CLI::App* contrib = app.add_subcommand("contribute", "audit the served string and "
                                                         "submit one contribution");
    contrib->add_option("--host", c_host, "operator address");
    contrib->add_option("--port", c_port, "operator port");
    CLI::Option* seed_opt = contrib->add_option("--seed", c_seed,
                                                "derive the secrets from this seed "
                                                "(reproducible; debug runs only)");
    contrib->add_flag("--insecure-debug", insecure_debug,
                      "print the secret exponents after submitting");

    std::string ci_host = "127.0.0.1", ci_pk, ci_log;
    int ci_port = 8080;
    uint32_t ci_round = 0;
    CLI::App* ci = app.add_subcommand("check-inclusion", "verify own key survived into "
                                                         "the published batch");
    ci->add_option("--host", ci_host, "operator address");
    ci->add_option("--port", ci_port, "operator port");
    ci->add_option("--pk", ci_pk, "own public key, hex")->required();
    ci->add_option("--log", ci_log, "contract log to cross-check against")
        ->check(CLI::ExistingFile);
    ci->add_option("--round", ci_round, "on-chain round to check against; latest when 0");

    CLI::App* attacks = app.add_subcommand("attacks", "scripted attacks and the defenses "
                                                      "that stop them");
    attacks->require_subcommand(1);
    CLI::App* at_list = attacks->add_subcommand("list", "list the scripted attacks");
    std::string at_name;
    uint64_t at_seed = 7;
    CLI::App* at_run = attacks->add_subcommand("run", "run one scripted attack");
    at_run->add_option("name", at_name, "attack name from the list")->required();
    at_run->add_option("--seed", at_seed, "randomness seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, out_dir);
        if (*config) {
            std::cout << ScenarioConfig{}.to_json() << "\n";
            return 0;
        }
        if (*gas) return cmd_gas(min_exp, max_exp, gas_k, gas_out);
        if (*replay) return cmd_replay(log_path, expect_digest);
        if (*audit) return cmd_audit(audit_log, audit_round);
        if (*dis) return cmd_disprove(dis_log, dis_round, dis_out);
        if (*sf) return cmd_submit_fraud(sf_log, sf_proof, sf_out);
        if (*serve) return cmd_serve(serve_host, serve_port, serve_n, serve_k, skip_pops);
        if (*contrib)
            return cmd_contribute(c_host, c_port, c_seed, seed_opt->count() > 0,
                                  insecure_debug);
        if (*ci) return cmd_check_inclusion(ci_host, ci_port, ci_pk, ci_log, ci_round);
        if (*attacks) {
            if (*at_list) return cmd_attacks_list();
            if (*at_run) return cmd_attacks_run(at_name, at_seed);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
