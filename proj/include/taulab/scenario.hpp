#pragma once

// Deterministic end-to-end ceremony runner: a contract, a sequence of
// operator batches with honest contributors, optional scripted defect
// injections, and the watchdog flow that disproves and rewinds them. One
// seed fixes every byte of the run, so scenarios serve both as demos and
// as replayable regression fixtures.

#include <cstdint>
#include <string>
#include <vector>

#include "taulab/attacks.hpp"
#include "taulab/bytes.hpp"
#include "taulab/pot.hpp"

namespace taulab {

struct InjectionSpec {
    uint32_t round = 1;  // the batch slot the defect tries to land in (1-based)
    InjectMode mode = InjectMode::InconsistentQ1;
    uint32_t group_index = 0;   // ignored for none / inconsistent-q1
    uint32_t element_index = 0;
    bool operator==(const InjectionSpec&) const = default;
};

struct ScenarioConfig {
    uint32_t n = 8;
    uint32_t k = 2;
    uint32_t batches = 2;
    uint32_t contributors_per_batch = 3;
    uint64_t seed = 1;
    std::vector<InjectionSpec> injections;

    // Throws std::invalid_argument on malformed or out-of-range input.
    static ScenarioConfig from_json(const std::string& text);
    std::string to_json() const;
    bool operator==(const ScenarioConfig&) const = default;
};

struct ScenarioResult {
    bool ok = false;                  // every expectation below held
    std::vector<std::string> notes;   // one line per event
    uint32_t rounds_accepted = 0;     // honest batches that landed
    uint32_t injections_landed = 0;   // defective rounds the contract accepted
    uint32_t frauds_proven = 0;       // of those, disproved and rewound
    uint32_t inclusions_checked = 0;
    uint32_t inclusions_ok = 0;
    uint64_t gas_total = 0;
    std::string gas_csv;              // one cost row per on-chain transaction
    Bytes contract_log;
    std::string events_jsonl;
    Bytes final_state;
    std::string state_digest_hex;
    std::string final_pp_hex;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg);

// Writes config echo, binary log, JSON event mirror, gas CSV, state snapshot
// and a summary into dir (created if absent). Returns the paths written.
std::vector<std::string> write_scenario_artifacts(const ScenarioConfig& cfg,
                                                  const ScenarioResult& result,
                                                  const std::string& dir);

}  // namespace taulab
