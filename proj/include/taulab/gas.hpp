#pragma once

// EVM-style gas accounting for the on-chain side of the ceremony. The
// schedule mirrors mainnet precompile and intrinsic prices; estimators
// produce per-transaction cost reports for our optimistic update, for a
// prior fully-verifying update, and for a fraud-proof transaction, so the
// schemes can be compared size by size.

#include <cstdint>
#include <string>

#include "taulab/pot.hpp"

namespace taulab {

struct GasSchedule {
    uint64_t ecadd = 150;
    uint64_t ecmult = 6000;
    uint64_t ecpair_base = 45000;
    uint64_t ecpair_per_pair = 34000;
    uint64_t calldata_per_byte = 16;  // every byte charged at the nonzero rate
    uint64_t keccak_base = 30;
    uint64_t keccak_per_word = 6;  // 32-byte words, rounded up
    uint64_t fixed_tx_overhead = 21000;
    uint64_t calibration_per_byte = 0;  // extra per-calldata-byte overhead knob

    uint64_t ecpair(uint64_t pairs) const { return ecpair_base + ecpair_per_pair * pairs; }
    uint64_t keccak_words(uint64_t words) const { return keccak_base + keccak_per_word * words; }
    uint64_t keccak_bytes(uint64_t len) const { return keccak_words((len + 31) / 32); }
    uint64_t calldata(uint64_t len) const { return calldata_per_byte * len; }
};

// Widely used block gas limit; transactions above it cannot be mined.
inline constexpr uint64_t kBlockGasLimit = 30'000'000;

struct CostReport {
    std::string scheme;
    uint32_t n = 0, k = 0;
    uint64_t calldata = 0;
    uint64_t hashing = 0;
    uint64_t pairing = 0;
    uint64_t ecmult = 0;
    uint64_t overhead = 0;
    uint64_t total() const { return calldata + hashing + pairing + ecmult + overhead; }
    void add(const CostReport& other);  // column-wise accumulation
};

// Optimistic update: full string plus three proof elements as calldata,
// a rebuilt commitment tree (about 2d two-word hashes), and one pairing
// call with three pairs for the aggregated knowledge check.
CostReport estimate_update_ours(const CeremonyParams& params, const GasSchedule& sched = {});

// Prior fully-verifying update: per-element well-formedness checking on
// chain with 2n scalar multiplications and a single (4k - 2)-pair pairing
// call, plus string calldata and a 96-byte discrete-log proof.
CostReport estimate_update_prior(const CeremonyParams& params, const GasSchedule& sched = {});

// Fraud proof: four membership proofs (worst-case one G1 and three G2
// leaves) with log-depth sibling paths, their hash verification, and one
// 4-pair pairing call for the two pairing equality checks.
CostReport estimate_fraud(const CeremonyParams& params, const GasSchedule& sched = {});

std::string cost_csv_header();
std::string cost_csv_row(uint64_t round, const CostReport& report);

}  // namespace taulab
