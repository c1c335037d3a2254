#include "taulab/gas.hpp"

#include "taulab/veccom.hpp"

namespace taulab {

void CostReport::add(const CostReport& other) {
    calldata += other.calldata;
    hashing += other.hashing;
    pairing += other.pairing;
    ecmult += other.ecmult;
    overhead += other.overhead;
}

namespace {

// Submitted proof elements ride along with the string: two G2 signatures
// and one G1 verification key.
constexpr uint64_t kUpdateProofBytes = 2 * kG2Bytes + kG1Bytes;  // 320

uint64_t pp_calldata_bytes(const CeremonyParams& p) {
    return uint64_t(p.n) * kG1Bytes + uint64_t(p.k) * kG2Bytes;
}

}  // namespace

CostReport estimate_update_ours(const CeremonyParams& params, const GasSchedule& sched) {
    CostReport r{.scheme = "ours", .n = params.n, .k = params.k};
    uint64_t bytes = pp_calldata_bytes(params) + kUpdateProofBytes;
    r.calldata = sched.calldata(bytes);
    // Rebuilding the commitment tree: d leaves plus up to d internal nodes,
    // modeled as two-word Keccak inputs.
    r.hashing = 2 * uint64_t(params.d()) * sched.keccak_bytes(64);
    r.pairing = sched.ecpair(3);
    r.overhead = sched.fixed_tx_overhead + sched.calibration_per_byte * bytes;
    return r;
}

CostReport estimate_update_prior(const CeremonyParams& params, const GasSchedule& sched) {
    CostReport r{.scheme = "prior", .n = params.n, .k = params.k};
    uint64_t bytes = pp_calldata_bytes(params) + 96;  // discrete-log proof
    r.calldata = sched.calldata(bytes);
    r.ecmult = 2 * uint64_t(params.n) * sched.ecmult;
    r.pairing = sched.ecpair(4 * uint64_t(params.k) - 2);
    r.overhead = sched.fixed_tx_overhead + sched.calibration_per_byte * bytes;
    return r;
}

CostReport estimate_fraud(const CeremonyParams& params, const GasSchedule& sched) {
    CostReport r{.scheme = "fraud", .n = params.n, .k = params.k};
    uint64_t h = proof_path_length(params);
    // Canonical worst-case shape: header (round u32, group u8, index u32)
    // plus four serialized membership proofs, one G1 leaf and three G2.
    uint64_t leaves[4] = {kG1Bytes, kG2Bytes, kG2Bytes, kG2Bytes};
    uint64_t bytes = 9;
    uint64_t leaf_hashing = 0;
    for (uint64_t leaf : leaves) {
        bytes += 8 + leaf + 1 + 32 * h;
        leaf_hashing += sched.keccak_bytes(8 + 4 + 4 + leaf);  // leaf preimage
    }
    r.calldata = sched.calldata(bytes);
    r.hashing = leaf_hashing + 4 * h * sched.keccak_bytes(64);
    r.pairing = sched.ecpair(4);
    r.overhead = sched.fixed_tx_overhead + sched.calibration_per_byte * bytes;
    return r;
}

std::string cost_csv_header() {
    return "round,scheme,n,k,calldata,hashing,pairing,ecmult,overhead,total";
}

std::string cost_csv_row(uint64_t round, const CostReport& r) {
    std::string out = std::to_string(round);
    out += ',';
    out += r.scheme;
    out += ',';
    out += std::to_string(r.n);
    out += ',';
    out += std::to_string(r.k);
    out += ',';
    out += std::to_string(r.calldata);
    out += ',';
    out += std::to_string(r.hashing);
    out += ',';
    out += std::to_string(r.pairing);
    out += ',';
    out += std::to_string(r.ecmult);
    out += ',';
    out += std::to_string(r.overhead);
    out += ',';
    out += std::to_string(r.total());
    return out;
}

}  // namespace taulab
