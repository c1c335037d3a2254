#include "taulab/contract.hpp"

#include <map>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "taulab/keccak.hpp"

namespace taulab {

const char* update_outcome_name(UpdateOutcome outcome) {
    switch (outcome) {
        case UpdateOutcome::Accepted: return "accepted";
        case UpdateOutcome::RejectedMalformed: return "rejected: dimension mismatch";
        case UpdateOutcome::RejectedPairing: return "rejected: knowledge check failed";
        case UpdateOutcome::RejectedDegenerate: return "rejected: degenerate first power";
    }
    return "unknown";
}

Contract::Contract(const CeremonyParams& params, GasSchedule sched, ContractPolicy policy)
    : params_(params), sched_(sched), policy_(policy) {
    if (params.n < 1 || params.k < 1 || params.n > kMaxPowers || params.k > kMaxPowers)
        throw std::invalid_argument("ceremony params out of range");
    vk_pre_ = G1::generator();
    sigma_prv_ = G2::generator();
    snapshots_.push_back({vk_pre_, sigma_prv_});
    CostReport deploy{.scheme = "setup"};
    deploy.overhead = sched_.fixed_tx_overhead;
    uint64_t gas = charge(deploy);
    log_.push_back(SetupEntry{params_, gas});
}

uint64_t Contract::charge(const CostReport& report) {
    gas_.add(report);
    return report.total();
}

// Fold scalars are bound to the stored key and the entire submission head:
// vk_pre | vk_cur | sigma_prv' | sigma_cur' | Q_1' | j, so neither side can
// grind one aggregate against the other.
void Contract::derive_rhos(const UpdateSubmission& sub, Fr& rho1, Fr& rho2) const {
    Bytes head;
    append(head, g1_to_bytes(vk_pre_));
    append(head, g1_to_bytes(sub.vk_cur));
    append(head, g2_to_bytes(sub.sigma_prv));
    append(head, g2_to_bytes(sub.sigma_cur));
    append(head, g2_to_bytes(sub.pp.g2_powers[0]));
    Bytes in1 = head;
    append_u8(in1, 1);
    rho1 = hash_to_scalar(in1);
    Bytes in2 = head;
    append_u8(in2, 2);
    rho2 = hash_to_scalar(in2);
}

UpdateOutcome Contract::update(const UpdateSubmission& sub) {
    uint64_t gas = charge(estimate_update_ours(params_, sched_));
    uint32_t t = round() + 1;
    UpdateRecord rec;
    rec.round = t;
    rec.sub = sub;
    rec.gas_charged = gas;
    if (sub.pp.params() != params_) {
        rec.outcome = UpdateOutcome::RejectedMalformed;
    } else {
        derive_rhos(sub, rec.rho1, rec.rho2);
        G1 vk_star;
        G2 sigma_star;
        if (policy_.rho_fold) {
            vk_star = g1_add(g1_mul(vk_pre_, rec.rho1), g1_mul(sub.vk_cur, rec.rho2));
            sigma_star = g2_add(g2_mul(sub.sigma_prv, rec.rho1), g2_mul(sub.sigma_cur, rec.rho2));
        } else {
            vk_star = g1_add(vk_pre_, sub.vk_cur);
            sigma_star = g2_add(sub.sigma_prv, sub.sigma_cur);
        }
        if (!non_degen_check(sub.pp)) {
            rec.outcome = UpdateOutcome::RejectedDegenerate;
        } else if (!multi_pair_check({{G1::generator(), sigma_star, false},
                                      {vk_star, sub.pp.g2_powers[0], true}})) {
            rec.outcome = UpdateOutcome::RejectedPairing;
        } else {
            rec.outcome = UpdateOutcome::Accepted;
            vk_pre_ = vk_star;
            sigma_prv_ = sigma_star;
            rec.compp = commit_pp(sub.pp);
            compp_.push_back(rec.compp);
            snapshots_.push_back({vk_pre_, sigma_prv_});
        }
    }
    records_.push_back(rec);
    log_.push_back(UpdateEntry{sub, rec.outcome, gas});
    return rec.outcome;
}

bool Contract::fraud_verify(const FraudProof& f) const {
    if (f.t < 1 || f.t > compp_.size()) return false;
    bool g1_case = f.group_index == 1 && f.element_index >= 1 && f.element_index <= params_.n;
    bool g2_case = f.group_index == 2 && f.element_index >= 2 && f.element_index <= params_.k;
    if (!g1_case && !g2_case) return false;
    const Commitment& commitment = compp_[f.t - 1];
    if (f.proofs.empty()) return false;
    std::map<std::pair<uint32_t, uint32_t>, const Bytes*> leaves;
    for (const MembershipProof& p : f.proofs) {
        if (!verify_membership(params_, commitment, p)) return false;
        leaves[{p.group_index, p.element_index}] = &p.leaf_bytes;
    }
    auto get_g1 = [&](uint32_t ei) -> std::optional<G1> {
        auto it = leaves.find({1, ei});
        if (it == leaves.end()) return std::nullopt;
        return g1_from_bytes(*it->second);
    };
    auto get_g2 = [&](uint32_t ei) -> std::optional<G2> {
        auto it = leaves.find({2, ei});
        if (it == leaves.end()) return std::nullopt;
        return g2_from_bytes(*it->second);
    };
    auto p1 = get_g1(1);
    auto q1 = get_g2(1);
    if (!p1 || !q1) return false;
    // Anchor: the two chains must agree on tau. A violation alone proves
    // fraud, whatever element the challenge named.
    if (!multi_pair_check({{*p1, G2::generator(), false}, {G1::generator(), *q1, true}}))
        return true;
    if (g1_case) {
        auto cur = get_g1(f.element_index);
        if (!cur) return false;
        G1 prev = G1::generator();
        if (f.element_index >= 2) {
            auto pv = get_g1(f.element_index - 1);
            if (!pv) return false;
            prev = *pv;
        }
        return !multi_pair_check({{*cur, G2::generator(), false}, {prev, *q1, true}});
    }
    auto cur = get_g2(f.element_index);
    auto prev = get_g2(f.element_index - 1);
    if (!cur || !prev) return false;
    return !multi_pair_check({{G1::generator(), *cur, false}, {*p1, *prev, true}});
}

bool Contract::recv_fraud(const FraudProof& proof) {
    uint64_t gas = charge(estimate_fraud(params_, sched_));
    bool ok = fraud_verify(proof);
    if (ok) {
        uint32_t t = proof.t;
        compp_.resize(t - 1);
        snapshots_.resize(t);
        vk_pre_ = snapshots_[t - 1].vk_pre;
        sigma_prv_ = snapshots_[t - 1].sigma_prv;
        for (UpdateRecord& rec : records_)
            if (rec.accepted() && !rec.voided && rec.round >= t) rec.voided = true;
    }
    log_.push_back(FraudEntry{proof, ok, gas});
    return ok;
}

PowersOfTau Contract::fetch_pp(uint32_t t) const {
    if (t == 0) return init_pp(params_);
    return fetch_record(t).sub.pp;
}

const UpdateRecord& Contract::fetch_record(uint32_t t) const {
    const UpdateRecord* voided_match = nullptr;
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
        if (it->round != t || !it->accepted()) continue;
        if (!it->voided) return *it;
        if (!voided_match) voided_match = &*it;
    }
    if (voided_match) return *voided_match;
    throw std::out_of_range("round was never accepted");
}

FraudProof build_fraud_proof(const PowersOfTau& pp, uint32_t t, const PinpointResult& where) {
    if (!where.ill) throw std::invalid_argument("nothing to disprove");
    FraudProof f;
    f.t = t;
    f.group_index = where.group_index;
    f.element_index = where.element_index;
    f.proofs.push_back(open_membership(pp, 1, 1));
    f.proofs.push_back(open_membership(pp, 2, 1));
    if (where.group_index == 1) {
        if (where.element_index >= 2)
            f.proofs.push_back(open_membership(pp, 1, where.element_index - 1));
        f.proofs.push_back(open_membership(pp, 1, where.element_index));
    } else if (where.group_index == 2) {
        if (where.element_index < 2) throw std::invalid_argument("no chain relation at Q_1");
        f.proofs.push_back(open_membership(pp, 2, where.element_index - 1));
        f.proofs.push_back(open_membership(pp, 2, where.element_index));
    } else {
        throw std::invalid_argument("bad group index");
    }
    return f;
}

Bytes fraud_proof_to_bytes(const FraudProof& proof) {
    Bytes out;
    append_u32be(out, proof.t);
    append_u8(out, static_cast<uint8_t>(proof.group_index));
    append_u32be(out, proof.element_index);
    append_u8(out, static_cast<uint8_t>(proof.proofs.size()));
    for (const MembershipProof& p : proof.proofs) {
        Bytes enc = proof_to_bytes(p);
        append_u32be(out, static_cast<uint32_t>(enc.size()));
        append(out, enc);
    }
    return out;
}

std::optional<FraudProof> fraud_proof_from_bytes(const Bytes& data) {
    if (data.size() < 10) return std::nullopt;
    FraudProof f;
    f.t = read_u32be(data.data());
    f.group_index = data[4];
    f.element_index = read_u32be(data.data() + 5);
    size_t count = data[9];
    if (count > 16) return std::nullopt;
    size_t pos = 10;
    for (size_t i = 0; i < count; i++) {
        if (data.size() < pos + 4) return std::nullopt;
        size_t len = read_u32be(data.data() + pos);
        pos += 4;
        if (len > data.size() - pos) return std::nullopt;
        auto p = proof_from_bytes(Bytes(data.begin() + pos, data.begin() + pos + len));
        if (!p) return std::nullopt;
        f.proofs.push_back(std::move(*p));
        pos += len;
    }
    if (pos != data.size()) return std::nullopt;
    return f;
}

namespace {
constexpr uint8_t kLogSetup = 1;
constexpr uint8_t kLogUpdate = 2;
constexpr uint8_t kLogFraud = 3;

Bytes submission_to_bytes(const UpdateSubmission& sub) {
    Bytes out;
    Bytes pp = pp_to_bytes(sub.pp);
    append_u32be(out, static_cast<uint32_t>(pp.size()));
    append(out, pp);
    append(out, g2_to_bytes(sub.sigma_prv));
    append(out, g2_to_bytes(sub.sigma_cur));
    append(out, g1_to_bytes(sub.vk_cur));
    return out;
}

std::optional<UpdateSubmission> submission_from_bytes(const uint8_t* p, size_t len) {
    if (len < 4) return std::nullopt;
    size_t pp_len = read_u32be(p);
    if (len != 4 + pp_len + 2 * kG2Bytes + kG1Bytes) return std::nullopt;
    UpdateSubmission sub;
    auto pp = pp_from_bytes(Bytes(p + 4, p + 4 + pp_len));
    if (!pp) return std::nullopt;
    sub.pp = std::move(*pp);
    const uint8_t* q = p + 4 + pp_len;
    auto sp = g2_from_bytes(q, kG2Bytes);
    auto sc = g2_from_bytes(q + kG2Bytes, kG2Bytes);
    auto vk = g1_from_bytes(q + 2 * kG2Bytes, kG1Bytes);
    if (!sp || !sc || !vk) return std::nullopt;
    sub.sigma_prv = *sp;
    sub.sigma_cur = *sc;
    sub.vk_cur = *vk;
    return sub;
}
}  // namespace

Bytes Contract::serialize_log() const {
    Bytes out;
    for (const LogEntry& entry : log_) {
        Bytes payload;
        if (const auto* s = std::get_if<SetupEntry>(&entry)) {
            append_u8(payload, kLogSetup);
            append_u32be(payload, s->params.n);
            append_u32be(payload, s->params.k);
            append_u64be(payload, s->gas);
        } else if (const auto* u = std::get_if<UpdateEntry>(&entry)) {
            append_u8(payload, kLogUpdate);
            append(payload, submission_to_bytes(u->sub));
            append_u8(payload, static_cast<uint8_t>(u->outcome));
            append_u64be(payload, u->gas);
        } else {
            const auto& fr = std::get<FraudEntry>(entry);
            append_u8(payload, kLogFraud);
            Bytes enc = fraud_proof_to_bytes(fr.proof);
            append_u32be(payload, static_cast<uint32_t>(enc.size()));
            append(payload, enc);
            append_u8(payload, fr.accepted ? 1 : 0);
            append_u64be(payload, fr.gas);
        }
        append_u32be(out, static_cast<uint32_t>(payload.size()));
        append(out, payload);
    }
    return out;
}

std::string Contract::log_json_lines() const {
    std::string out;
    for (const LogEntry& entry : log_) {
        nlohmann::json j;
        if (const auto* s = std::get_if<SetupEntry>(&entry)) {
            j["type"] = "setup";
            j["n"] = s->params.n;
            j["k"] = s->params.k;
            j["gas"] = s->gas;
        } else if (const auto* u = std::get_if<UpdateEntry>(&entry)) {
            j["type"] = "update";
            j["outcome"] = update_outcome_name(u->outcome);
            j["pp_commit"] = to_hex(commit_pp(u->sub.pp).root);
            j["gas"] = u->gas;
        } else {
            const auto& fr = std::get<FraudEntry>(entry);
            j["type"] = "fraud";
            j["round"] = fr.proof.t;
            j["group"] = fr.proof.group_index;
            j["element"] = fr.proof.element_index;
            j["outcome"] = fr.accepted ? "rewound" : "rejected";
            j["gas"] = fr.gas;
        }
        out += j.dump();
        out += '\n';
    }
    return out;
}

Bytes Contract::state_bytes() const {
    Bytes out;
    append(out, std::string("TAUCST"));
    append_u32be(out, params_.n);
    append_u32be(out, params_.k);
    append_u32be(out, round());
    append(out, g1_to_bytes(vk_pre_));
    append(out, g2_to_bytes(sigma_prv_));
    append_u32be(out, static_cast<uint32_t>(compp_.size()));
    for (const Commitment& c : compp_) append(out, c.root);
    append_u32be(out, static_cast<uint32_t>(snapshots_.size()));
    for (const Snapshot& s : snapshots_) {
        append(out, g1_to_bytes(s.vk_pre));
        append(out, g2_to_bytes(s.sigma_prv));
    }
    append_u64be(out, gas_total());
    return out;
}

Digest Contract::state_digest() const { return keccak256(state_bytes()); }

Contract Contract::replay(const Bytes& log_bytes, GasSchedule sched, ContractPolicy policy) {
    std::optional<Contract> contract;
    size_t pos = 0;
    size_t entries = 0;
    while (pos < log_bytes.size()) {
        if (log_bytes.size() - pos < 4) throw std::runtime_error("truncated log length");
        size_t len = read_u32be(log_bytes.data() + pos);
        pos += 4;
        if (len < 1 || len > log_bytes.size() - pos) throw std::runtime_error("bad log entry length");
        const uint8_t* p = log_bytes.data() + pos;
        uint8_t type = p[0];
        if (entries == 0) {
            if (type != kLogSetup || len != 1 + 4 + 4 + 8)
                throw std::runtime_error("log must start with a setup entry");
            CeremonyParams params{read_u32be(p + 1), read_u32be(p + 5)};
            uint64_t gas = read_u64be(p + 9);
            contract.emplace(params, sched, policy);
            if (contract->gas_total() != gas)
                throw std::runtime_error("setup gas does not reproduce");
        } else if (type == kLogSetup) {
            throw std::runtime_error("duplicate setup entry");
        } else if (type == kLogUpdate) {
            if (len < 1 + 1 + 8) throw std::runtime_error("short update entry");
            auto sub = submission_from_bytes(p + 1, len - 10);
            if (!sub) throw std::runtime_error("bad update payload");
            UpdateOutcome logged_outcome = static_cast<UpdateOutcome>(p[len - 9]);
            uint64_t logged_gas = read_u64be(p + len - 8);
            uint64_t before = contract->gas_total();
            UpdateOutcome outcome = contract->update(*sub);
            if (outcome != logged_outcome || contract->gas_total() - before != logged_gas)
                throw std::runtime_error("update outcome or gas does not reproduce");
        } else if (type == kLogFraud) {
            if (len < 1 + 4 + 1 + 8) throw std::runtime_error("short fraud entry");
            size_t enc_len = read_u32be(p + 1);
            if (len != 1 + 4 + enc_len + 1 + 8) throw std::runtime_error("bad fraud entry length");
            auto proof = fraud_proof_from_bytes(Bytes(p + 5, p + 5 + enc_len));
            if (!proof) throw std::runtime_error("bad fraud payload");
            bool logged_ok = p[5 + enc_len] != 0;
            uint64_t logged_gas = read_u64be(p + len - 8);
            uint64_t before = contract->gas_total();
            bool ok = contract->recv_fraud(*proof);
            if (ok != logged_ok || contract->gas_total() - before != logged_gas)
                throw std::runtime_error("fraud outcome or gas does not reproduce");
        } else {
            throw std::runtime_error("unknown log entry type");
        }
        pos += len;
        entries++;
    }
    if (!contract) throw std::runtime_error("empty log");
    return std::move(*contract);
}

}  // namespace taulab
