#include "taulab/http_service.hpp"

#include <mutex>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace taulab {

namespace {

using nlohmann::json;

json pinpoint_to_json(const PinpointResult& p) {
    if (!p.ill) return nullptr;
    return json{{"group", p.group_index}, {"element", p.element_index}};
}

std::optional<Bytes> hex_field(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) return std::nullopt;
    return from_hex(j[key].get<std::string>());
}

std::optional<G1> g1_field(const json& j, const char* key) {
    std::optional<Bytes> b = hex_field(j, key);
    if (!b || b->size() != kG1Bytes) return std::nullopt;
    return g1_from_bytes(b->data(), b->size());
}

std::optional<G2> g2_field(const json& j, const char* key) {
    std::optional<Bytes> b = hex_field(j, key);
    if (!b || b->size() != kG2Bytes) return std::nullopt;
    return g2_from_bytes(b->data(), b->size());
}

}  // namespace

std::string contribution_to_json(const Contribution& c) {
    json j;
    j["pp"] = to_hex(pp_to_bytes(c.pp));
    j["sigma_prv"] = to_hex(g2_to_bytes(c.sigma_prv));
    j["sigma_cur"] = to_hex(g2_to_bytes(c.sigma_cur));
    j["pk"] = to_hex(g1_to_bytes(c.pk));
    j["pop"] = to_hex(g2_to_bytes(c.pop));
    return j.dump();
}

std::optional<Contribution> contribution_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    std::optional<Bytes> pp_bytes = hex_field(j, "pp");
    if (!pp_bytes) return std::nullopt;
    std::optional<PowersOfTau> pp = pp_from_bytes(*pp_bytes);
    std::optional<G2> sigma_prv = g2_field(j, "sigma_prv");
    std::optional<G2> sigma_cur = g2_field(j, "sigma_cur");
    std::optional<G1> pk = g1_field(j, "pk");
    std::optional<G2> pop = g2_field(j, "pop");
    if (!pp || !sigma_prv || !sigma_cur || !pk || !pop) return std::nullopt;
    return Contribution{std::move(*pp), *sigma_prv, *sigma_cur, *pk, *pop};
}

std::string published_batch_to_json(const PublishedBatch& b) {
    json j;
    j["base_round"] = b.base_round;
    j["pp"] = to_hex(pp_to_bytes(b.pp));
    j["vk_cur"] = to_hex(g1_to_bytes(b.vk_cur));
    j["keys"] = json::array();
    for (const PopKey& key : b.st_pk)
        j["keys"].push_back(
            json{{"pk", to_hex(g1_to_bytes(key.pk))}, {"pop", to_hex(g2_to_bytes(key.pop))}});
    return j.dump();
}

std::optional<PublishedBatch> published_batch_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    if (!j.contains("base_round") || !j["base_round"].is_number_unsigned())
        return std::nullopt;
    std::optional<Bytes> pp_bytes = hex_field(j, "pp");
    if (!pp_bytes) return std::nullopt;
    std::optional<PowersOfTau> pp = pp_from_bytes(*pp_bytes);
    std::optional<G1> vk = g1_field(j, "vk_cur");
    if (!pp || !vk || !j.contains("keys") || !j["keys"].is_array()) return std::nullopt;
    PublishedBatch b;
    b.base_round = j["base_round"].get<uint32_t>();
    b.pp = std::move(*pp);
    b.vk_cur = *vk;
    for (const json& kj : j["keys"]) {
        std::optional<G1> pk = g1_field(kj, "pk");
        std::optional<G2> pop = g2_field(kj, "pop");
        if (!pk || !pop) return std::nullopt;
        b.st_pk.push_back({*pk, *pop});
    }
    return b;
}

struct OperatorService::Impl {
    Contract& contract;
    BatchOperator op;
    std::mutex mu;
    httplib::Server server;
    std::thread worker;
    int port = -1;

    Impl(Contract& c, OperatorPolicy policy) : contract(c), op(c, policy) {
        server.Get("/state", [this](const httplib::Request&, httplib::Response& res) {
            std::scoped_lock lk(mu);
            json j;
            j["base_round"] = op.base_round();
            j["contributions"] = op.st_pk().size();
            j["vk_cur"] = to_hex(g1_to_bytes(op.vk_cur()));
            j["sigma_prv"] = to_hex(g2_to_bytes(op.sigma_prv()));
            j["sigma_cur"] = to_hex(g2_to_bytes(op.sigma_cur()));
            res.set_content(j.dump(), "application/json");
        });
        server.Get("/pp", [this](const httplib::Request&, httplib::Response& res) {
            std::scoped_lock lk(mu);
            Bytes b = pp_to_bytes(op.pp());
            res.set_content(std::string(b.begin(), b.end()), "application/octet-stream");
        });
        server.Get("/stpk", [this](const httplib::Request&, httplib::Response& res) {
            std::scoped_lock lk(mu);
            res.set_content(published_batch_to_json(op.publish_stpk()), "application/json");
        });
        server.Post("/contribute", [this](const httplib::Request& req,
                                          httplib::Response& res) {
            std::optional<Contribution> c = contribution_from_json(req.body);
            if (!c) {
                res.status = 400;
                res.set_content(json{{"error", "undecodable contribution"}}.dump(),
                                "application/json");
                return;
            }
            std::scoped_lock lk(mu);
            OffUpdateResult out = op.server_off_update(*c);
            json j;
            j["accepted"] = out.accepted();
            j["outcome"] = static_cast<int>(out.outcome);
            j["reason"] = off_update_outcome_name(out.outcome);
            j["pinpoint"] = pinpoint_to_json(out.pinpoint);
            res.set_content(j.dump(), "application/json");
        });
        server.Post("/finalize", [this](const httplib::Request&, httplib::Response& res) {
            std::scoped_lock lk(mu);
            BatchOperator::OnUpdateStatus st = op.server_on_update(contract);
            const char* name = "rejected";
            switch (st) {
                case BatchOperator::OnUpdateStatus::Accepted: name = "accepted"; break;
                case BatchOperator::OnUpdateStatus::Rejected: name = "rejected"; break;
                case BatchOperator::OnUpdateStatus::Superseded: name = "superseded"; break;
                case BatchOperator::OnUpdateStatus::EmptyBatch: name = "empty-batch"; break;
            }
            json j;
            j["status"] = name;
            j["round"] = contract.round();
            res.set_content(j.dump(), "application/json");
        });
    }
};

OperatorService::OperatorService(Contract& contract, OperatorPolicy policy)
    : impl_(std::make_unique<Impl>(contract, policy)) {}

OperatorService::~OperatorService() { stop(); }

bool OperatorService::start(const std::string& host, int port) {
    if (port == 0) {
        int bound = impl_->server.bind_to_any_port(host);
        if (bound <= 0) return false;
        impl_->port = bound;
    } else {
        if (!impl_->server.bind_to_port(host, port)) return false;
        impl_->port = port;
    }
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return true;
}

void OperatorService::stop() {
    if (impl_->worker.joinable()) {
        impl_->server.stop();
        impl_->worker.join();
    }
}

int OperatorService::port() const { return impl_->port; }

namespace {

json fetch_json(const std::string& host, int port, const std::string& path) {
    httplib::Client cli(host, port);
    httplib::Result res = cli.Get(path);
    if (!res || res->status != 200)
        throw std::runtime_error("GET " + path + " failed" +
                                 (res ? " with status " + std::to_string(res->status)
                                      : " (no connection)"));
    json j = json::parse(res->body, nullptr, false);
    if (j.is_discarded()) throw std::runtime_error("GET " + path + ": body is not JSON");
    return j;
}

}  // namespace

OperatorClient::State OperatorClient::fetch_state() const {
    json j = fetch_json(host_, port_, "/state");
    State st;
    if (!j.contains("base_round") || !j.contains("contributions"))
        throw std::runtime_error("/state: missing fields");
    st.base_round = j["base_round"].get<uint32_t>();
    st.contributions = j["contributions"].get<uint32_t>();
    std::optional<G1> vk = g1_field(j, "vk_cur");
    std::optional<G2> sp = g2_field(j, "sigma_prv");
    std::optional<G2> sc = g2_field(j, "sigma_cur");
    if (!vk || !sp || !sc) throw std::runtime_error("/state: undecodable aggregates");
    st.vk_cur = *vk;
    st.sigma_prv = *sp;
    st.sigma_cur = *sc;
    return st;
}

PowersOfTau OperatorClient::fetch_pp() const {
    httplib::Client cli(host_, port_);
    httplib::Result res = cli.Get("/pp");
    if (!res || res->status != 200) throw std::runtime_error("GET /pp failed");
    Bytes raw(res->body.begin(), res->body.end());
    std::optional<PowersOfTau> pp = pp_from_bytes(raw);
    if (!pp) throw std::runtime_error("/pp: undecodable string");
    return std::move(*pp);
}

PublishedBatch OperatorClient::fetch_published() const {
    json j = fetch_json(host_, port_, "/stpk");
    std::optional<PublishedBatch> b = published_batch_from_json(j.dump());
    if (!b) throw std::runtime_error("/stpk: undecodable batch");
    return std::move(*b);
}

OperatorClient::SubmitReply OperatorClient::submit(const Contribution& c) const {
    httplib::Client cli(host_, port_);
    httplib::Result res = cli.Post("/contribute", contribution_to_json(c), "application/json");
    if (!res || (res->status != 200 && res->status != 400))
        throw std::runtime_error("POST /contribute failed");
    json j = json::parse(res->body, nullptr, false);
    if (j.is_discarded()) throw std::runtime_error("/contribute: body is not JSON");
    if (res->status == 400)
        throw std::runtime_error("/contribute: " + j.value("error", std::string("rejected")));
    SubmitReply reply;
    reply.accepted = j.value("accepted", false);
    reply.outcome = static_cast<OffUpdateOutcome>(j.value("outcome", 1));
    reply.reason = j.value("reason", "");
    if (j.contains("pinpoint") && j["pinpoint"].is_object()) {
        reply.pinpoint.ill = true;
        reply.pinpoint.group_index = j["pinpoint"].value("group", 0u);
        reply.pinpoint.element_index = j["pinpoint"].value("element", 0u);
    }
    return reply;
}

OperatorClient::FinalizeReply OperatorClient::finalize() const {
    httplib::Client cli(host_, port_);
    httplib::Result res = cli.Post("/finalize", "", "application/json");
    if (!res || res->status != 200) throw std::runtime_error("POST /finalize failed");
    json j = json::parse(res->body, nullptr, false);
    if (j.is_discarded()) throw std::runtime_error("/finalize: body is not JSON");
    return {j.value("status", std::string("rejected")), j.value("round", 0u)};
}

ContributeResult http_contribute_with(const OperatorClient& client, const Fr& r,
                                      const Fr& sk) {
    ContributeResult res;
    OperatorClient::State st = client.fetch_state();
    PowersOfTau pp = client.fetch_pp();
    if (!prepare_contribution(pp, st.sigma_prv, st.sigma_cur, st.base_round, r, sk, res))
        return res;
    OperatorClient::SubmitReply reply = client.submit(res.sent);
    res.operator_outcome = reply.outcome;
    res.status =
        reply.accepted ? ContributeStatus::Accepted : ContributeStatus::OperatorRejected;
    if (reply.outcome == OffUpdateOutcome::RejectedIllFormed) res.pinpoint = reply.pinpoint;
    return res;
}

ContributeResult http_contribute(const OperatorClient& client, Drbg& rng) {
    Fr r = random_fr_nonzero(rng);
    Fr sk = random_fr_nonzero(rng);
    return http_contribute_with(client, r, sk);
}

}  // namespace taulab
