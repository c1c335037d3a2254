#pragma once

// HTTP front end for the aggregation server, plus the matching client used
// by the CLI. JSON bodies carry group elements as hex; the string itself
// travels in its binary serialization.
//
// Endpoints:
//   GET  /state       counters and running aggregates
//   GET  /pp          current string (application/octet-stream)
//   GET  /stpk        published batch: string, aggregate key, key list
//   POST /contribute  one contribution; replies with the verdict
//   POST /finalize    push the batch on chain

#include <memory>
#include <optional>
#include <string>

#include "taulab/batch_operator.hpp"
#include "taulab/contract.hpp"
#include "taulab/contributor.hpp"

namespace taulab {

std::string contribution_to_json(const Contribution& c);
std::optional<Contribution> contribution_from_json(const std::string& text);
std::string published_batch_to_json(const PublishedBatch& b);
std::optional<PublishedBatch> published_batch_from_json(const std::string& text);

class OperatorService {
  public:
    // The service owns the operator but only borrows the contract, which
    // must outlive it.
    explicit OperatorService(Contract& contract, OperatorPolicy policy = {});
    ~OperatorService();
    OperatorService(const OperatorService&) = delete;
    OperatorService& operator=(const OperatorService&) = delete;

    // Binds and serves on a background thread; port 0 picks a free port.
    bool start(const std::string& host = "127.0.0.1", int port = 0);
    void stop();
    int port() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Thin blocking client. Every fetch throws std::runtime_error on transport
// or protocol errors.
class OperatorClient {
  public:
    OperatorClient(const std::string& host, int port) : host_(host), port_(port) {}

    struct State {
        uint32_t base_round = 0;
        uint32_t contributions = 0;
        G1 vk_cur;
        G2 sigma_prv;
        G2 sigma_cur;
    };
    State fetch_state() const;
    PowersOfTau fetch_pp() const;
    PublishedBatch fetch_published() const;

    struct SubmitReply {
        bool accepted = false;
        OffUpdateOutcome outcome = OffUpdateOutcome::RejectedDimensions;
        std::string reason;
        PinpointResult pinpoint;
    };
    SubmitReply submit(const Contribution& c) const;

    struct FinalizeReply {
        std::string status;  // accepted | rejected | superseded | empty-batch
        uint32_t round = 0;  // contract round after the call
    };
    FinalizeReply finalize() const;

  private:
    std::string host_;
    int port_;
};

// The honest contribution flow over the wire: audit the fetched string,
// refuse to sign a defective one, otherwise build and submit. Mirrors the
// in-process flow field for field.
ContributeResult http_contribute_with(const OperatorClient& client, const Fr& r, const Fr& sk);
ContributeResult http_contribute(const OperatorClient& client, Drbg& rng);

}  // namespace taulab
