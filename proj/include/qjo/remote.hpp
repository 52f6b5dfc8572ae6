#pragma once

#include <qjo/sampler.hpp>

#include <json.hpp>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qjo {

/// The remote annealer could not be reached or answered with a non-200 status.
struct TransportError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// The remote annealer answered with a body that does not follow the wire schema.
struct ProtocolError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Sparse QUBO interchange: {"n", "linear": [[i, h_i]...], "quadratic": [[i, j, J_ij]...], "offset"}, i < j.
nlohmann::json qubo_to_interchange(const Qubo &qubo);
/// Throws ProtocolError on a malformed document.
Qubo qubo_from_interchange(const nlohmann::json &doc);

/// Request body for POST /sample: the interchange plus num_reads, annealing_time_us, seed and the client's
/// `created` stamp (epoch milliseconds).
std::string encode_sample_request(const Qubo &qubo, const SamplerParams &params, double created_ms);

/// Epoch timestamps (milliseconds) stamped by the service.
struct ServiceStamps
{
    double created;
    double received;
    double solved;
    double resolved;
    double qpu_programming_ms;
    double qpu_sampling_ms;
};

/// Response body: {"samples": [[0,1,...]...], "energies": [...], "occurrences": [...],
/// "timing": {"created", "received", "solved", "resolved", "qpu_programming_ms", "qpu_sampling_ms"}}.
std::string encode_sample_response(const SampleSet &set, const ServiceStamps &stamps);

/// Parses a response for `qubo`. Energies are recomputed locally; a reported energy that disagrees is replaced and
/// noted in `warnings`. Timing legs: ingress = received - created, solve = solved - received,
/// egress = resolved - solved. Throws ProtocolError.
SampleSet parse_sample_response(std::string_view body, const Qubo &qubo, std::vector<std::string> &warnings);

/// One POST /sample exchange with the service at `endpoint` (e.g. "http://127.0.0.1:8080").
/// Throws TransportError or ProtocolError.
SampleSet remote_roundtrip(const Qubo &qubo, const SamplerParams &params, const std::string &endpoint,
                           std::vector<std::string> *warnings = nullptr);

double epoch_ms();

class RemoteSampler final : public Sampler
{
    public:
    explicit RemoteSampler(std::string endpoint) : endpoint_(std::move(endpoint)) {}

    SampleSet sample(const Qubo &qubo, const SamplerParams &params) override;
    const std::vector<std::string> & warnings() const { return warnings_; }

    private:
    std::string endpoint_;
    std::vector<std::string> warnings_;
};

/// In-process annealing service on 127.0.0.1 that answers POST /sample with sa_sample, using
/// annealing_time_us as the sweep count. Serves until destroyed.
class LoopbackAnnealer
{
    public:
    LoopbackAnnealer();
    ~LoopbackAnnealer();
    LoopbackAnnealer(const LoopbackAnnealer &) = delete;
    LoopbackAnnealer & operator=(const LoopbackAnnealer &) = delete;

    int port() const;
    std::string endpoint() const;

    private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}
