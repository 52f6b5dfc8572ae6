#include <qjo/remote.hpp>

#include <chrono>
#include <cmath>
#include <httplib.h>
#include <map>
#include <thread>


using namespace qjo;
using json = nlohmann::json;


double qjo::epoch_ms()
{
    using namespace std::chrono;
    return duration<double, std::milli>(system_clock::now().time_since_epoch()).count();
}

json qjo::qubo_to_interchange(const Qubo &qubo)
{
    json doc;
    doc["n"] = qubo.size();
    doc["linear"] = json::array();
    for (Var i = 0; i != qubo.size(); ++i)
        if (qubo.linear(i) != 0.0) doc["linear"].push_back(json::array({i, qubo.linear(i)}));
    doc["quadratic"] = json::array();
    for (const auto &c : qubo.couplings()) doc["quadratic"].push_back(json::array({c.i, c.j, c.value}));
    doc["offset"] = qubo.offset();
    return doc;
}

Qubo qjo::qubo_from_interchange(const json &doc)
{
    try {
        if (not doc.is_object()) throw ProtocolError("QUBO interchange must be an object");
        const std::size_t n = doc.at("n").get<std::size_t>();
        QuboBuilder b(n);
        for (const auto &term : doc.at("linear")) {
            if (not term.is_array() or term.size() != 2) throw ProtocolError("linear terms must be [i, h]");
            b.add_linear(term[0].get<Var>(), term[1].get<double>());
        }
        for (const auto &term : doc.at("quadratic")) {
            if (not term.is_array() or term.size() != 3) throw ProtocolError("quadratic terms must be [i, j, J]");
            Var i = term[0].get<Var>(), j = term[1].get<Var>();
            if (i >= j) throw ProtocolError("quadratic terms must satisfy i < j");
            b.add_quadratic(i, j, term[2].get<double>());
        }
        b.add_offset(doc.value("offset", 0.0));
        return b.build();
    } catch (const json::exception &e) {
        throw ProtocolError(std::string("malformed QUBO interchange: ") + e.what());
    } catch (const std::out_of_range &e) {
        throw ProtocolError(std::string("malformed QUBO interchange: ") + e.what());
    } catch (const std::invalid_argument &e) {
        throw ProtocolError(std::string("malformed QUBO interchange: ") + e.what());
    }
}

std::string qjo::encode_sample_request(const Qubo &qubo, const SamplerParams &params, double created_ms)
{
    json doc = qubo_to_interchange(qubo);
    doc["num_reads"] = params.num_reads;
    doc["annealing_time_us"] = params.sweeps;
    doc["seed"] = params.seed;
    doc["created"] = created_ms;
    return doc.dump();
}

std::string qjo::encode_sample_response(const SampleSet &set, const ServiceStamps &stamps)
{
    json doc;
    doc["samples"] = json::array();
    doc["energies"] = json::array();
    doc["occurrences"] = json::array();
    for (const auto &row : set.rows) {
        doc["samples"].push_back(row.assignment.bits);
        doc["energies"].push_back(row.energy);
        doc["occurrences"].push_back(row.occurrences);
    }
    doc["timing"] = {
        {"created", stamps.created},
        {"received", stamps.received},
        {"solved", stamps.solved},
        {"resolved", stamps.resolved},
        {"qpu_programming_ms", stamps.qpu_programming_ms},
        {"qpu_sampling_ms", stamps.qpu_sampling_ms},
    };
    return doc.dump();
}

SampleSet qjo::parse_sample_response(std::string_view body, const Qubo &qubo, std::vector<std::string> &warnings)
{
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error &e) {
        throw ProtocolError(std::string("response is not valid JSON: ") + e.what());
    }
    try {
        const json &samples = doc.at("samples");
        const json &energies = doc.at("energies");
        const json &occurrences = doc.at("occurrences");
        const json &timing = doc.at("timing");
        if (not samples.is_array() or not energies.is_array() or not occurrences.is_array())
            throw ProtocolError("samples, energies and occurrences must be arrays");
        if (samples.size() != energies.size() or samples.size() != occurrences.size())
            throw ProtocolError("samples, energies and occurrences differ in length");
        if (samples.empty()) throw ProtocolError("response carries no samples");

        std::map<Assignment, std::size_t> counts;
        for (std::size_t r = 0; r != samples.size(); ++r) {
            auto bits = samples[r].get<std::vector<int>>();
            if (bits.size() != qubo.size())
                throw ProtocolError("sample " + std::to_string(r) + " has length " + std::to_string(bits.size()) +
                                    ", expected " + std::to_string(qubo.size()));
            Assignment a(qubo.size());
            for (std::size_t i = 0; i != bits.size(); ++i) {
                if (bits[i] != 0 and bits[i] != 1) throw ProtocolError("sample values must be 0 or 1");
                a.bits[i] = static_cast<std::uint8_t>(bits[i]);
            }
            const auto occ = occurrences[r].get<std::int64_t>();
            if (occ < 1) throw ProtocolError("occurrences must be at least 1");
            const double reported = energies[r].get<double>();
            const double local = energy(qubo, a);
            if (std::abs(reported - local) > 1e-9 * (1.0 + std::abs(local)))
                warnings.push_back("sample " + std::to_string(r) + ": reported energy " + std::to_string(reported) +
                                   " differs from local " + std::to_string(local) + "; using local value");
            counts[a] += static_cast<std::size_t>(occ);
        }

        const double created = timing.at("created").get<double>();
        const double received = timing.at("received").get<double>();
        const double solved = timing.at("solved").get<double>();
        const double resolved = timing.at("resolved").get<double>();
        const double programming = timing.at("qpu_programming_ms").get<double>();
        const double sampling = timing.at("qpu_sampling_ms").get<double>();
        if (received < created or solved < received or resolved < solved)
            throw ProtocolError("timing stamps must satisfy created <= received <= solved <= resolved");
        if (programming < 0 or sampling < 0) throw ProtocolError("QPU timings must be non-negative");

        SampleSet set;
        set.timing = SamplerTiming::from_parts(received - created, solved - received, resolved - solved,
                                               programming, sampling);
        for (auto &[a, c] : counts) set.rows.push_back({a, energy(qubo, a), c});
        std::stable_sort(set.rows.begin(), set.rows.end(),
                         [](const SampleRow &x, const SampleRow &y) { return x.energy < y.energy; });
        return set;
    } catch (const json::exception &e) {
        throw ProtocolError(std::string("malformed sample response: ") + e.what());
    }
}

SampleSet qjo::remote_roundtrip(const Qubo &qubo, const SamplerParams &params, const std::string &endpoint,
                                std::vector<std::string> *warnings)
{
    params.validate();
    httplib::Client client(endpoint);
    if (not client.is_valid()) throw TransportError("invalid endpoint '" + endpoint + "'");
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(120, 0);
    auto res = client.Post("/sample", encode_sample_request(qubo, params, epoch_ms()), "application/json");
    if (not res) throw TransportError("POST " + endpoint + "/sample failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw TransportError("POST " + endpoint + "/sample returned status " + std::to_string(res->status));
    std::vector<std::string> local;
    SampleSet set = parse_sample_response(res->body, qubo, warnings ? *warnings : local);
    return set;
}

SampleSet RemoteSampler::sample(const Qubo &qubo, const SamplerParams &params)
{
    return remote_roundtrip(qubo, params, endpoint_, &warnings_);
}


/*======================================================================================================================
 * LoopbackAnnealer
 *====================================================================================================================*/

struct LoopbackAnnealer::Impl
{
    httplib::Server server;
    int port = -1;
    std::thread worker;
};

LoopbackAnnealer::LoopbackAnnealer()
    : impl_(std::make_unique<Impl>())
{
    impl_->server.Post("/sample", [](const httplib::Request &req, httplib::Response &res) {
        const double received = epoch_ms();
        try {
            json doc = json::parse(req.body);
            Qubo qubo = qubo_from_interchange(doc);
            SamplerParams params;
            params.num_reads = doc.at("num_reads").get<std::size_t>();
            params.sweeps = doc.at("annealing_time_us").get<std::size_t>();
            params.seed = doc.value("seed", std::uint64_t(0));
            const double created = std::min(doc.value("created", received), received);
            SampleSet set = sa_sample(qubo, params);
            const double solved = epoch_ms();
            ServiceStamps stamps{created, received, solved, 0.0, 0.0, set.timing.solve_ms};
            stamps.resolved = epoch_ms();
            res.set_content(encode_sample_response(set, stamps), "application/json");
        } catch (const std::exception &e) {
            res.status = 400;
            res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        }
    });
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    if (impl_->port < 0) throw TransportError("loopback annealer could not bind a port");
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

LoopbackAnnealer::~LoopbackAnnealer()
{
    impl_->server.stop();
    if (impl_->worker.joinable()) impl_->worker.join();
}

int LoopbackAnnealer::port() const { return impl_->port; }

std::string LoopbackAnnealer::endpoint() const { return "http://127.0.0.1:" + std::to_string(impl_->port); }
