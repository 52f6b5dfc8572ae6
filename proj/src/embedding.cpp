#include <qjo/decomp.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>


using namespace qjo;

using Node = HardwareGraph::Node;


HardwareGraph::HardwareGraph(std::vector<std::vector<Node>> adjacency, std::size_t degree_bound)
    : adjacency_(std::move(adjacency))
    , degree_bound_(degree_bound)
{
    if (adjacency_.empty()) throw std::invalid_argument("hardware graph has no nodes");
    const Node n = Node(adjacency_.size());
    for (Node u = 0; u < n; ++u) {
        auto &row = adjacency_[u];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        if (row.size() > degree_bound_) throw std::invalid_argument("hardware node exceeds the degree bound");
        for (auto v : row) {
            if (v >= n or v == u) throw std::invalid_argument("bad hardware link");
            const auto &back = adjacency_[v];
            if (std::find(back.begin(), back.end(), u) == back.end())
                throw std::invalid_argument("hardware links must be symmetric");
        }
    }
    if (not connected()) throw std::invalid_argument("hardware graph is disconnected");
}

HardwareGraph HardwareGraph::king(std::size_t rows, std::size_t cols)
{
    if (rows == 0 or cols == 0) throw std::invalid_argument("empty grid");
    std::vector<std::vector<Node>> adj(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 and dc == 0) continue;
                    const long rr = long(r) + dr, cc = long(c) + dc;
                    if (rr < 0 or cc < 0 or rr >= long(rows) or cc >= long(cols)) continue;
                    adj[r * cols + c].push_back(Node(std::size_t(rr) * cols + std::size_t(cc)));
                }
    HardwareGraph hw(std::move(adj), 8);
    hw.rows_ = rows;
    hw.cols_ = cols;
    return hw;
}

HardwareGraph HardwareGraph::cycle(std::size_t n)
{
    if (n < 3) throw std::invalid_argument("cycle needs at least three nodes");
    std::vector<std::vector<Node>> adj(n);
    for (std::size_t i = 0; i < n; ++i) {
        adj[i].push_back(Node((i + 1) % n));
        adj[i].push_back(Node((i + n - 1) % n));
    }
    return HardwareGraph(std::move(adj), 2);
}

HardwareGraph HardwareGraph::king_for(std::size_t variables, std::size_t nodes_per_variable)
{
    const std::size_t n = std::max<std::size_t>(1, variables);
    const auto side = std::max<std::size_t>(2, std::size_t(std::ceil(std::sqrt(double(n * nodes_per_variable)))));
    return king(std::max(side, 2 * n), std::max(side, n + 1));
}

bool HardwareGraph::linked(Node a, Node b) const
{
    const auto &row = adjacency_.at(a);
    return std::binary_search(row.begin(), row.end(), b);
}

std::size_t HardwareGraph::max_degree() const
{
    std::size_t d = 0;
    for (const auto &row : adjacency_) d = std::max(d, row.size());
    return d;
}

bool HardwareGraph::connected() const
{
    std::vector<bool> seen(capacity(), false);
    std::deque<Node> queue{0};
    seen[0] = true;
    std::size_t count = 1;
    while (not queue.empty()) {
        const Node u = queue.front();
        queue.pop_front();
        for (auto v : adjacency_[u])
            if (not seen[v]) {
                seen[v] = true;
                ++count;
                queue.push_back(v);
            }
    }
    return count == capacity();
}

std::string HardwareGraph::canonical() const
{
    std::ostringstream out;
    out << capacity() << ':';
    for (Node u = 0; u < capacity(); ++u)
        for (auto v : adjacency_[u])
            if (u < v) out << u << '-' << v << ',';
    return out.str();
}


std::size_t Embedding::max_chain_length() const
{
    std::size_t m = 0;
    for (const auto &c : chains) m = std::max(m, c.size());
    return m;
}


namespace {

constexpr std::size_t kMaxAttempts = 8;
constexpr std::size_t kPasses = 200;
// passes without a better (overlaps, total length) before restoring the best state and ripping up
constexpr std::size_t kPatience = 4;
constexpr double kRipUpNeighbour = 0.5;
constexpr std::size_t kShortenPasses = 50;
constexpr std::size_t kShortenPatience = 3;
constexpr double kAlphaGrowth = 1.25;
// graph size times searches per pass, and the same summed over all passes of all attempts
constexpr double kSearchBudget = 2e5;
constexpr double kTotalBudget = 5e6;
constexpr double kUnreached = std::numeric_limits<double>::infinity();

/// Placement order: highest coupling degree first, then repeatedly the variable with most placed neighbours.
std::vector<Var> placement_order(const Qubo &qubo, std::size_t attempt)
{
    const std::size_t n = qubo.size();
    std::vector<Var> order;
    std::vector<bool> placed(n, false);
    std::vector<std::size_t> placed_nbrs(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
        Var pick = 0;
        bool found = false;
        for (Var v = 0; v < n; ++v) {
            if (placed[v]) continue;
            if (not found) { pick = v; found = true; continue; }
            const auto key = [&](Var x) {
                return std::make_tuple(placed_nbrs[x], qubo.neighbors(x).size(), (x + attempt * 7919) % n);
            };
            if (key(v) > key(pick)) pick = v;
        }
        placed[pick] = true;
        order.push_back(pick);
        for (const auto &nb : qubo.neighbors(pick)) ++placed_nbrs[nb.var];
    }
    return order;
}

/// Chains may overlap while the embedding is being built. Each node costs alpha^(chains using it); variables are
/// re-placed pass after pass with a growing alpha until no node is shared.
class OverlapEmbedder
{
    public:
    OverlapEmbedder(const Qubo &qubo, const HardwareGraph &hw)
        : qubo_(qubo), hw_(hw), usage_(hw.capacity(), 0), chains_(qubo.size())
    { }

    std::optional<std::vector<std::vector<Node>>> run(std::size_t attempt, std::size_t passes)
    {
        auto order = placement_order(qubo_, attempt);
        rng_.seed(attempt + 1);
        seed_ = Node((hw_.capacity() / 2 + attempt * 131) % hw_.capacity());
        alpha_ = 2.0;
        for (auto v : order) place(v);

        // iterated local search: full re-placement passes, falling back to the best state plus a rip-up when stuck
        auto best_chains = chains_;
        auto best_usage = usage_;
        auto best = score();
        std::size_t stale = 0;
        for (std::size_t pass = 0; pass < passes; ++pass) {
            if (done()) {
                shorten(order);
                return chains_;
            }
            alpha_ = std::min(double(hw_.capacity()) * double(hw_.capacity()), alpha_ * kAlphaGrowth);
            std::shuffle(order.begin(), order.end(), rng_);
            for (auto v : order) place(v);
            const auto now = score();
            if (now < best) {
                best = now;
                best_chains = chains_;
                best_usage = usage_;
                stale = 0;
            } else if (++stale >= kPatience) {
                chains_ = best_chains;
                usage_ = best_usage;
                stale = 0;
                if (not done()) rip_up();
            }
        }
        chains_ = std::move(best_chains);
        usage_ = std::move(best_usage);
        if (done()) return chains_;
        return std::nullopt;
    }

    private:
    bool done() const
    {
        for (const auto &c : chains_)
            if (c.empty()) return false;
        return overlaps() == 0;
    }

    std::size_t total_length() const
    {
        std::size_t k = 0;
        for (const auto &c : chains_) k += c.size();
        return k;
    }

    std::pair<std::size_t, std::size_t> score() const { return {overlaps(), total_length()}; }

    /// Once overlap-free, re-place with overlaps priced out and keep whatever shortens the chains.
    void shorten(std::vector<Var> &order)
    {
        alpha_ = double(hw_.capacity()) * double(hw_.capacity());
        auto keep = chains_;
        auto keep_usage = usage_;
        std::size_t best = total_length(), stale = 0;
        for (std::size_t pass = 0; pass < kShortenPasses and stale < kShortenPatience; ++pass) {
            std::shuffle(order.begin(), order.end(), rng_);
            for (auto v : order) place(v);
            if (overlaps() == 0 and total_length() < best) {
                best = total_length();
                keep = chains_;
                keep_usage = usage_;
                stale = 0;
            } else {
                ++stale;
            }
        }
        chains_ = std::move(keep);
        usage_ = std::move(keep_usage);
    }

    /// Clears every variable on an overlapped node, and each of its neighbours with probability one half, then
    /// places the group again in random order so a crowded region can spread out.
    void rip_up()
    {
        std::bernoulli_distribution coin(kRipUpNeighbour);
        std::vector<char> pick(chains_.size(), 0);
        for (Var v = 0; v < chains_.size(); ++v)
            for (auto x : chains_[v])
                if (usage_[x] > 1) {
                    pick[v] = 1;
                    for (const auto &nb : qubo_.neighbors(v))
                        if (coin(rng_)) pick[nb.var] = 1;
                }
        std::vector<Var> group;
        for (Var v = 0; v < chains_.size(); ++v)
            if (pick[v]) {
                group.push_back(v);
                for (auto x : chains_[v]) --usage_[x];
                chains_[v].clear();
            }
        std::shuffle(group.begin(), group.end(), rng_);
        for (auto v : group) place(v);
    }

    std::size_t overlaps() const
    {
        std::size_t k = 0;
        for (auto u : usage_) k += u > 1;
        return k;
    }

    double weight(Node x) const { return usage_[x] == 0 ? 1.0 : std::min(1e12, std::pow(alpha_, double(usage_[x]))); }

    /// Dijkstra from `chain` (cost 0) where entering node x costs weight(x).
    void search(const std::vector<Node> &chain, std::vector<double> &dist, std::vector<Node> &parent) const
    {
        dist.assign(hw_.capacity(), kUnreached);
        parent.assign(hw_.capacity(), 0);
        using Item = std::pair<double, Node>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        for (auto c : chain) {
            dist[c] = 0.0;
            parent[c] = c;
            heap.push({0.0, c});
        }
        while (not heap.empty()) {
            const auto [d, u] = heap.top();
            heap.pop();
            if (d > dist[u]) continue;
            for (auto x : hw_.neighbors(u)) {
                const double nd = d + weight(x);
                if (nd < dist[x]) {
                    dist[x] = nd;
                    parent[x] = u;
                    heap.push({nd, x});
                }
            }
        }
    }

    void place(Var v)
    {
        for (auto x : chains_[v]) --usage_[x];
        chains_[v].clear();

        std::vector<Var> nbrs;
        for (const auto &nb : qubo_.neighbors(v))
            if (not chains_[nb.var].empty()) nbrs.push_back(nb.var);

        if (nbrs.empty()) {
            // nearest lightly used node to the seed
            std::vector<double> dist;
            std::vector<Node> parent;
            search({seed_}, dist, parent);
            Node best = seed_;
            double best_cost = kUnreached;
            for (Node x = 0; x < hw_.capacity(); ++x) {
                const double c = weight(x) * double(hw_.capacity()) + (x == seed_ ? 0.0 : dist[x]);
                if (c < best_cost) { best_cost = c; best = x; }
            }
            chains_[v] = {best};
            ++usage_[best];
            return;
        }

        std::vector<std::vector<double>> dists(nbrs.size());
        std::vector<std::vector<Node>> parents(nbrs.size());
        for (std::size_t k = 0; k < nbrs.size(); ++k) search(chains_[nbrs[k]], dists[k], parents[k]);

        // small jitter so ties do not always go to the lowest node index
        std::uniform_real_distribution<double> jitter(1.0, 1.0 + 1e-3);
        Node root = 0;
        double best_cost = kUnreached;
        for (Node x = 0; x < hw_.capacity(); ++x) {
            double c = weight(x) * jitter(rng_);
            for (std::size_t k = 0; k < nbrs.size() and c < kUnreached; ++k) {
                // a node inside the neighbour's chain cannot be the root
                if (dists[k][x] == 0.0) { c = kUnreached; break; }
                c += dists[k][x] - weight(x);
            }
            if (c < best_cost) { best_cost = c; root = x; }
        }
        if (best_cost == kUnreached) return;

        std::vector<Node> chain{root};
        for (std::size_t k = 0; k < nbrs.size(); ++k)
            for (Node x = parents[k][root]; dists[k][x] > 0.0; x = parents[k][x])
                if (std::find(chain.begin(), chain.end(), x) == chain.end()) chain.push_back(x);
        for (auto x : chain) ++usage_[x];
        chains_[v] = std::move(chain);
    }

    const Qubo &qubo_;
    const HardwareGraph &hw_;
    std::vector<std::size_t> usage_;
    std::vector<std::vector<Node>> chains_;
    Node seed_ = 0;
    double alpha_ = 2.0;
    std::mt19937_64 rng_;
};

std::optional<Embedding> try_embed(const Qubo &qubo, const HardwareGraph &hw, std::size_t attempt,
                                   std::size_t passes)
{
    auto chains = OverlapEmbedder(qubo, hw).run(attempt, passes);
    if (not chains) return std::nullopt;
    return Embedding{std::move(*chains), 0.0};
}

double strength_for(const Qubo &qubo)
{
    double max_j = 0.0;
    for (const auto &c : qubo.couplings()) max_j = std::max(max_j, std::abs(c.value));
    return max_j > 0 ? 1.5 * max_j : 1.0;
}

/// Chain links forming a BFS tree of each chain's induced subgraph.
std::vector<std::pair<Node, Node>> chain_tree(const HardwareGraph &hw, const std::vector<Node> &chain)
{
    std::vector<std::pair<Node, Node>> links;
    std::vector<Node> reached{chain.front()};
    for (std::size_t head = 0; head < reached.size(); ++head)
        for (auto y : chain)
            if (std::find(reached.begin(), reached.end(), y) == reached.end() and hw.linked(reached[head], y)) {
                links.emplace_back(reached[head], y);
                reached.push_back(y);
            }
    if (reached.size() != chain.size()) throw EmbeddingError("chain is not connected");
    return links;
}

}


std::optional<Embedding> qjo::clique_template(const Qubo &qubo, const HardwareGraph &hw)
{
    const std::size_t n = qubo.size();
    std::size_t rows = hw.grid_rows(), cols = hw.grid_cols();
    bool transposed = false;
    if (rows < 2 * n or cols < n + 1) {
        std::swap(rows, cols);
        transposed = true;
    }
    if (rows < 2 * n or cols < n + 1) return std::nullopt;
    auto node = [&](std::size_t r, std::size_t c) {
        return transposed ? Node(c * hw.grid_cols() + r) : Node(r * hw.grid_cols() + c);
    };

    Embedding emb;
    emb.chains.resize(n);
    for (Var i = 0; i < n; ++i) {
        // the down-right part meets later chains, the down-left part earlier ones
        std::size_t last = i, first = i;
        for (const auto &nb : qubo.neighbors(i)) {
            last = std::max<std::size_t>(last, nb.var);
            first = std::min<std::size_t>(first, nb.var);
        }
        auto &chain = emb.chains[i];
        for (std::size_t r = 2 * i; r <= i + last + 1; ++r) chain.push_back(node(r, r - 2 * i));
        for (std::size_t r = i + first; r <= 2 * i + 1; ++r) chain.push_back(node(r, 2 * i + 1 - r));
    }
    emb.chain_strength = strength_for(qubo);
    return emb;
}


Embedding qjo::embed(const Qubo &qubo, const HardwareGraph &hw)
{
    if (qubo.size() > hw.capacity()) throw EmbeddingError("more logical variables than hardware nodes");
    // each pass runs one shortest-path search per coupling end over the whole graph
    const double search_work = double(hw.capacity()) * double(2 * qubo.couplings().size() + qubo.size());
    // passes summed over all attempts stay within the total budget
    std::size_t budget = std::size_t(kTotalBudget / std::max(1.0, search_work));
    if (search_work <= kSearchBudget)
        for (std::size_t attempt = 0; attempt < kMaxAttempts and budget > 0; ++attempt) {
            const std::size_t passes = std::min(kPasses, budget);
            budget -= passes;
            if (auto emb = try_embed(qubo, hw, attempt, passes)) {
                emb->chain_strength = strength_for(qubo);
                return *emb;
            }
        }
    if (auto emb = clique_template(qubo, hw)) return *emb;
    throw EmbeddingError("no embedding found on a hardware graph of " + std::to_string(hw.capacity()) + " nodes");
}


EmbeddedProblem qjo::embed_qubo(const Qubo &qubo, const Embedding &embedding, const HardwareGraph &hw)
{
    if (embedding.chains.size() != qubo.size()) throw std::invalid_argument("embedding does not match QUBO");
    std::vector<int> physical(hw.capacity(), -1);
    std::vector<Node> nodes;
    for (const auto &chain : embedding.chains)
        for (auto x : chain) {
            if (physical[x] >= 0) throw EmbeddingError("chains overlap");
            physical[x] = int(nodes.size());
            nodes.push_back(x);
        }

    QuboBuilder b(std::max<std::size_t>(1, nodes.size()));
    b.add_offset(qubo.offset());
    const double s = embedding.chain_strength;
    for (Var i = 0; i < qubo.size(); ++i) {
        const auto &chain = embedding.chains[i];
        if (chain.empty()) throw EmbeddingError("empty chain");
        const double share = qubo.linear(i) / double(chain.size());
        for (auto x : chain) b.add_linear(Var(physical[x]), share, qubo.linear_class(i));
        for (const auto &[x, y] : chain_tree(hw, chain)) {
            b.add_linear(Var(physical[x]), s, TermClass::Constraint);
            b.add_linear(Var(physical[y]), s, TermClass::Constraint);
            b.add_quadratic(std::min(Var(physical[x]), Var(physical[y])), std::max(Var(physical[x]), Var(physical[y])),
                            -2.0 * s, TermClass::Constraint);
        }
    }
    for (const auto &c : qubo.couplings()) {
        std::optional<std::pair<Node, Node>> link;
        for (auto x : embedding.chains[c.i]) {
            for (auto y : embedding.chains[c.j])
                if (hw.linked(x, y)) { link = {x, y}; break; }
            if (link) break;
        }
        if (not link) throw EmbeddingError("coupling has no physical link");
        const Var a = Var(physical[link->first]), bb = Var(physical[link->second]);
        b.add_quadratic(std::min(a, bb), std::max(a, bb), c.value, c.cls);
    }
    return {b.build(), std::move(nodes)};
}


ChainResolution qjo::resolve_chains(std::span<const std::uint8_t> node_bits, const Embedding &embedding)
{
    ChainResolution out;
    out.logical = Assignment(embedding.chains.size());
    for (std::size_t v = 0; v < embedding.chains.size(); ++v) {
        std::size_t ones = 0;
        for (auto x : embedding.chains[v]) {
            if (x >= node_bits.size()) throw std::out_of_range("chain node outside the sample");
            ones += node_bits[x] != 0;
        }
        const std::size_t len = embedding.chains[v].size();
        if (ones != 0 and ones != len) ++out.broken_chains;
        out.logical.bits[v] = 2 * ones > len ? 1 : 0;
    }
    return out;
}


const Embedding & EmbeddingCache::get(const Qubo &qubo, const HardwareGraph &hw)
{
    std::ostringstream key;
    key << qubo.size() << '|';
    for (const auto &c : qubo.couplings()) key << c.i << ',' << c.j << ';';
    key << '|' << hw.canonical();
    // chain strength depends on the coefficients, so it is refreshed on every hit
    double max_j = 0.0;
    for (const auto &c : qubo.couplings()) max_j = std::max(max_j, std::abs(c.value));
    const double strength = max_j > 0 ? 1.5 * max_j : 1.0;

    auto it = cache_.find(key.str());
    if (it != cache_.end()) {
        ++hits_;
        it->second.chain_strength = strength;
        return it->second;
    }
    ++misses_;
    auto emb = embed(qubo, hw);
    return cache_.emplace(key.str(), std::move(emb)).first->second;
}


SampleSet qjo::sample_embedded(const Qubo &logical, const Embedding &embedding, const HardwareGraph &hw,
                               Sampler &sampler, const SamplerParams &params, std::size_t *broken_chains)
{
    const auto problem = embed_qubo(logical, embedding, hw);
    const SampleSet physical = sampler.sample(problem.physical, params);
    std::vector<Assignment> reads;
    std::vector<std::uint8_t> node_bits(hw.capacity(), 0);
    std::size_t broken = 0;
    for (const auto &row : physical.rows) {
        std::fill(node_bits.begin(), node_bits.end(), 0);
        for (std::size_t k = 0; k < problem.nodes.size(); ++k) node_bits[problem.nodes[k]] = row.assignment.bits[k];
        const auto res = resolve_chains(node_bits, embedding);
        for (std::size_t r = 0; r < row.occurrences; ++r) reads.push_back(res.logical);
        broken += res.broken_chains * row.occurrences;
    }
    if (broken_chains) *broken_chains = broken;
    return aggregate_samples(logical, reads, physical.timing);
}
