#pragma once

#include <qjo/encoding.hpp>
#include <qjo/sampler.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qjo {

/*======================================================================================================================
 * Decomposition
 *====================================================================================================================*/

struct Part
{
    RelSet relations;
    std::vector<std::size_t> edges; ///< base edges with at least one end in `relations`
    std::vector<Var> variables;     ///< global variables of those edges, ascending; local index = position
    double cost_estimate = 0.0;
    std::optional<Qubo> sub_qubo;   ///< over local indices, set by attach_subproblems()
};

/// Split of the join graph's relations into parts. A cut edge's variable column belongs to both parts it touches,
/// which makes those variables shared.
struct Partitioning
{
    std::vector<Part> parts;
    std::vector<Var> shared;            ///< ascending
    std::vector<std::size_t> cut_edges; ///< ascending
    std::size_t variable_count = 0;
    /// Terms whose variables are not all inside one part (couplings between private variables of different parts)
    /// plus the offset, in global indexing. Set by attach_subproblems().
    std::optional<Qubo> interface;

    std::size_t part_of_private(Var v) const; ///< throws for shared variables
    bool is_shared(Var v) const;
};

/// Recursive two-way split of the relations (balanced, Kernighan-Lin refined) until every part has at most
/// 0.8 * max_vars variables or a single relation. Throws std::invalid_argument if one edge's column (steps
/// variables) already exceeds max_vars. `model`, when given, sets cost estimates from edge cardinalities.
Partitioning partition_join_graph(const JoinGraph &graph, const VarMap &varmap, std::size_t max_vars,
                                  const CostModel *model = nullptr);

/// Balanced bisection of `relations` (sizes differ by at most one) minimizing the number of cut edges,
/// multi-start Kernighan-Lin.
std::pair<RelSet, RelSet> bisect_relations(const JoinGraph &graph, RelSet relations);

std::size_t cut_size(const JoinGraph &graph, RelSet a, RelSet b);

/// Distributes the terms of `full` over the parts. A term whose variables lie in k parts goes to each at weight
/// 1/k; everything else goes to `interface`.
void attach_subproblems(Partitioning &partitioning, const Qubo &full);

/// Sum of all part sub-QUBOs (mapped back to global indices) and the interface.
Qubo reconstruct(const Partitioning &partitioning);


/*======================================================================================================================
 * Embedding
 *====================================================================================================================*/

struct EmbeddingError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Simulated annealer topology: undirected graph with bounded degree.
class HardwareGraph
{
    public:
    using Node = std::uint32_t;

    HardwareGraph(std::vector<std::vector<Node>> adjacency, std::size_t degree_bound);

    /// rows x cols grid where every node links to its eight surrounding nodes.
    static HardwareGraph king(std::size_t rows, std::size_t cols);
    static HardwareGraph cycle(std::size_t n);
    /// King grid for a QUBO with `variables` variables: at least `nodes_per_variable` nodes per variable and room
    /// for the clique template (2n rows, n + 1 columns).
    static HardwareGraph king_for(std::size_t variables, std::size_t nodes_per_variable = 6);

    std::size_t capacity() const { return adjacency_.size(); }
    const std::vector<Node> & neighbors(Node n) const { return adjacency_.at(n); }
    bool linked(Node a, Node b) const;
    std::size_t degree_bound() const { return degree_bound_; }
    std::size_t max_degree() const;
    bool connected() const;
    std::string canonical() const;

    /// Grid shape when built by king(); 0 x 0 otherwise.
    std::size_t grid_rows() const { return rows_; }
    std::size_t grid_cols() const { return cols_; }

    private:
    std::vector<std::vector<Node>> adjacency_;
    std::size_t degree_bound_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
};

struct Embedding
{
    std::vector<std::vector<HardwareGraph::Node>> chains; ///< per logical variable
    double chain_strength = 1.0;

    std::size_t max_chain_length() const;
};

/// Minor embedding. First a greedy placement: variables by coupling degree, each rooted at the node closest to its
/// placed neighbours with shortest paths added to its chain; overlapping chains are re-routed under a growing
/// penalty. If that fails (or the search would be too large) and the hardware is a king grid with room, the clique
/// template is used. chain_strength = 1.5 * max|J|. Throws EmbeddingError when neither succeeds.
Embedding embed(const Qubo &qubo, const HardwareGraph &hw);

/// Deterministic embedding of any QUBO with n variables into a king grid of at least 2n x (n + 1) nodes (either
/// orientation). Chain i is a down-right diagonal on r - c = 2i joined to a down-left diagonal on r + c = 2i + 1;
/// opposite diagonals cross inside a 2 x 2 block without sharing a node, so chains i < j touch where the
/// down-right part of i meets the down-left part of j. Each part is cut to the crossings its couplings need.
std::optional<Embedding> clique_template(const Qubo &qubo, const HardwareGraph &hw);

/// Physical QUBO over the chain nodes: linear terms spread evenly over a chain, chain links tied by
/// strength * (a - b)^2, each logical coupling on one physical link between the chains.
struct EmbeddedProblem
{
    Qubo physical;
    std::vector<HardwareGraph::Node> nodes; ///< physical variable -> hardware node
};

EmbeddedProblem embed_qubo(const Qubo &qubo, const Embedding &embedding, const HardwareGraph &hw);

struct ChainResolution
{
    Assignment logical;
    std::size_t broken_chains = 0;
};

/// Majority vote per chain over `node_bits` (indexed by hardware node); an exact tie resolves to 0.
ChainResolution resolve_chains(std::span<const std::uint8_t> node_bits, const Embedding &embedding);

/// Reuses embeddings for QUBOs with the same coupling structure on the same topology.
class EmbeddingCache
{
    public:
    const Embedding & get(const Qubo &qubo, const HardwareGraph &hw);
    std::size_t hits() const { return hits_; }
    std::size_t misses() const { return misses_; }

    private:
    std::map<std::string, Embedding> cache_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

/// Samples the embedded physical problem and maps every read back through resolve_chains. Rows are on `logical`.
SampleSet sample_embedded(const Qubo &logical, const Embedding &embedding, const HardwareGraph &hw, Sampler &sampler,
                          const SamplerParams &params, std::size_t *broken_chains = nullptr);


/*======================================================================================================================
 * Sampling allocation, composition, refinement
 *====================================================================================================================*/

struct AllocationConfig
{
    double gamma = 0.5;
    double min_scale = 0.25;
    double max_scale = 4.0;
};

inline constexpr std::uint64_t kPartSeedStride = 7'919'993;

/// sweeps_p = base.sweeps * (cost_p / mean cost)^gamma clamped to [0.25, 4] x base; reads doubled for parts whose
/// previous energy variance exceeds the median. Seeds derive from (base.seed, part index).
std::vector<SamplerParams> allocate_sampling(const Partitioning &partitioning, const SamplerParams &base,
                                             const AllocationConfig &config = {},
                                             const std::vector<double> *previous_variance = nullptr);

/// c(v) for every shared variable: the part marginals (Boltzmann-weighted frequency of v = 1) averaged with part
/// weights exp(-beta * best part energy).
std::map<Var, double> shared_consensus(const Partitioning &partitioning, const std::vector<SampleSet> &part_samples,
                                       double beta);

struct ComposeConfig
{
    std::size_t rounds = 3;
    double beta = 1.0;
};

/// Resamples one part given its conditioned QUBO (local indices = Part::variables). Returning nothing stops the
/// composition rounds (budget denial).
using PartResampler = std::function<std::optional<SampleSet>(std::size_t part, const Qubo &conditioned)>;

struct ComposeResult
{
    Assignment merged;
    std::size_t rounds_run = 0;
    std::map<Var, double> consensus;
};

/// Belief-propagation style reconciliation. Each round clamps shared variables to [c(v) >= 0.5], then resamples
/// every part with all variables outside it fixed at the current global assignment (folded into its linear terms).
/// Private variables take their part's best sample, shared variables the final consensus.
ComposeResult compose_bp(const Partitioning &partitioning, std::vector<SampleSet> part_samples, const Qubo &full,
                         const ComposeConfig &config, const PartResampler &resample);

/// Single-bit-flip tabu search with tenure 7 and aspiration on improving the best energy. Stops after
/// `move_budget` moves or max(200, 20 n) moves without improvement. Returns the best assignment visited.
Assignment tabu_refine(const Qubo &qubo, const Assignment &start, std::size_t move_budget);

}
