#pragma once

#include "chainforge/optimizer/atsp.hpp"

#include <string>
#include <vector>

namespace chainforge::engine
{

struct config
{
    std::size_t k_max = 50;
    std::size_t k_min = 0;
    opt::backend backend = opt::backend::automatic;
    std::uint64_t seed = 1;
    bool allow_multi_chain = true;
    bool repair = true;
    bool refine = true;
    // W(φ', v_new) copied from the skipping edge W(φ', φ'') instead of W(φ', φ)
    bool literal_refinement_weight = false;
    std::size_t max_refinements = 32;
    std::size_t repair_witnesses = 3;
    bool strengthen_invariant = false;
    std::size_t strengthen_limit = 1 << 16;
    bmc::limits limits;
};

enum class status
{
    minimal_certified,
    minimised,
    multi_chain,
    failed
};

[[nodiscard]] std::string to_string( status s );

enum class failure
{
    none,
    no_chain_at_bound,
    no_single_chain,
    unchainable,
    assertion_violated
};

struct statistics
{
    std::size_t k = 0;
    std::uint64_t solver_calls = 0;
    std::size_t paths_checked = 0;
    std::size_t repairs = 0;
    std::size_t repair_increments = 0;
    std::size_t refinement_splits = 0;
    std::size_t deepenings = 0;
};

struct chain_entry
{
    test_chain chain;
    reach::abstract_path path;           // vertices of `graph`
    std::vector< std::string > vertices; // names along the path
};

struct chain_result
{
    std::vector< chain_entry > chains;
    status result = status::failed;
    failure why = failure::none;
    std::string reason;
    statistics stats;
    reach::reach_graph graph;
    // assertion_violated: the offending properties and a trace showing it
    std::vector< property_violation > violations;
    std::optional< bmc::witness > counterexample;

    [[nodiscard]] bool ok() const { return result != status::failed; }
    [[nodiscard]] std::size_t total_length() const;
};

// Full pipeline: graph construction, shortest covering path, concretisation
// with repair and refinement, and partitioning into several chains.
[[nodiscard]] chain_result generate_chain( const model& m, const std::vector< property >& props, const expr& initial,
                                           const expr& final, const config& cfg = {} );

// ---------------------------------------------------------------- steps

struct repair_result
{
    bool succeeded = false;
    std::vector< reach::weight_t > weights;
    std::size_t increments = 0;
    // on failure: path indices of ⟨φ', φ, φ''⟩
    std::vector< std::size_t > triple;
};

// Stretches the edges of path[lo..hi] one step at a time, chaining concrete
// witnesses from a state of the first vertex.
[[nodiscard]] repair_result repair_path( bmc::context& ctx, const reach::reach_graph& g, const reach::abstract_path& path,
                                         std::size_t lo, std::size_t hi, const config& cfg );

// Splits φ = path vertex of `triple[1]`; returns the new vertex.
std::size_t refine( reach::reach_graph& g, const reach::abstract_path& path, const std::vector< std::size_t >& triple,
                    bool literal_weight = false );

struct loop_result
{
    std::optional< chain_entry > chain;
    failure why = failure::none;
    std::string reason;
    std::vector< property_violation > violations;
    std::optional< bmc::witness > counterexample;
    bool exact = false;     // path from an exact circuit without collapse
    bool stretched = false; // repair or refinement changed the path
};

// Concretise, repair, refine, re-optimise until a chain is found or no
// covering path remains. `g` is refined in place.
[[nodiscard]] loop_result refinement_loop( bmc::context& ctx, reach::reach_graph& g, const config& cfg,
                                           statistics& stats );

// Property vertex classes (with I and F) that each satisfy the covering
// conditions; throws when some vertex is not between I and F.
[[nodiscard]] std::vector< std::vector< std::size_t > > partition_properties( const reach::reach_graph& g );

// Exact minimum set cover for up to 20 sets, greedy beyond. Returns indices.
[[nodiscard]] std::vector< std::size_t > min_cover( const std::vector< std::size_t >& universe,
                                                    const std::vector< std::vector< std::size_t > >& sets );

} // namespace chainforge::engine
