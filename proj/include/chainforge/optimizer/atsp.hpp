#pragma once

#include "chainforge/reachgraph/graph.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace chainforge::opt
{

using cost_t = reach::weight_t;
inline constexpr cost_t infinite = reach::unreachable;
inline constexpr std::size_t exact_limit = 16;

// Cost matrix of a circuit problem; `infinite` marks a missing edge.
struct atsp_instance
{
    std::size_t n = 0;
    std::vector< cost_t > cost; // row major

    atsp_instance() = default;
    explicit atsp_instance( std::size_t size ) : n{ size }, cost( size * size, infinite ) {}

    [[nodiscard]] cost_t at( std::size_t u, std::size_t v ) const { return cost[ u * n + v ]; }
    void set( std::size_t u, std::size_t v, cost_t c ) { cost[ u * n + v ] = c; }
};

// Circuit starting at vertex 0.
struct tour
{
    std::vector< std::size_t > order;
    cost_t cost = 0;
};

[[nodiscard]] cost_t tour_cost( const atsp_instance& inst, const std::vector< std::size_t >& order );

// Held-Karp. Throws for n > exact_limit; nullopt when every circuit uses a
// missing edge.
[[nodiscard]] std::optional< tour > solve_atsp_exact( const atsp_instance& inst );

// Nearest neighbour plus Or-opt and segment-exchange local search with
// seeded perturbation. Never returns a tour through a missing edge.
[[nodiscard]] std::optional< tour > solve_atsp_heuristic( const atsp_instance& inst, std::uint64_t seed,
                                                          std::size_t rounds = 64 );

enum class backend
{
    automatic,
    exact,
    heuristic
};

[[nodiscard]] std::optional< tour > solve_atsp( const atsp_instance& inst, backend b, std::uint64_t seed );

// Instance over I, the property vertices of `g` and F, on closed weights; the
// return edge F -> I costs 1, all other edges into I or out of F are missing.
// `vertices[j]` is the graph vertex of instance vertex j (I first, F last).
struct path_instance
{
    atsp_instance inst;
    std::vector< std::size_t > vertices;
};

[[nodiscard]] path_instance make_instance( const reach::reach_graph& g, const reach::closure& c );

// Graph with every refinement group reduced to the member used by `path`:
// unused members are bypassed by composite edges and removed. Optimising the
// collapsed graph is not necessarily optimal for the refined one.
struct collapsed_graph
{
    reach::reach_graph graph;
    // interior vertices of each composite edge
    std::map< reach::vertex_pair, std::vector< std::size_t > > via;

    // Replaces composite edges by the refined vertices they bypass.
    [[nodiscard]] reach::abstract_path expand( const reach::reach_graph& refined, const reach::abstract_path& p ) const;
};

[[nodiscard]] collapsed_graph collapse_groups( const reach::reach_graph& g, const reach::abstract_path& path );

struct covering_result
{
    reach::abstract_path path;
    cost_t tour_cost = 0;
    bool exact = false;     // Held-Karp on the full instance
    bool collapsed = false; // groups were collapsed first
};

// Minimum covering path through the circuit cut between F and I, expanded to
// edges of `g`. Refined graphs are collapsed around a covering path first.
[[nodiscard]] std::optional< covering_result > min_covering_path( const reach::reach_graph& g, backend b = backend::automatic,
                                                                  std::uint64_t seed = 1 );

} // namespace chainforge::opt
