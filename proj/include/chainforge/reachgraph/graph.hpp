#pragma once

#include "chainforge/bmc/bmc.hpp"

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace chainforge::reach
{

using weight_t = std::uint64_t;
inline constexpr weight_t unreachable = std::numeric_limits< weight_t >::max() / 4;

using vertex_pair = bmc::vertex_pair;

// Weighted digraph over {I, properties, F}. Vertex 0 is I, vertex 1..n are
// the properties, n + 1 is F; refinement clones are appended after F and
// share the group of the vertex they were split from. Removed vertices keep
// their index but lose all edges and group membership.
class reach_graph
{
    struct node
    {
        bmc::vertex_spec spec;
        std::size_t group;
        bool active = true;
    };

    std::vector< node > _nodes;
    std::size_t _final = 0;
    std::map< vertex_pair, weight_t > _edges;

public:
    reach_graph() = default;
    // `vertices` lists I, the properties, then F.
    explicit reach_graph( std::vector< bmc::vertex_spec > vertices );

    [[nodiscard]] std::size_t size() const { return _nodes.size(); }
    [[nodiscard]] std::size_t initial() const { return 0; }
    [[nodiscard]] std::size_t final_vertex() const { return _final; }
    [[nodiscard]] std::size_t num_properties() const { return _final - 1; }
    [[nodiscard]] bool is_property( std::size_t v ) const { return v != 0 && v != _final; }
    [[nodiscard]] bool active( std::size_t v ) const { return _nodes.at( v ).active; }
    [[nodiscard]] const bmc::vertex_spec& spec( std::size_t v ) const { return _nodes.at( v ).spec; }
    [[nodiscard]] const std::string& name( std::size_t v ) const { return _nodes.at( v ).spec.name; }
    // Group ids are the indices of the original vertices.
    [[nodiscard]] std::size_t group_of( std::size_t v ) const { return _nodes.at( v ).group; }
    [[nodiscard]] std::vector< std::size_t > members( std::size_t group ) const;
    [[nodiscard]] std::vector< std::size_t > property_groups() const;
    [[nodiscard]] bool refined() const;

    void set_edge( std::size_t u, std::size_t v, weight_t w );
    void remove_edge( std::size_t u, std::size_t v );
    [[nodiscard]] std::optional< weight_t > weight( std::size_t u, std::size_t v ) const;
    [[nodiscard]] const std::map< vertex_pair, weight_t >& edges() const { return _edges; }

    // New clone of v in v's group, without edges.
    std::size_t clone( std::size_t v );
    void remove_vertex( std::size_t v );

    // Subgraph on I, F and the given property groups; other vertices are removed.
    [[nodiscard]] reach_graph restricted( const std::vector< std::size_t >& groups ) const;
};

// All-pairs minimum weights with next hops for path reconstruction.
class closure
{
    std::size_t _n = 0;
    std::vector< weight_t > _dist;
    std::vector< std::size_t > _next;

public:
    explicit closure( const reach_graph& g );

    [[nodiscard]] std::size_t size() const { return _n; }
    [[nodiscard]] weight_t dist( std::size_t u, std::size_t v ) const { return _dist[ u * _n + v ]; }
    [[nodiscard]] bool reaches( std::size_t u, std::size_t v ) const { return dist( u, v ) < unreachable; }
    // Vertex sequence u .. v along original edges; {u} when u == v.
    [[nodiscard]] std::vector< std::size_t > expand( std::size_t u, std::size_t v ) const;
};

// Closed graph as a reach_graph: every reachable pair becomes an edge.
[[nodiscard]] reach_graph transitive_closure( const reach_graph& g );

// Why a covering path does not exist. Conditions: (1) every vertex reachable
// from I, (2) F reachable from every vertex, (3) any two properties ordered
// by reachability.
struct covering_report
{
    bool ok = false;
    std::vector< std::size_t > unreachable_from_initial;
    std::vector< std::size_t > cannot_reach_final;
    std::vector< vertex_pair > unordered;
    // chosen member per property group when ok
    std::vector< std::size_t > chosen;

    [[nodiscard]] bool conditions_1_2() const { return unreachable_from_initial.empty() && cannot_reach_final.empty(); }
    [[nodiscard]] std::string describe( const reach_graph& g ) const;
};

// Group aware: a refinement group needs one member on the path.
[[nodiscard]] covering_report check_covering( const reach_graph& g );
[[nodiscard]] bool exists_covering_path( const reach_graph& g );

// A path over original edges from I to F visiting a member of every group,
// built by insertion; nullopt when none exists.
struct abstract_path
{
    std::vector< std::size_t > vertices;
    std::vector< weight_t > weights; // one per consecutive pair

    [[nodiscard]] weight_t length() const;
    [[nodiscard]] bool operator==( const abstract_path& ) const = default;
};

[[nodiscard]] std::optional< abstract_path > get_covering_path( const reach_graph& g );
// Weights along a vertex sequence; nullopt if an edge is missing.
[[nodiscard]] std::optional< abstract_path > with_weights( const reach_graph& g, const std::vector< std::size_t >& vs );
// Visits every property group and is made of graph edges from I to F.
[[nodiscard]] bool is_covering( const reach_graph& g, const abstract_path& p );

struct build_options
{
    std::size_t k_max = 50;
    std::size_t k_min = 0; // keep collecting edges up to this bound
};

struct build_result
{
    enum class outcome
    {
        ok,
        bound_exceeded,  // no covering path with weights up to k_max
        no_single_chain  // all pairs resolved, still no covering path
    };

    reach_graph graph;
    outcome result = outcome::ok;
    std::size_t k = 0; // last bound explored
    std::uint64_t solver_calls = 0;
};

[[nodiscard]] build_result build_graph( bmc::context& ctx, const std::vector< bmc::vertex_spec >& vertices,
                                        const build_options& opt = {} );

[[nodiscard]] std::string to_dot( const reach_graph& g, const abstract_path* highlight = nullptr );

} // namespace chainforge::reach
