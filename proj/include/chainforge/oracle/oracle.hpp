#pragma once

#include "chainforge/model/interpreter.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace chainforge::oracle
{

// Explicit transition table over the invariant states and valid inputs.
class state_graph
{
    const model* _m = nullptr;
    std::vector< state_vec > _states;
    std::vector< input_vec > _inputs;
    std::vector< std::uint32_t > _succ; // state * inputs + input, npos if blocked

public:
    static constexpr std::uint32_t blocked = ~std::uint32_t{ 0 };

    state_graph( const model& m, std::size_t state_limit );

    [[nodiscard]] std::size_t size() const { return _states.size(); }
    [[nodiscard]] const std::vector< state_vec >& states() const { return _states; }
    [[nodiscard]] const std::vector< input_vec >& inputs() const { return _inputs; }
    [[nodiscard]] std::uint32_t succ( std::size_t s, std::size_t i ) const { return _succ[ s * _inputs.size() + i ]; }
    [[nodiscard]] std::optional< std::size_t > index_of( const state_vec& s ) const;
};

struct oracle_answer
{
    enum class outcome
    {
        found,
        none,      // no chain at all
        too_large  // node limit exceeded, not decided
    };

    outcome result = outcome::too_large;
    std::size_t length = 0;
    std::vector< input_vec > inputs; // one optimal chain
};

// Shortest chain covering every property (assertion holding on the covering
// step) and ending in `final`, by BFS over (state, covered set).
[[nodiscard]] oracle_answer min_chain( const model& m, const std::vector< property >& props, const expr& initial,
                                       const expr& final, std::size_t node_limit = 1'000'000 );

// Longest shortest path between two invariant states; nullopt if the model
// has more than `state_limit` states.
[[nodiscard]] std::optional< std::size_t > diameter( const model& m, std::size_t state_limit = 4096 );

struct random_params
{
    std::size_t state_bits = 4;    // at most 6
    std::size_t inputs = 3;        // input values per step, at least 2
    std::size_t min_props = 2;
    std::size_t max_props = 5;
    bool strongly_connected = true; // input 0 walks a ring through all states
    bool singleton_triggers = true;
};

struct random_instance
{
    model m;
    std::vector< property > props;
    expr initial;
    expr final;
};

[[nodiscard]] random_instance random_model( std::uint64_t seed, const random_params& params = {} );

struct baseline_result
{
    std::vector< std::vector< input_vec > > suite;    // selected tests
    std::vector< std::vector< input_vec > > generated; // all useful walks
    std::size_t total_length = 0;
    std::size_t covered = 0;
    double coverage = 0;           // covered / properties
    std::size_t steps_used = 0;
};

// Random walks from the initial states within `budget` steps, each cut at its
// last visit to `final`; a greedy weighted set cover selects the suite.
[[nodiscard]] baseline_result random_baseline( const model& m, const std::vector< property >& props,
                                               const expr& initial, const expr& final, std::size_t budget,
                                               std::uint64_t seed, std::size_t walk_length = 64 );

} // namespace chainforge::oracle
