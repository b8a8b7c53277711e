#pragma once

// Explicit-state reference for weighted edges: exhaustive enumeration of
// covering steps and exact-k successor sets.

#include "chainforge/bmc/bmc.hpp"

#include <set>

namespace chainforge::test
{

using state_set = std::set< state_vec >;

// States reachable in exactly one step after covering `from` at step 0.
inline std::optional< state_set > after_source( const model& m, const bmc::vertex_spec& from, bool& zero_ok,
                                                const bmc::vertex_spec& to )
{
    const auto inputs = valid_inputs( m );
    auto out = state_set{};
    zero_ok = false;
    for ( const auto& s : states_satisfying( m, expr::boolean( true ) ) )
        for ( const auto& i : inputs )
        {
            if ( !holds( from.trigger, s, i ) )
                continue;
            const auto next = try_step( m, s, i );
            if ( from.k == bmc::vertex_spec::kind::property && ( !next || !holds( from.assertion, s, i, &*next ) ) )
                continue;
            if ( holds( to.trigger, s, i ) && !( from.k == bmc::vertex_spec::kind::property &&
                                                 to.k == bmc::vertex_spec::kind::final ) )
                zero_ok = true;
            if ( next )
                out.insert( *next );
        }
    return out;
}

inline state_set successors( const model& m, const state_set& from, const std::vector< input_vec >& inputs )
{
    auto out = state_set{};
    for ( const auto& s : from )
        for ( const auto& i : inputs )
            if ( const auto n = try_step( m, s, i ) )
                out.insert( *n );
    return out;
}

inline bool target_in( const model& m, const state_set& states, const bmc::vertex_spec& to,
                       const std::vector< input_vec >& inputs )
{
    (void)m;
    for ( const auto& s : states )
        for ( const auto& i : inputs )
            if ( holds( to.trigger, s, i ) )
                return true;
    return false;
}

// Least k <= k_max with a k-step connection, or nullopt.
inline std::optional< std::size_t > min_weight( const model& m, const bmc::vertex_spec& from,
                                                const bmc::vertex_spec& to, std::size_t k_max )
{
    auto zero_ok = false;
    auto frontier = *after_source( m, from, zero_ok, to );
    if ( zero_ok )
        return 0;
    const auto inputs = valid_inputs( m );
    for ( std::size_t k = 1; k <= k_max; ++k )
    {
        if ( target_in( m, frontier, to, inputs ) )
            return k;
        frontier = successors( m, frontier, inputs );
    }
    return std::nullopt;
}

} // namespace chainforge::test
