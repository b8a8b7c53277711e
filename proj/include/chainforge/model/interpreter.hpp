#pragma once

#include "chainforge/model/model.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace chainforge
{

// Explicit-state semantics. These functions define the meaning of models and
// properties; the SAT encoding is tested against them.

// Throws semantic_error if the expression refers to the next state and
// `next` is null.
[[nodiscard]] value_t eval( const expr& e, const state_vec& s, const input_vec& i, const state_vec* next = nullptr );
[[nodiscard]] bool holds( const expr& e, const state_vec& s, const input_vec& i, const state_vec* next = nullptr );

// Successor under the transition function, without any checks. Assigned
// values saturate at the target variable's domain.
[[nodiscard]] state_vec apply_transition( const model& m, const state_vec& s, const input_vec& i );

// Checked step: throws semantic_error if `i` violates the input assumption or
// `s` violates the invariant, and model_error if the successor does.
[[nodiscard]] state_vec step( const model& m, const state_vec& s, const input_vec& i );

// Step that reports violations as nullopt instead of throwing.
[[nodiscard]] std::optional< state_vec > try_step( const model& m, const state_vec& s, const input_vec& i );

// Enumeration over the full (unconstrained) state and input spaces, in
// lexicographic order of variable values. Callers bound the size first.
void for_each_state( const model& m, const std::function< void( const state_vec& ) >& f );
void for_each_input( const model& m, const std::function< void( const input_vec& ) >& f );

// All input vectors satisfying the input assumption.
[[nodiscard]] std::vector< input_vec > valid_inputs( const model& m );
// All states satisfying `pred` and the state invariant.
[[nodiscard]] std::vector< state_vec > states_satisfying( const model& m, const expr& pred );

// States reachable from `starts` by checked steps. Returns nullopt if more
// than `limit` states are found.
[[nodiscard]] std::optional< std::vector< state_vec > > reachable_states( const model& m,
                                                                         const std::vector< state_vec >& starts,
                                                                         std::size_t limit );

struct property_violation
{
    std::string property;
    std::size_t step;
};

struct replay_report
{
    std::vector< input_vec > inputs;
    std::vector< state_vec > trace;
    std::map< std::string, std::size_t > covers;
    std::vector< std::string > uncovered;
    std::vector< property_violation > violations; // assertion false at a covering step
    bool final_reached = false;
    std::optional< std::size_t > invalid_input_step;
    std::optional< std::size_t > invariant_violation_step;

    [[nodiscard]] bool ok() const;
    [[nodiscard]] std::optional< test_chain > chain() const;
    [[nodiscard]] std::string describe() const;
};

// Simulates `inputs` from `start` (default: the model's deterministic initial
// state), records the first covering step of each property, checks each
// assertion wherever its assumption holds, and checks `final` at the end.
[[nodiscard]] replay_report replay( const model& m, const std::vector< property >& props, const expr& final,
                                    const std::vector< input_vec >& inputs,
                                    const std::optional< state_vec >& start = std::nullopt );

} // namespace chainforge
