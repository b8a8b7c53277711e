#pragma once

#include "chainforge/model/domain.hpp"
#include "chainforge/model/expr.hpp"

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace chainforge
{

struct variable
{
    std::string name;
    domain dom;
};

struct state_variable
{
    std::string name;
    domain dom;
    std::optional< value_t > init;
};

// Total assignment of the state (resp. input) variables, indexed like the
// model's variable lists.
struct state_vec
{
    std::vector< value_t > values;

    [[nodiscard]] value_t operator[]( std::size_t i ) const { return values[ i ]; }
    friend auto operator<=>( const state_vec&, const state_vec& ) = default;
};

struct input_vec
{
    std::vector< value_t > values;

    [[nodiscard]] value_t operator[]( std::size_t i ) const { return values[ i ]; }
    friend auto operator<=>( const input_vec&, const input_vec& ) = default;
};

// A synchronous reactive system: finite-domain state and input variables,
// an initial-state predicate, an input assumption, a state invariant and a
// simultaneous-assignment transition function. Variables without a
// transition keep their value.
class model
{
    std::string _name;
    std::vector< state_variable > _states;
    std::vector< variable > _inputs;
    std::vector< expr > _init_constraints;
    expr _input_assumption;
    expr _invariant;
    std::vector< std::optional< expr > > _transition;

    void check_fresh( const std::string& name ) const;

public:
    explicit model( std::string name = "model" ) : _name{ std::move( name ) } {}

    // Construction. Each throws sort_error on bad names or sorts.
    std::size_t add_state( const std::string& name, const domain& dom, std::optional< value_t > init = std::nullopt );
    std::size_t add_input( const std::string& name, const domain& dom );
    void add_init_constraint( const expr& e );  // over state
    void add_input_assumption( const expr& e ); // over inputs
    void add_invariant( const expr& e );        // over state
    void set_transition( std::size_t state, const expr& e ); // over state and inputs

    [[nodiscard]] const std::string& name() const { return _name; }
    [[nodiscard]] const std::vector< state_variable >& states() const { return _states; }
    [[nodiscard]] const std::vector< variable >& inputs() const { return _inputs; }
    [[nodiscard]] const std::vector< expr >& init_constraints() const { return _init_constraints; }
    [[nodiscard]] const expr& input_assumption() const { return _input_assumption; }
    [[nodiscard]] const expr& invariant() const { return _invariant; }
    [[nodiscard]] const std::optional< expr >& transition( std::size_t state ) const { return _transition[ state ]; }

    [[nodiscard]] std::optional< std::size_t > find_state( const std::string& name ) const;
    [[nodiscard]] std::optional< std::size_t > find_input( const std::string& name ) const;

    // Convenience references by name; throw sort_error on unknown names.
    [[nodiscard]] expr state( const std::string& name ) const;
    [[nodiscard]] expr next( const std::string& name ) const;
    [[nodiscard]] expr input( const std::string& name ) const;
    // Enum or boolean constant of the given state variable's domain.
    [[nodiscard]] expr constant_of( const std::string& var, const std::string& name ) const;

    // Conjunction of the per-variable init values and the init constraints.
    [[nodiscard]] expr init_predicate() const;
    // Every state variable has an init value and there are no init constraints.
    [[nodiscard]] bool has_deterministic_init() const;
    // Throws model_error unless has_deterministic_init().
    [[nodiscard]] state_vec initial_state() const;

    // Product of domain sizes, saturating at UINT64_MAX.
    [[nodiscard]] std::uint64_t state_space_size() const;
    [[nodiscard]] std::uint64_t input_space_size() const;

    [[nodiscard]] std::string format( const state_vec& s ) const;
    [[nodiscard]] std::string format( const input_vec& i ) const;
};

// A safety property G(assumption => assertion). The assumption ranges over
// state and inputs; the assertion may also refer to the next state.
struct property
{
    std::string name;
    expr assumption;
    expr assertion;
};

// Input sequence with its execution and the step at which each property is
// covered.
struct test_chain
{
    std::vector< input_vec > inputs;
    std::vector< state_vec > trace; // inputs.size() + 1 states
    std::map< std::string, std::size_t > covers;

    [[nodiscard]] std::size_t length() const { return inputs.size(); }
};

} // namespace chainforge
