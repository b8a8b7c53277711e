#pragma once

#include "chainforge/model/domain.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace chainforge
{

enum class op
{
    constant,
    state_var, // current-state variable
    next_var,  // next-state variable, only in assertions
    input_var,
    not_,
    and_,
    or_,
    implies,
    eq,
    ne,
    lt,
    le,
    add,
    sub,
    ite
};

// Immutable, well-sorted expression tree. Nodes are shared, so copies are
// cheap. The factory functions check sorts and throw sort_error.
//
// Integer `+` and `-` saturate: the result is clamped to the hull of the
// declared domains of the operands (variables declare their domain, constants
// declare nothing). Operations on constants alone are folded.
class expr
{
    struct node;
    std::shared_ptr< const node > _node;

    explicit expr( std::shared_ptr< const node > n ) : _node{ std::move( n ) } {}

    static expr make( op kind, domain sort, std::vector< expr > args, value_t value = 0,
                      std::size_t var = 0, std::optional< domain > declared = std::nullopt );

public:
    expr(); // the constant `true`

    [[nodiscard]] static expr constant( const domain& sort, value_t value );
    [[nodiscard]] static expr boolean( bool value );
    [[nodiscard]] static expr integer( value_t value );

    [[nodiscard]] static expr state_ref( std::size_t var, const domain& sort );
    [[nodiscard]] static expr next_ref( std::size_t var, const domain& sort );
    [[nodiscard]] static expr input_ref( std::size_t var, const domain& sort );

    [[nodiscard]] static expr not_( const expr& a );
    [[nodiscard]] static expr and_( const expr& a, const expr& b );
    [[nodiscard]] static expr or_( const expr& a, const expr& b );
    [[nodiscard]] static expr implies( const expr& a, const expr& b );
    [[nodiscard]] static expr eq( const expr& a, const expr& b );
    [[nodiscard]] static expr ne( const expr& a, const expr& b );
    [[nodiscard]] static expr lt( const expr& a, const expr& b );
    [[nodiscard]] static expr le( const expr& a, const expr& b );
    [[nodiscard]] static expr add( const expr& a, const expr& b );
    [[nodiscard]] static expr sub( const expr& a, const expr& b );
    [[nodiscard]] static expr ite( const expr& c, const expr& t, const expr& e );

    // Conjunction/disjunction of a list; empty lists give true/false.
    [[nodiscard]] static expr all_of( const std::vector< expr >& parts );
    [[nodiscard]] static expr any_of( const std::vector< expr >& parts );

    [[nodiscard]] op kind() const;
    [[nodiscard]] const domain& sort() const;
    [[nodiscard]] value_t value() const;     // constants only
    [[nodiscard]] std::size_t var() const;   // variable references only
    [[nodiscard]] const std::vector< expr >& args() const;
    // Clamp range of arithmetic nodes, domain of variable references.
    [[nodiscard]] const std::optional< domain >& declared() const;

    [[nodiscard]] bool is_true() const { return kind() == op::constant && sort().is_bool() && value() != 0; }
    [[nodiscard]] bool is_false() const { return kind() == op::constant && sort().is_bool() && value() == 0; }

    [[nodiscard]] bool mentions( op var_kind ) const;
    [[nodiscard]] bool has_next_refs() const { return mentions( op::next_var ); }
    [[nodiscard]] bool has_input_refs() const { return mentions( op::input_var ); }

    // Node identity, used as a cache key by the encoder.
    [[nodiscard]] const void* id() const { return _node.get(); }

    // Structural (AST) equality.
    friend bool operator==( const expr& a, const expr& b );
};

} // namespace chainforge
