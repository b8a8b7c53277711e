#pragma once

#include <algorithm>
#include <compare>
#include <cstdlib>
#include <iosfwd>
#include <span>
#include <vector>

namespace chainforge::sat
{

// DIMACS-style literal: variable index (from 1) with a sign.
class lit
{
    int _v = 0;

public:
    constexpr lit() = default;
    constexpr explicit lit( int dimacs ) : _v{ dimacs } {}

    [[nodiscard]] constexpr int dimacs() const { return _v; }
    [[nodiscard]] constexpr int var() const { return _v < 0 ? -_v : _v; }
    [[nodiscard]] constexpr bool negated() const { return _v < 0; }
    [[nodiscard]] constexpr bool valid() const { return _v != 0; }

    constexpr lit operator~() const { return lit{ -_v }; }
    friend constexpr auto operator<=>( lit, lit ) = default;
};

using clause = std::vector< lit >;

// Anything clauses can be added to: a solver or a plain CNF.
class clause_sink
{
public:
    virtual ~clause_sink() = default;

    // Returns a positive literal for a fresh variable.
    virtual lit new_var() = 0;
    virtual void add_clause( std::span< const lit > c ) = 0;

    void add_clause( std::initializer_list< lit > c ) { add_clause( std::span< const lit >( c.begin(), c.size() ) ); }
    [[nodiscard]] virtual int num_vars() const = 0;
};

class cnf : public clause_sink
{
    int _vars = 0;
    std::vector< clause > _clauses;

public:
    using clause_sink::add_clause;

    lit new_var() override { return lit{ ++_vars }; }
    void add_clause( std::span< const lit > c ) override;
    [[nodiscard]] int num_vars() const override { return _vars; }
    void reserve_vars( int n ) { _vars = std::max( _vars, n ); }

    [[nodiscard]] const std::vector< clause >& clauses() const { return _clauses; }

    // Truth value of the CNF under a total assignment indexed by variable
    // (index 0 unused).
    [[nodiscard]] bool satisfied_by( const std::vector< bool >& assignment ) const;

    // Standard DIMACS `p cnf` format.
    void write_dimacs( std::ostream& out ) const;
    // Throws chainforge::error on malformed input.
    [[nodiscard]] static cnf read_dimacs( std::istream& in );
};

} // namespace chainforge::sat
