#pragma once

#include "chainforge/model/expr.hpp"
#include "chainforge/sat/cnf.hpp"
#include "chainforge/sat/solver.hpp"

#include <map>
#include <utility>
#include <variant>

namespace chainforge::sat
{

// Two's-complement bit vector, least significant bit first.
struct bitvec
{
    std::vector< lit > bits;

    [[nodiscard]] std::size_t width() const { return bits.size(); }
};

// Bit-level view of the variables an expression may refer to. A variable's
// bits hold value - lo in unsigned binary.
struct frame
{
    int id = -1; // cache key; obtain from encoder::new_frame_id()
    std::vector< std::vector< lit > > state;
    std::vector< std::vector< lit > > input;
    std::vector< std::vector< lit > > next; // empty unless next() refs are allowed
};

// Tseitin encoder from well-sorted expressions to clauses. Gates fold
// constants, and encodings are cached per (expression node, frame).
class encoder
{
    using cached = std::variant< lit, bitvec >;

    clause_sink& _sink;
    lit _true;
    int _frames = 0;
    std::map< std::pair< const void*, int >, std::pair< expr, cached > > _cache;

    bitvec value_of_var( const std::vector< lit >& bits, const domain& dom );
    bitvec constant( value_t v, std::size_t width ) const;
    bitvec extend( const bitvec& v, std::size_t width ) const;
    bitvec add( const bitvec& a, const bitvec& b, bool subtract );
    bitvec clamp( const bitvec& v, value_t lo, value_t hi );
    bitvec mux( lit c, const bitvec& t, const bitvec& e );
    lit slt( const bitvec& a, const bitvec& b );
    lit bv_eq( const bitvec& a, const bitvec& b );

public:
    explicit encoder( clause_sink& sink );

    [[nodiscard]] lit true_lit() const { return _true; }
    [[nodiscard]] lit false_lit() const { return ~_true; }
    [[nodiscard]] clause_sink& sink() { return _sink; }

    [[nodiscard]] int new_frame_id() { return _frames++; }

    // Fresh variable bits for a domain, with range-blocking clauses.
    [[nodiscard]] std::vector< lit > make_var( const domain& dom );

    // Gates.
    [[nodiscard]] lit and_( lit a, lit b );
    [[nodiscard]] lit or_( lit a, lit b );
    [[nodiscard]] lit xor_( lit a, lit b );
    [[nodiscard]] lit ite( lit c, lit t, lit e );
    [[nodiscard]] lit and_all( const std::vector< lit >& ls );
    [[nodiscard]] lit or_all( const std::vector< lit >& ls );

    // Literal equivalent to a boolean expression.
    [[nodiscard]] lit encode( const expr& e, const frame& f );
    // Bit vector of a non-boolean expression.
    [[nodiscard]] bitvec encode_value( const expr& e, const frame& f );

    // Literal for "variable == v".
    [[nodiscard]] lit equals( const std::vector< lit >& bits, const domain& dom, value_t v );
    // Literal for "variable == e", with e saturated at the variable's domain.
    [[nodiscard]] lit assigns( const std::vector< lit >& bits, const domain& dom, const expr& e, const frame& f );

    // Value of variable bits in the solver's current model.
    [[nodiscard]] static value_t decode( const std::vector< lit >& bits, const domain& dom, const solver& s );
};

// Number of bits make_var uses for a domain.
[[nodiscard]] std::size_t bits_for( const domain& dom );

} // namespace chainforge::sat
