#include "chainforge/sat/encoder.hpp"
#include "chainforge/model/error.hpp"

#include <algorithm>

namespace chainforge::sat
{

namespace
{

// Smallest two's-complement width holding every value of [lo, hi].
std::size_t signed_width( value_t lo, value_t hi )
{
    auto w = std::size_t{ 1 };
    while ( lo < -( value_t{ 1 } << ( w - 1 ) ) || hi > ( value_t{ 1 } << ( w - 1 ) ) - 1 )
        ++w;
    return w;
}

} // namespace

std::size_t bits_for( const domain& dom )
{
    auto w = std::size_t{ 0 };
    while ( ( std::uint64_t{ 1 } << w ) < dom.size() )
        ++w;
    return w;
}

encoder::encoder( clause_sink& sink ) : _sink{ sink }, _true{ sink.new_var() }
{
    _sink.add_clause( { _true } );
}

std::vector< lit > encoder::make_var( const domain& dom )
{
    auto bits = std::vector< lit >{};
    const auto w = bits_for( dom );
    for ( std::size_t i = 0; i < w; ++i )
        bits.push_back( _sink.new_var() );

    // value - lo <= size - 1: for each 0 bit i of the bound, not (x_i and the
    // higher bits equal to the bound's).
    const auto bound = dom.size() - 1;
    if ( w > 0 && bound != ( std::uint64_t{ 1 } << w ) - 1 )
    {
        for ( std::size_t i = 0; i < w; ++i )
        {
            if ( ( bound >> i ) & 1 )
                continue;
            auto c = clause{ ~bits[ i ] };
            for ( auto j = i + 1; j < w; ++j )
                c.push_back( ( ( bound >> j ) & 1 ) ? ~bits[ j ] : bits[ j ] );
            _sink.add_clause( c );
        }
    }
    return bits;
}

lit encoder::and_( lit a, lit b )
{
    if ( a == false_lit() || b == false_lit() || a == ~b )
        return false_lit();
    if ( a == true_lit() || a == b )
        return b;
    if ( b == true_lit() )
        return a;
    const auto g = _sink.new_var();
    _sink.add_clause( { ~g, a } );
    _sink.add_clause( { ~g, b } );
    _sink.add_clause( { g, ~a, ~b } );
    return g;
}

lit encoder::or_( lit a, lit b ) { return ~and_( ~a, ~b ); }

lit encoder::xor_( lit a, lit b )
{
    if ( a == b )
        return false_lit();
    if ( a == ~b )
        return true_lit();
    if ( a == false_lit() )
        return b;
    if ( a == true_lit() )
        return ~b;
    if ( b == false_lit() )
        return a;
    if ( b == true_lit() )
        return ~a;
    const auto g = _sink.new_var();
    _sink.add_clause( { ~g, a, b } );
    _sink.add_clause( { ~g, ~a, ~b } );
    _sink.add_clause( { g, ~a, b } );
    _sink.add_clause( { g, a, ~b } );
    return g;
}

lit encoder::ite( lit c, lit t, lit e )
{
    if ( c == true_lit() || t == e )
        return t;
    if ( c == false_lit() )
        return e;
    if ( t == true_lit() )
        return or_( c, e );
    if ( t == false_lit() )
        return and_( ~c, e );
    if ( e == true_lit() )
        return or_( ~c, t );
    if ( e == false_lit() )
        return and_( c, t );
    const auto g = _sink.new_var();
    _sink.add_clause( { ~c, ~t, g } );
    _sink.add_clause( { ~c, t, ~g } );
    _sink.add_clause( { c, ~e, g } );
    _sink.add_clause( { c, e, ~g } );
    return g;
}

lit encoder::and_all( const std::vector< lit >& ls )
{
    auto out = true_lit();
    for ( const auto l : ls )
        out = and_( out, l );
    return out;
}

lit encoder::or_all( const std::vector< lit >& ls )
{
    auto out = false_lit();
    for ( const auto l : ls )
        out = or_( out, l );
    return out;
}

bitvec encoder::constant( value_t v, std::size_t width ) const
{
    auto out = bitvec{};
    for ( std::size_t i = 0; i < width; ++i )
        out.bits.push_back( ( ( static_cast< std::uint64_t >( v ) >> std::min< std::size_t >( i, 63 ) ) & 1 ) ? true_lit()
                                                                                                               : false_lit() );
    return out;
}

bitvec encoder::extend( const bitvec& v, std::size_t width ) const
{
    auto out = v;
    const auto sign = v.bits.empty() ? false_lit() : v.bits.back();
    while ( out.bits.size() < width )
        out.bits.push_back( sign );
    return out;
}

bitvec encoder::add( const bitvec& a, const bitvec& b, bool subtract )
{
    const auto w = std::max( a.width(), b.width() ) + 1;
    const auto x = extend( a, w );
    const auto y = extend( b, w );
    auto carry = subtract ? true_lit() : false_lit();
    auto out = bitvec{};
    for ( std::size_t i = 0; i < w; ++i )
    {
        const auto yi = subtract ? ~y.bits[ i ] : y.bits[ i ];
        const auto half = xor_( x.bits[ i ], yi );
        out.bits.push_back( xor_( half, carry ) );
        carry = or_( and_( x.bits[ i ], yi ), and_( carry, half ) );
    }
    return out;
}

lit encoder::slt( const bitvec& a, const bitvec& b )
{
    const auto w = std::max( a.width(), b.width() );
    const auto d = add( extend( a, w ), extend( b, w ), true );
    return d.bits.back();
}

lit encoder::bv_eq( const bitvec& a, const bitvec& b )
{
    const auto w = std::max( a.width(), b.width() );
    const auto x = extend( a, w );
    const auto y = extend( b, w );
    auto parts = std::vector< lit >{};
    for ( std::size_t i = 0; i < w; ++i )
        parts.push_back( ~xor_( x.bits[ i ], y.bits[ i ] ) );
    return and_all( parts );
}

bitvec encoder::mux( lit c, const bitvec& t, const bitvec& e )
{
    const auto w = std::max( t.width(), e.width() );
    const auto x = extend( t, w );
    const auto y = extend( e, w );
    auto out = bitvec{};
    for ( std::size_t i = 0; i < w; ++i )
        out.bits.push_back( ite( c, x.bits[ i ], y.bits[ i ] ) );
    return out;
}

bitvec encoder::clamp( const bitvec& v, value_t lo, value_t hi )
{
    const auto w = std::max( v.width(), signed_width( lo, hi ) );
    const auto x = extend( v, w );
    const auto low = constant( lo, w );
    const auto high = constant( hi, w );
    const auto clamped = mux( slt( x, low ), low, mux( slt( high, x ), high, x ) );
    auto out = clamped;
    out.bits.resize( signed_width( lo, hi ) );
    return out;
}

bitvec encoder::value_of_var( const std::vector< lit >& bits, const domain& dom )
{
    auto offset = bitvec{ bits };
    offset.bits.push_back( false_lit() ); // unsigned
    if ( dom.lo() == 0 )
        return offset;
    auto sum = add( offset, constant( dom.lo(), signed_width( dom.lo(), dom.lo() ) ), false );
    sum.bits.resize( std::min( sum.width(), signed_width( dom.lo(), dom.hi() ) ) );
    return sum;
}

lit encoder::encode( const expr& e, const frame& f )
{
    if ( !e.sort().is_bool() )
        throw sort_error( "encode expects a boolean expression" );
    if ( e.kind() == op::constant )
        return e.value() != 0 ? true_lit() : false_lit();

    const auto key = std::pair{ e.id(), f.id };
    if ( const auto it = _cache.find( key ); it != _cache.end() )
        return std::get< lit >( it->second.second );

    const auto& a = e.args();
    auto out = lit{};
    switch ( e.kind() )
    {
    case op::state_var:
    case op::input_var:
    case op::next_var:
        out = encode_value( e, f ).bits.at( 0 );
        break;
    case op::not_:
        out = ~encode( a[ 0 ], f );
        break;
    case op::and_:
        out = and_( encode( a[ 0 ], f ), encode( a[ 1 ], f ) );
        break;
    case op::or_:
        out = or_( encode( a[ 0 ], f ), encode( a[ 1 ], f ) );
        break;
    case op::implies:
        out = or_( ~encode( a[ 0 ], f ), encode( a[ 1 ], f ) );
        break;
    case op::eq:
    case op::ne:
    {
        auto same = lit{};
        if ( a[ 0 ].sort().is_bool() )
            same = ~xor_( encode( a[ 0 ], f ), encode( a[ 1 ], f ) );
        else
            same = bv_eq( encode_value( a[ 0 ], f ), encode_value( a[ 1 ], f ) );
        out = e.kind() == op::eq ? same : ~same;
        break;
    }
    case op::lt:
        out = slt( encode_value( a[ 0 ], f ), encode_value( a[ 1 ], f ) );
        break;
    case op::le:
        out = ~slt( encode_value( a[ 1 ], f ), encode_value( a[ 0 ], f ) );
        break;
    case op::ite:
        out = ite( encode( a[ 0 ], f ), encode( a[ 1 ], f ), encode( a[ 2 ], f ) );
        break;
    default:
        throw sort_error( "unexpected operator in boolean expression" );
    }
    _cache.emplace( key, std::pair{ e, cached{ out } } );
    return out;
}

bitvec encoder::encode_value( const expr& e, const frame& f )
{
    if ( e.kind() == op::constant )
        return constant( e.value(), signed_width( e.value(), e.value() ) );

    const auto key = std::pair{ e.id(), f.id };
    if ( const auto it = _cache.find( key ); it != _cache.end() )
        if ( const auto* v = std::get_if< bitvec >( &it->second.second ) )
            return *v;

    const auto& a = e.args();
    auto out = bitvec{};
    const auto pick = [ & ]( const std::vector< std::vector< lit > >& vars, const char* what ) -> const std::vector< lit >& {
        if ( e.var() >= vars.size() )
            throw error( std::string{ "frame has no " } + what + " variable " + std::to_string( e.var() ) );
        return vars[ e.var() ];
    };
    switch ( e.kind() )
    {
    case op::state_var:
        out = value_of_var( pick( f.state, "state" ), e.sort() );
        break;
    case op::input_var:
        out = value_of_var( pick( f.input, "input" ), e.sort() );
        break;
    case op::next_var:
        out = value_of_var( pick( f.next, "next-state" ), e.sort() );
        break;
    case op::add:
    case op::sub:
    {
        const auto raw = add( encode_value( a[ 0 ], f ), encode_value( a[ 1 ], f ), e.kind() == op::sub );
        const auto& range = e.declared();
        out = clamp( raw, std::max( range->lo(), e.sort().lo() ), std::min( range->hi(), e.sort().hi() ) );
        break;
    }
    case op::ite:
        out = mux( encode( a[ 0 ], f ), encode_value( a[ 1 ], f ), encode_value( a[ 2 ], f ) );
        break;
    default:
        throw sort_error( "unexpected operator in value expression" );
    }
    if ( e.sort().is_bool() )
        return out;
    _cache.emplace( key, std::pair{ e, cached{ out } } );
    return out;
}

lit encoder::equals( const std::vector< lit >& bits, const domain& dom, value_t v )
{
    if ( !dom.contains( v ) )
        return false_lit();
    const auto offset = static_cast< std::uint64_t >( v - dom.lo() );
    auto parts = std::vector< lit >{};
    for ( std::size_t i = 0; i < bits.size(); ++i )
        parts.push_back( ( ( offset >> i ) & 1 ) ? bits[ i ] : ~bits[ i ] );
    return and_all( parts );
}

lit encoder::assigns( const std::vector< lit >& bits, const domain& dom, const expr& e, const frame& f )
{
    if ( dom.is_bool() )
        return ~xor_( bits.at( 0 ), encode( e, f ) );

    auto v = encode_value( e, f );
    if ( e.sort().lo() < dom.lo() || e.sort().hi() > dom.hi() )
        v = clamp( v, dom.lo(), dom.hi() );
    // offset = v - lo, which lies in [0, size - 1]
    auto offset = dom.lo() == 0 ? v : add( v, constant( dom.lo(), signed_width( dom.lo(), dom.lo() ) ), true );
    offset = extend( offset, bits.size() + 1 );
    auto parts = std::vector< lit >{};
    for ( std::size_t i = 0; i < bits.size(); ++i )
        parts.push_back( ~xor_( bits[ i ], offset.bits[ i ] ) );
    return and_all( parts );
}

value_t encoder::decode( const std::vector< lit >& bits, const domain& dom, const solver& s )
{
    auto offset = std::uint64_t{ 0 };
    for ( std::size_t i = 0; i < bits.size(); ++i )
        if ( s.value( bits[ i ] ) )
            offset |= std::uint64_t{ 1 } << i;
    return dom.lo() + static_cast< value_t >( offset );
}

} // namespace chainforge::sat
