#include "chainforge/model/expr.hpp"
#include "chainforge/model/error.hpp"

#include <algorithm>

namespace chainforge
{

struct expr::node
{
    op kind;
    domain sort;
    std::vector< expr > args;
    value_t value = 0;
    std::size_t var = 0;
    std::optional< domain > declared;
};

namespace
{

void require_bool( const expr& e, const char* what )
{
    if ( !e.sort().is_bool() )
        throw sort_error( std::string{ "operand of " } + what + " must be boolean, got " + e.sort().to_string() );
}

void require_int( const expr& e, const char* what )
{
    if ( !e.sort().is_int() )
        throw sort_error( std::string{ "operand of " } + what + " must be an integer, got " + e.sort().to_string() );
}

bool comparable( const domain& a, const domain& b )
{
    if ( a.kind() != b.kind() )
        return false;
    if ( a.is_enum() )
        return a.names() == b.names();
    return true;
}

value_t clamp_to( value_t v, const std::optional< domain >& range )
{
    if ( !range )
        return v;
    return std::clamp( v, range->lo(), range->hi() );
}

} // namespace

expr::expr() : expr{ boolean( true ) } {}

expr expr::make( op kind, domain sort, std::vector< expr > args, value_t value, std::size_t var,
                 std::optional< domain > declared )
{
    return expr{ std::make_shared< const node >(
            node{ kind, std::move( sort ), std::move( args ), value, var, std::move( declared ) } ) };
}

expr expr::constant( const domain& sort, value_t value )
{
    if ( sort.is_int() )
        return integer( value );
    if ( !sort.contains( value ) )
        throw sort_error( "constant " + std::to_string( value ) + " outside domain " + sort.to_string() );
    return make( op::constant, sort, {}, value );
}

expr expr::boolean( bool value )
{
    return make( op::constant, domain::boolean(), {}, value ? 1 : 0 );
}

expr expr::integer( value_t value )
{
    return make( op::constant, domain::integer( value, value ), {}, value );
}

expr expr::state_ref( std::size_t var, const domain& sort )
{
    return make( op::state_var, sort, {}, 0, var, sort );
}

expr expr::next_ref( std::size_t var, const domain& sort )
{
    return make( op::next_var, sort, {}, 0, var, sort );
}

expr expr::input_ref( std::size_t var, const domain& sort )
{
    return make( op::input_var, sort, {}, 0, var, sort );
}

expr expr::not_( const expr& a )
{
    require_bool( a, "!" );
    if ( a.kind() == op::constant )
        return boolean( a.value() == 0 );
    return make( op::not_, domain::boolean(), { a } );
}

expr expr::and_( const expr& a, const expr& b )
{
    require_bool( a, "&&" );
    require_bool( b, "&&" );
    return make( op::and_, domain::boolean(), { a, b } );
}

expr expr::or_( const expr& a, const expr& b )
{
    require_bool( a, "||" );
    require_bool( b, "||" );
    return make( op::or_, domain::boolean(), { a, b } );
}

expr expr::implies( const expr& a, const expr& b )
{
    require_bool( a, "->" );
    require_bool( b, "->" );
    return make( op::implies, domain::boolean(), { a, b } );
}

expr expr::eq( const expr& a, const expr& b )
{
    if ( !comparable( a.sort(), b.sort() ) )
        throw sort_error( "cannot compare " + a.sort().to_string() + " with " + b.sort().to_string() );
    return make( op::eq, domain::boolean(), { a, b } );
}

expr expr::ne( const expr& a, const expr& b )
{
    if ( !comparable( a.sort(), b.sort() ) )
        throw sort_error( "cannot compare " + a.sort().to_string() + " with " + b.sort().to_string() );
    return make( op::ne, domain::boolean(), { a, b } );
}

expr expr::lt( const expr& a, const expr& b )
{
    if ( a.sort().is_enum() || b.sort().is_enum() )
        throw sort_error( "enum values can only be compared with == and !=" );
    require_int( a, "<" );
    require_int( b, "<" );
    return make( op::lt, domain::boolean(), { a, b } );
}

expr expr::le( const expr& a, const expr& b )
{
    if ( a.sort().is_enum() || b.sort().is_enum() )
        throw sort_error( "enum values can only be compared with == and !=" );
    require_int( a, "<=" );
    require_int( b, "<=" );
    return make( op::le, domain::boolean(), { a, b } );
}

namespace
{

std::optional< domain > clamp_range( const expr& a, const expr& b )
{
    const auto& da = a.declared();
    const auto& db = b.declared();
    if ( da && db )
        return hull( *da, *db );
    if ( da )
        return da;
    return db;
}

} // namespace

expr expr::add( const expr& a, const expr& b )
{
    require_int( a, "+" );
    require_int( b, "+" );
    auto range = clamp_range( a, b );
    if ( a.kind() == op::constant && b.kind() == op::constant )
        return integer( clamp_to( a.value() + b.value(), range ) );

    const auto lo = clamp_to( a.sort().lo() + b.sort().lo(), range );
    const auto hi = clamp_to( a.sort().hi() + b.sort().hi(), range );
    return make( op::add, domain::integer( lo, hi ), { a, b }, 0, 0, std::move( range ) );
}

expr expr::sub( const expr& a, const expr& b )
{
    require_int( a, "-" );
    require_int( b, "-" );
    auto range = clamp_range( a, b );
    if ( a.kind() == op::constant && b.kind() == op::constant )
        return integer( clamp_to( a.value() - b.value(), range ) );

    const auto lo = clamp_to( a.sort().lo() - b.sort().hi(), range );
    const auto hi = clamp_to( a.sort().hi() - b.sort().lo(), range );
    return make( op::sub, domain::integer( lo, hi ), { a, b }, 0, 0, std::move( range ) );
}

expr expr::ite( const expr& c, const expr& t, const expr& e )
{
    require_bool( c, "?:" );
    if ( !comparable( t.sort(), e.sort() ) )
        throw sort_error( "branches of ?: have different sorts " + t.sort().to_string() + " and " +
                          e.sort().to_string() );

    if ( !t.sort().is_int() )
        return make( op::ite, t.sort(), { c, t, e } );

    auto declared = std::optional< domain >{};
    if ( t.declared() && e.declared() )
        declared = hull( *t.declared(), *e.declared() );
    else if ( t.declared() )
        declared = t.declared();
    else
        declared = e.declared();
    return make( op::ite, hull( t.sort(), e.sort() ), { c, t, e }, 0, 0, std::move( declared ) );
}

expr expr::all_of( const std::vector< expr >& parts )
{
    if ( parts.empty() )
        return boolean( true );
    auto out = parts.front();
    for ( std::size_t i = 1; i < parts.size(); ++i )
        out = and_( out, parts[ i ] );
    return out;
}

expr expr::any_of( const std::vector< expr >& parts )
{
    if ( parts.empty() )
        return boolean( false );
    auto out = parts.front();
    for ( std::size_t i = 1; i < parts.size(); ++i )
        out = or_( out, parts[ i ] );
    return out;
}

op expr::kind() const { return _node->kind; }
const domain& expr::sort() const { return _node->sort; }
value_t expr::value() const { return _node->value; }
std::size_t expr::var() const { return _node->var; }
const std::vector< expr >& expr::args() const { return _node->args; }
const std::optional< domain >& expr::declared() const { return _node->declared; }

bool expr::mentions( op var_kind ) const
{
    if ( kind() == var_kind )
        return true;
    return std::any_of( args().begin(), args().end(), [ & ]( const expr& a ) { return a.mentions( var_kind ); } );
}

bool operator==( const expr& a, const expr& b )
{
    if ( a._node == b._node )
        return true;
    const auto& x = *a._node;
    const auto& y = *b._node;
    return x.kind == y.kind && x.sort == y.sort && x.value == y.value && x.var == y.var &&
           x.declared == y.declared && x.args == y.args;
}

} // namespace chainforge
