#include "chainforge/model/model.hpp"
#include "chainforge/model/error.hpp"

#include <limits>

namespace chainforge
{

void model::check_fresh( const std::string& name ) const
{
    if ( find_state( name ) || find_input( name ) )
        throw sort_error( "duplicate variable name '" + name + "'" );
}

std::size_t model::add_state( const std::string& name, const domain& dom, std::optional< value_t > init )
{
    check_fresh( name );
    if ( init && !dom.contains( *init ) )
        throw sort_error( "init value of '" + name + "' outside its domain " + dom.to_string() );
    _states.push_back( { name, dom, init } );
    _transition.emplace_back();
    return _states.size() - 1;
}

std::size_t model::add_input( const std::string& name, const domain& dom )
{
    check_fresh( name );
    _inputs.push_back( { name, dom } );
    return _inputs.size() - 1;
}

void model::add_init_constraint( const expr& e )
{
    if ( !e.sort().is_bool() )
        throw sort_error( "init constraint must be boolean" );
    if ( e.has_input_refs() || e.has_next_refs() )
        throw sort_error( "init constraint may only refer to state variables" );
    _init_constraints.push_back( e );
}

void model::add_input_assumption( const expr& e )
{
    if ( !e.sort().is_bool() )
        throw sort_error( "input assumption must be boolean" );
    if ( e.mentions( op::state_var ) || e.has_next_refs() )
        throw sort_error( "input assumption may only refer to input variables" );
    _input_assumption = _input_assumption.is_true() ? e : expr::and_( _input_assumption, e );
}

void model::add_invariant( const expr& e )
{
    if ( !e.sort().is_bool() )
        throw sort_error( "state invariant must be boolean" );
    if ( e.has_input_refs() || e.has_next_refs() )
        throw sort_error( "state invariant may only refer to state variables" );
    _invariant = _invariant.is_true() ? e : expr::and_( _invariant, e );
}

void model::set_transition( std::size_t state, const expr& e )
{
    const auto& var = _states.at( state );
    if ( e.has_next_refs() )
        throw sort_error( "transition of '" + var.name + "' may not refer to next-state values" );

    const auto& target = var.dom;
    const auto ok = target.is_int() ? e.sort().is_int()
                                    : ( e.sort().kind() == target.kind() && e.sort().names() == target.names() );
    if ( !ok )
        throw sort_error( "transition of '" + var.name + "' has sort " + e.sort().to_string() + ", expected " +
                          target.to_string() );
    if ( _transition[ state ] )
        throw sort_error( "duplicate transition for '" + var.name + "'" );
    _transition[ state ] = e;
}

std::optional< std::size_t > model::find_state( const std::string& name ) const
{
    for ( std::size_t i = 0; i < _states.size(); ++i )
        if ( _states[ i ].name == name )
            return i;
    return std::nullopt;
}

std::optional< std::size_t > model::find_input( const std::string& name ) const
{
    for ( std::size_t i = 0; i < _inputs.size(); ++i )
        if ( _inputs[ i ].name == name )
            return i;
    return std::nullopt;
}

expr model::state( const std::string& name ) const
{
    const auto i = find_state( name );
    if ( !i )
        throw sort_error( "unknown state variable '" + name + "'" );
    return expr::state_ref( *i, _states[ *i ].dom );
}

expr model::next( const std::string& name ) const
{
    const auto i = find_state( name );
    if ( !i )
        throw sort_error( "unknown state variable '" + name + "'" );
    return expr::next_ref( *i, _states[ *i ].dom );
}

expr model::input( const std::string& name ) const
{
    const auto i = find_input( name );
    if ( !i )
        throw sort_error( "unknown input variable '" + name + "'" );
    return expr::input_ref( *i, _inputs[ *i ].dom );
}

expr model::constant_of( const std::string& var, const std::string& name ) const
{
    const auto i = find_state( var );
    if ( !i )
        throw sort_error( "unknown state variable '" + var + "'" );
    const auto& dom = _states[ *i ].dom;
    const auto v = dom.lookup( name );
    if ( !v )
        throw sort_error( "'" + name + "' is not a constant of " + dom.to_string() );
    return expr::constant( dom, *v );
}

expr model::init_predicate() const
{
    auto parts = std::vector< expr >{};
    for ( std::size_t i = 0; i < _states.size(); ++i )
        if ( _states[ i ].init )
            parts.push_back( expr::eq( expr::state_ref( i, _states[ i ].dom ),
                                       expr::constant( _states[ i ].dom, *_states[ i ].init ) ) );
    parts.insert( parts.end(), _init_constraints.begin(), _init_constraints.end() );
    return expr::all_of( parts );
}

bool model::has_deterministic_init() const
{
    if ( !_init_constraints.empty() )
        return false;
    for ( const auto& s : _states )
        if ( !s.init )
            return false;
    return true;
}

state_vec model::initial_state() const
{
    if ( !has_deterministic_init() )
        throw model_error( "model '" + _name + "' has no deterministic initial state" );
    auto out = state_vec{};
    for ( const auto& s : _states )
        out.values.push_back( *s.init );
    return out;
}

namespace
{

template < typename Vars >
std::uint64_t space_size( const Vars& vars )
{
    constexpr auto limit = std::numeric_limits< std::uint64_t >::max();
    auto total = std::uint64_t{ 1 };
    for ( const auto& v : vars )
    {
        const auto n = v.dom.size();
        if ( total > limit / n )
            return limit;
        total *= n;
    }
    return total;
}

template < typename Vars, typename Vec >
std::string format_vec( const Vars& vars, const Vec& vec )
{
    auto out = std::string{ "(" };
    for ( std::size_t i = 0; i < vars.size(); ++i )
    {
        if ( i > 0 )
            out += ", ";
        out += vars[ i ].name + "=" + vars[ i ].dom.format( vec[ i ] );
    }
    return out + ")";
}

} // namespace

std::uint64_t model::state_space_size() const { return space_size( _states ); }
std::uint64_t model::input_space_size() const { return space_size( _inputs ); }

std::string model::format( const state_vec& s ) const { return format_vec( _states, s ); }
std::string model::format( const input_vec& i ) const { return format_vec( _inputs, i ); }

} // namespace chainforge
