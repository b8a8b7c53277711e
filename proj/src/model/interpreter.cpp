#include "chainforge/model/interpreter.hpp"
#include "chainforge/model/error.hpp"

#include <algorithm>
#include <set>

namespace chainforge
{

value_t eval( const expr& e, const state_vec& s, const input_vec& i, const state_vec* next )
{
    const auto& a = e.args();
    const auto arg = [ & ]( std::size_t k ) { return eval( a[ k ], s, i, next ); };

    switch ( e.kind() )
    {
    case op::constant:
        return e.value();
    case op::state_var:
        return s[ e.var() ];
    case op::input_var:
        return i[ e.var() ];
    case op::next_var:
        if ( next == nullptr )
            throw semantic_error( "expression refers to the next state but none was supplied" );
        return ( *next )[ e.var() ];
    case op::not_:
        return arg( 0 ) == 0 ? 1 : 0;
    case op::and_:
        return ( arg( 0 ) != 0 && arg( 1 ) != 0 ) ? 1 : 0;
    case op::or_:
        return ( arg( 0 ) != 0 || arg( 1 ) != 0 ) ? 1 : 0;
    case op::implies:
        return ( arg( 0 ) == 0 || arg( 1 ) != 0 ) ? 1 : 0;
    case op::eq:
        return arg( 0 ) == arg( 1 ) ? 1 : 0;
    case op::ne:
        return arg( 0 ) != arg( 1 ) ? 1 : 0;
    case op::lt:
        return arg( 0 ) < arg( 1 ) ? 1 : 0;
    case op::le:
        return arg( 0 ) <= arg( 1 ) ? 1 : 0;
    case op::add:
    case op::sub:
    {
        auto v = e.kind() == op::add ? arg( 0 ) + arg( 1 ) : arg( 0 ) - arg( 1 );
        if ( const auto& range = e.declared() )
            v = std::clamp( v, range->lo(), range->hi() );
        return v;
    }
    case op::ite:
        return arg( 0 ) != 0 ? arg( 1 ) : arg( 2 );
    }
    throw semantic_error( "unknown expression node" );
}

bool holds( const expr& e, const state_vec& s, const input_vec& i, const state_vec* next )
{
    return eval( e, s, i, next ) != 0;
}

state_vec apply_transition( const model& m, const state_vec& s, const input_vec& i )
{
    auto out = s;
    for ( std::size_t v = 0; v < m.states().size(); ++v )
    {
        const auto& t = m.transition( v );
        if ( !t )
            continue;
        const auto& dom = m.states()[ v ].dom;
        out.values[ v ] = std::clamp( eval( *t, s, i ), dom.lo(), dom.hi() );
    }
    return out;
}

namespace
{

const input_vec no_inputs{};

bool satisfies_invariant( const model& m, const state_vec& s )
{
    return holds( m.invariant(), s, no_inputs );
}

} // namespace

state_vec step( const model& m, const state_vec& s, const input_vec& i )
{
    if ( !holds( m.input_assumption(), s, i ) )
        throw semantic_error( "input " + m.format( i ) + " violates the input assumption" );
    if ( !satisfies_invariant( m, s ) )
        throw semantic_error( "state " + m.format( s ) + " violates the state invariant" );
    auto next = apply_transition( m, s, i );
    if ( !satisfies_invariant( m, next ) )
        throw model_error( "successor " + m.format( next ) + " of " + m.format( s ) + " under " + m.format( i ) +
                           " violates the state invariant" );
    return next;
}

std::optional< state_vec > try_step( const model& m, const state_vec& s, const input_vec& i )
{
    if ( !holds( m.input_assumption(), s, i ) )
        return std::nullopt;
    auto next = apply_transition( m, s, i );
    if ( !satisfies_invariant( m, next ) )
        return std::nullopt;
    return next;
}

namespace
{

template < typename Vars, typename Vec >
void enumerate( const Vars& vars, const std::function< void( const Vec& ) >& f )
{
    auto cur = Vec{};
    for ( const auto& v : vars )
        cur.values.push_back( v.dom.lo() );

    while ( true )
    {
        f( cur );
        // Odometer increment, last variable fastest.
        auto k = vars.size();
        while ( k > 0 )
        {
            --k;
            if ( cur.values[ k ] < vars[ k ].dom.hi() )
            {
                ++cur.values[ k ];
                break;
            }
            cur.values[ k ] = vars[ k ].dom.lo();
            if ( k == 0 )
                return;
        }
        if ( vars.empty() )
            return;
    }
}

} // namespace

void for_each_state( const model& m, const std::function< void( const state_vec& ) >& f )
{
    enumerate< std::vector< state_variable >, state_vec >( m.states(), f );
}

void for_each_input( const model& m, const std::function< void( const input_vec& ) >& f )
{
    enumerate< std::vector< variable >, input_vec >( m.inputs(), f );
}

std::vector< input_vec > valid_inputs( const model& m )
{
    auto out = std::vector< input_vec >{};
    const auto s = state_vec{};
    for_each_input( m, [ & ]( const input_vec& i ) {
        if ( holds( m.input_assumption(), s, i ) )
            out.push_back( i );
    } );
    return out;
}

std::vector< state_vec > states_satisfying( const model& m, const expr& pred )
{
    auto out = std::vector< state_vec >{};
    for_each_state( m, [ & ]( const state_vec& s ) {
        if ( satisfies_invariant( m, s ) && holds( pred, s, no_inputs ) )
            out.push_back( s );
    } );
    return out;
}

std::optional< std::vector< state_vec > > reachable_states( const model& m, const std::vector< state_vec >& starts,
                                                           std::size_t limit )
{
    const auto inputs = valid_inputs( m );
    auto seen = std::set< state_vec >{};
    auto frontier = std::vector< state_vec >{};
    for ( const auto& s : starts )
        if ( seen.insert( s ).second )
            frontier.push_back( s );

    while ( !frontier.empty() )
    {
        if ( seen.size() > limit )
            return std::nullopt;
        const auto s = frontier.back();
        frontier.pop_back();
        for ( const auto& i : inputs )
            if ( auto t = try_step( m, s, i ); t && seen.insert( *t ).second )
                frontier.push_back( *t );
    }
    if ( seen.size() > limit )
        return std::nullopt;
    return std::vector< state_vec >( seen.begin(), seen.end() );
}

bool replay_report::ok() const
{
    return uncovered.empty() && violations.empty() && final_reached && !invalid_input_step &&
           !invariant_violation_step;
}

std::optional< test_chain > replay_report::chain() const
{
    if ( !ok() )
        return std::nullopt;
    return test_chain{ inputs, trace, covers };
}

std::string replay_report::describe() const
{
    auto out = std::string{};
    const auto add = [ & ]( const std::string& s ) {
        if ( !out.empty() )
            out += "; ";
        out += s;
    };

    if ( invalid_input_step )
        add( "input at step " + std::to_string( *invalid_input_step ) + " violates the input assumption" );
    if ( invariant_violation_step )
        add( "state at step " + std::to_string( *invariant_violation_step ) + " violates the state invariant" );
    if ( !uncovered.empty() )
    {
        auto list = std::string{};
        for ( const auto& u : uncovered )
            list += ( list.empty() ? "" : ", " ) + u;
        add( "uncovered: {" + list + "}" );
    }
    for ( const auto& v : violations )
        add( "assertion of " + v.property + " violated at step " + std::to_string( v.step ) );
    if ( !final_reached )
        add( "final state predicate not satisfied" );
    return out.empty() ? "ok" : out;
}

replay_report replay( const model& m, const std::vector< property >& props, const expr& final,
                      const std::vector< input_vec >& inputs, const std::optional< state_vec >& start )
{
    auto report = replay_report{};
    report.trace.push_back( start ? *start : m.initial_state() );

    for ( std::size_t k = 0; k < inputs.size(); ++k )
    {
        const auto& s = report.trace.back();
        const auto& i = inputs[ k ];
        if ( !holds( m.input_assumption(), s, i ) )
        {
            report.invalid_input_step = k;
            break;
        }

        auto next = apply_transition( m, s, i );
        for ( const auto& p : props )
        {
            if ( !holds( p.assumption, s, i ) )
                continue;
            report.covers.try_emplace( p.name, k );
            if ( !holds( p.assertion, s, i, &next ) )
                report.violations.push_back( { p.name, k } );
        }

        report.inputs.push_back( i );
        report.trace.push_back( std::move( next ) );
        if ( !report.invariant_violation_step && !satisfies_invariant( m, report.trace.back() ) )
            report.invariant_violation_step = k + 1;
    }

    for ( const auto& p : props )
        if ( !report.covers.contains( p.name ) )
            report.uncovered.push_back( p.name );

    report.final_reached = !report.invalid_input_step && holds( final, report.trace.back(), no_inputs );
    return report;
}

} // namespace chainforge
