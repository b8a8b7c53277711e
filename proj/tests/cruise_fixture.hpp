#pragma once

// The cruise controller built through the model API, for tests that must not
// depend on the DSL frontend.

#include "chainforge/model/model.hpp"

namespace chainforge::test
{

inline model cruise_model()
{
    auto m = model{ "cruise" };
    const auto modes = domain::enumeration( { "OFF", "ON", "DIS" } );
    m.add_state( "mode", modes, 0 );
    m.add_state( "speed", domain::integer( 0, 2 ), 0 );
    m.add_state( "enable", domain::boolean(), 0 );
    for ( const auto* name : { "gas", "brake", "button", "acc", "dec" } )
        m.add_input( name, domain::boolean() );

    const auto mode = m.state( "mode" );
    const auto speed = m.state( "speed" );
    const auto enable = m.state( "enable" );
    const auto gas = m.input( "gas" );
    const auto brake = m.input( "brake" );
    const auto button = m.input( "button" );
    const auto acc = m.input( "acc" );
    const auto dec = m.input( "dec" );
    const auto off = m.constant_of( "mode", "OFF" );
    const auto on = m.constant_of( "mode", "ON" );
    const auto dis = m.constant_of( "mode", "DIS" );
    const auto n = []( value_t v ) { return expr::integer( v ); };
    using e = expr;

    // exactly one input is active per step
    const auto ins = std::vector< expr >{ gas, brake, button, acc, dec };
    m.add_input_assumption( e::any_of( ins ) );
    for ( std::size_t a = 0; a < ins.size(); ++a )
        for ( std::size_t b = a + 1; b < ins.size(); ++b )
            m.add_input_assumption( e::not_( e::and_( ins[ a ], ins[ b ] ) ) );

    m.add_invariant( e::implies( e::eq( mode, on ), e::and_( e::eq( speed, n( 1 ) ), enable ) ) );
    m.add_invariant( e::implies( e::eq( mode, dis ), e::and_( enable, e::ne( speed, n( 1 ) ) ) ) );
    m.add_invariant( e::implies( e::and_( e::eq( mode, off ), enable ), e::ne( speed, n( 1 ) ) ) );

    const auto on_to_dis = e::or_( gas, brake );
    const auto dis_to_on = e::or_( e::and_( e::eq( speed, n( 2 ) ), e::or_( dec, brake ) ),
                                   e::and_( e::eq( speed, n( 0 ) ), e::or_( acc, gas ) ) );
    const auto off_to_on =
            e::any_of( { e::all_of( { e::eq( speed, n( 0 ) ), enable, e::or_( gas, acc ) } ),
                         e::and_( e::eq( speed, n( 1 ) ), button ),
                         e::all_of( { e::eq( speed, n( 2 ) ), enable, e::or_( brake, dec ) } ) } );
    m.set_transition( 0, e::ite( e::and_( button, enable ), off,
                                 e::ite( e::eq( mode, on ), e::ite( on_to_dis, dis, on ),
                                         e::ite( e::eq( mode, dis ), e::ite( dis_to_on, on, dis ),
                                                 e::ite( off_to_on, on, off ) ) ) ) );

    const auto not_on = e::ne( mode, on );
    const auto up = e::and_( e::or_( gas, e::and_( not_on, acc ) ), e::lt( speed, n( 2 ) ) );
    const auto down = e::and_( e::or_( brake, e::and_( not_on, dec ) ), e::lt( n( 0 ), speed ) );
    m.set_transition( 1, e::ite( up, e::add( speed, n( 1 ) ), e::ite( down, e::sub( speed, n( 1 ) ), speed ) ) );
    m.set_transition( 2, e::ite( button, e::not_( enable ), enable ) );
    return m;
}

inline std::vector< property > cruise_properties( const model& m )
{
    using e = expr;
    const auto mode = m.state( "mode" );
    const auto speed = m.state( "speed" );
    const auto on = m.constant_of( "mode", "ON" );
    const auto n = []( value_t v ) { return expr::integer( v ); };
    return {
        { "p1", e::all_of( { e::eq( mode, on ), e::eq( speed, n( 1 ) ), m.input( "dec" ) } ),
          e::eq( m.next( "speed" ), n( 1 ) ) },
        { "p2", e::all_of( { e::eq( mode, m.constant_of( "mode", "DIS" ) ), e::eq( speed, n( 2 ) ), m.input( "dec" ) } ),
          e::eq( m.next( "mode" ), on ) },
        { "p3", e::and_( e::eq( mode, on ), m.input( "brake" ) ),
          e::eq( m.next( "mode" ), m.constant_of( "mode", "DIS" ) ) },
        { "p4",
          e::all_of( { e::eq( mode, m.constant_of( "mode", "OFF" ) ), e::eq( speed, n( 2 ) ),
                       e::not_( m.state( "enable" ) ), m.input( "button" ) } ),
          m.next( "enable" ) },
    };
}

// I = F = {mode=OFF, speed=0, !enable}
inline expr cruise_home( const model& m )
{
    return m.init_predicate();
}

// Input vector with exactly the named boolean input set.
inline input_vec press( const model& m, const std::string& name )
{
    auto i = input_vec{ std::vector< value_t >( m.inputs().size(), 0 ) };
    i.values[ *m.find_input( name ) ] = 1;
    return i;
}

} // namespace chainforge::test
