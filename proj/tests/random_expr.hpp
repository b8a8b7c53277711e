#pragma once

// Random well-sorted expressions over a fixed small model, for comparing the
// SAT encoding against the interpreter.

#include "chainforge/model/model.hpp"

#include <random>

namespace chainforge::test
{

inline model expr_playground()
{
    auto m = model{ "playground" };
    m.add_state( "a", domain::integer( -3, 2 ) );
    m.add_state( "b", domain::integer( 0, 4 ) );
    m.add_state( "c", domain::enumeration( { "R", "G", "B" } ) );
    m.add_state( "d", domain::boolean() );
    m.add_input( "i", domain::integer( 1, 3 ) );
    m.add_input( "j", domain::boolean() );
    return m;
}

class expr_generator
{
    const model& _m;
    std::mt19937_64& _rng;
    bool _next;

    int pick( int n ) { return std::uniform_int_distribution< int >( 0, n - 1 )( _rng ); }

public:
    expr_generator( const model& m, std::mt19937_64& rng, bool allow_next )
        : _m{ m }, _rng{ rng }, _next{ allow_next }
    {
    }

    expr integer( int depth )
    {
        if ( depth == 0 || pick( 3 ) == 0 )
        {
            switch ( pick( _next ? 5 : 4 ) )
            {
            case 0:
                return _m.state( "a" );
            case 1:
                return _m.state( "b" );
            case 2:
                return _m.input( "i" );
            case 3:
                return expr::integer( pick( 9 ) - 4 );
            default:
                return _m.next( pick( 2 ) ? "a" : "b" );
            }
        }
        switch ( pick( 3 ) )
        {
        case 0:
            return expr::add( integer( depth - 1 ), integer( depth - 1 ) );
        case 1:
            return expr::sub( integer( depth - 1 ), integer( depth - 1 ) );
        default:
            return expr::ite( boolean( depth - 1 ), integer( depth - 1 ), integer( depth - 1 ) );
        }
    }

    expr color( int depth )
    {
        if ( depth == 0 || pick( 2 ) == 0 )
        {
            if ( pick( 2 ) == 0 )
                return _m.state( "c" );
            return expr::constant( _m.states()[ 2 ].dom, pick( 3 ) );
        }
        return expr::ite( boolean( depth - 1 ), color( depth - 1 ), color( depth - 1 ) );
    }

    expr boolean( int depth )
    {
        if ( depth == 0 || pick( 4 ) == 0 )
        {
            switch ( pick( 4 ) )
            {
            case 0:
                return _m.state( "d" );
            case 1:
                return _m.input( "j" );
            case 2:
                return expr::boolean( pick( 2 ) == 0 );
            default:
                return _next ? _m.next( "d" ) : _m.state( "d" );
            }
        }
        switch ( pick( 10 ) )
        {
        case 0:
            return expr::not_( boolean( depth - 1 ) );
        case 1:
            return expr::and_( boolean( depth - 1 ), boolean( depth - 1 ) );
        case 2:
            return expr::or_( boolean( depth - 1 ), boolean( depth - 1 ) );
        case 3:
            return expr::implies( boolean( depth - 1 ), boolean( depth - 1 ) );
        case 4:
            return expr::eq( integer( depth - 1 ), integer( depth - 1 ) );
        case 5:
            return expr::lt( integer( depth - 1 ), integer( depth - 1 ) );
        case 6:
            return expr::le( integer( depth - 1 ), integer( depth - 1 ) );
        case 7:
            return expr::ne( color( depth - 1 ), color( depth - 1 ) );
        case 8:
            return expr::eq( boolean( depth - 1 ), boolean( depth - 1 ) );
        default:
            return expr::ite( boolean( depth - 1 ), boolean( depth - 1 ), boolean( depth - 1 ) );
        }
    }
};

} // namespace chainforge::test
