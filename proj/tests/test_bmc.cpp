#include "doctest.h"

#include "chainforge/bmc/bmc.hpp"
#include "chainforge/dsl/parser.hpp"
#include "cruise_fixture.hpp"
#include "edge_oracle.hpp"

#include <random>

using namespace chainforge;
using bmc::vertex_spec;

namespace
{

std::vector< vertex_spec > cruise_vertices( const model& m, const std::vector< property >& props )
{
    auto out = std::vector< vertex_spec >{ vertex_spec::initial( m.init_predicate() ) };
    for ( const auto& p : props )
        out.push_back( vertex_spec::of( p ) );
    out.push_back( vertex_spec::final( m.init_predicate() ) );
    return out;
}

// x : 0..3 driven by a random table over (x, b)
model random_walker( std::mt19937_64& rng )
{
    auto m = model{ "walker" };
    const auto dom = domain::integer( 0, 3 );
    m.add_state( "x", dom, 0 );
    m.add_input( "b", domain::boolean() );
    const auto x = m.state( "x" );
    const auto b = m.input( "b" );
    auto pick = std::uniform_int_distribution< value_t >( 0, 3 );
    auto t = expr::integer( pick( rng ) );
    for ( value_t v = 0; v < 4; ++v )
        t = expr::ite( expr::eq( x, expr::integer( v ) ),
                       expr::ite( b, expr::integer( pick( rng ) ), expr::integer( pick( rng ) ) ), t );
    m.set_transition( 0, t );
    if ( rng() % 3 == 0 )
        m.add_invariant( expr::ne( x, expr::integer( pick( rng ) ) ) );
    if ( rng() % 4 == 0 )
        m.add_input_assumption( b );
    return m;
}

} // namespace

TEST_CASE( "reach checks on the cruise controller" )
{
    const auto m = test::cruise_model();
    const auto props = test::cruise_properties( m );
    auto ctx = bmc::context{ m, {} };
    const auto home = m.init_predicate();

    CHECK( bmc::reach_check( ctx, home, props[ 3 ].assumption, 2 ) );
    CHECK( bmc::reach_check( ctx, home, home, 0 ) );
    CHECK_FALSE( bmc::reach_check( ctx, home, props[ 0 ].assumption, 1 ) );

    const auto w = bmc::reach_check( ctx, home, props[ 3 ].assumption, 2 );
    REQUIRE( w );
    CHECK( w->states.front() == m.initial_state() );
    for ( std::size_t t = 0; t < 2; ++t )
        CHECK( step( m, w->states[ t ], w->inputs[ t ] ) == w->states[ t + 1 ] );
    CHECK( ctx.solver_calls == 4 );
}

TEST_CASE( "k-reach edges of weight one" )
{
    const auto m = test::cruise_model();
    const auto props = test::cruise_properties( m );
    auto ctx = bmc::context{ m, {} };
    auto kr = bmc::kreach{ ctx, cruise_vertices( m, props ) };

    auto pending = std::set< bmc::vertex_pair >{};
    for ( std::size_t a = 1; a <= 4; ++a )
        for ( std::size_t b = 1; b <= 4; ++b )
            if ( a != b )
                pending.insert( { a, b } );
    const auto zero = kr.edges( pending, 0 );
    CHECK( zero.empty() );
    const auto one = kr.edges( pending, 1 );
    CHECK( one == std::vector< bmc::vertex_pair >{ { 1, 3 }, { 2, 1 }, { 2, 3 } } );
    CHECK( pending.size() == 9 );
}

TEST_CASE( "k-reach weights agree with explicit enumeration" )
{
    SUBCASE( "cruise" )
    {
        const auto m = test::cruise_model();
        const auto props = test::cruise_properties( m );
        const auto vs = cruise_vertices( m, props );
        auto ctx = bmc::context{ m, {} };
        auto kr = bmc::kreach{ ctx, vs };
        auto pending = std::set< bmc::vertex_pair >{};
        for ( std::size_t a = 0; a + 1 < vs.size(); ++a )
            for ( std::size_t b = 1; b < vs.size(); ++b )
                if ( a != b && !( a == 0 && b + 1 == vs.size() ) )
                    pending.insert( { a, b } );
        const auto all = pending;
        auto weight = std::map< bmc::vertex_pair, std::size_t >{};
        for ( std::size_t k = 0; k <= 8; ++k )
            for ( const auto& e : kr.edges( pending, k ) )
                weight[ e ] = k;
        for ( const auto& [ a, b ] : all )
        {
            const auto expect = test::min_weight( m, vs[ a ], vs[ b ], 8 );
            const auto it = weight.find( { a, b } );
            INFO( vs[ a ].name, " -> ", vs[ b ].name );
            REQUIRE( expect.has_value() == ( it != weight.end() ) );
            if ( expect )
                CHECK( *expect == it->second );
        }
    }

    SUBCASE( "random walkers" )
    {
        auto rng = std::mt19937_64{ 7 };
        for ( int round = 0; round < 120; ++round )
        {
            const auto m = random_walker( rng );
            const auto x = m.state( "x" );
            const auto b = m.input( "b" );
            auto vs = std::vector< vertex_spec >{ vertex_spec::initial( m.init_predicate() ) };
            for ( int p = 0; p < 3; ++p )
            {
                const auto v = expr::integer( static_cast< value_t >( rng() % 4 ) );
                const auto trig = rng() % 2 ? expr::and_( expr::eq( x, v ), b ) : expr::eq( x, v );
                const auto assertion = rng() % 3 == 0 ? expr::ne( m.next( "x" ), v ) : expr::boolean( true );
                vs.push_back( vertex_spec::of( { "p" + std::to_string( p ), trig, assertion } ) );
            }
            vs.push_back( vertex_spec::final( expr::eq( x, expr::integer( 3 ) ) ) );

            auto ctx = bmc::context{ m, {} };
            auto kr = bmc::kreach{ ctx, vs };
            auto pending = std::set< bmc::vertex_pair >{};
            for ( std::size_t a = 0; a + 1 < vs.size(); ++a )
                for ( std::size_t c = 1; c < vs.size(); ++c )
                    if ( a != c )
                        pending.insert( { a, c } );
            const auto all = pending;
            auto weight = std::map< bmc::vertex_pair, std::size_t >{};
            for ( std::size_t k = 0; k <= 5; ++k )
                for ( const auto& e : kr.edges( pending, k ) )
                    weight[ e ] = k;
            for ( const auto& [ a, c ] : all )
            {
                const auto expect = test::min_weight( m, vs[ a ], vs[ c ], 5 );
                const auto it = weight.find( { a, c } );
                REQUIRE( expect.has_value() == ( it != weight.end() ) );
                if ( expect )
                    CHECK( *expect == it->second );
            }
        }
    }
}

TEST_CASE( "path concretisation" )
{
    const auto m = test::cruise_model();
    const auto props = test::cruise_properties( m );
    const auto vs = cruise_vertices( m, props );
    auto ctx = bmc::context{ m, {} };

    SUBCASE( "the nine step chain" )
    {
        const auto path = std::vector< vertex_spec >{ vs[ 0 ], vs[ 4 ], vs[ 1 ], vs[ 2 ], vs[ 3 ], vs[ 5 ] };
        const auto r = bmc::check_path( ctx, path, { 2, 2, 2, 1, 2 } );
        REQUIRE( r.result == bmc::path_result::outcome::feasible );
        CHECK( r.chain->length() == 9 );
        const auto rep = replay( m, props, m.init_predicate(), r.chain->inputs );
        CHECK( rep.ok() );
        CHECK( rep.covers.at( "p4" ) == 2 );
        CHECK( rep.covers.at( "p1" ) == 4 );
    }

    SUBCASE( "empty chain" )
    {
        const auto r = bmc::check_path( ctx, { vs[ 0 ], vs[ 5 ] }, { 0 } );
        REQUIRE( r.result == bmc::path_result::outcome::feasible );
        CHECK( r.chain->length() == 0 );
    }

    SUBCASE( "a trailing property is reached but not covered" )
    {
        const auto r = bmc::check_path( ctx, { vs[ 0 ], vs[ 4 ] }, { 2 } );
        REQUIRE( r.result == bmc::path_result::outcome::feasible );
        CHECK( r.chain->length() == 2 );
        CHECK( r.chain->covers.empty() );
        CHECK_THROWS_AS( (void)bmc::check_path( ctx, { vs[ 0 ], vs[ 4 ], vs[ 5 ] }, { 2, 0 } ), error );
    }
}

TEST_CASE( "failed subpaths" )
{
    const auto m = dsl::load_model( CHAINFORGE_SOURCE_DIR "/models/cruise.rsys" );
    const auto props = dsl::load_properties( CHAINFORGE_SOURCE_DIR "/models/broken.props", m );
    auto ctx = bmc::context{ m, {} };
    const auto vs = cruise_vertices( m, props );

    const auto path = std::vector< vertex_spec >{ vs[ 0 ], vs[ 1 ], vs[ 2 ], vs[ 3 ] };
    const auto r = bmc::check_path( ctx, path, { 0, 1, 2 } );
    REQUIRE( r.result == bmc::path_result::outcome::infeasible );
    CHECK( r.failed == std::vector< std::size_t >{ 0, 1, 2 } );

    // the reported subpath is infeasible by itself
    const auto sub = std::vector< vertex_spec >( path.begin(), path.begin() + 3 );
    CHECK( bmc::check_path( ctx, sub, { 0, 1 } ).result == bmc::path_result::outcome::infeasible );

    // one more step fixes it
    CHECK( bmc::check_path( ctx, path, { 0, 2, 2 } ).result == bmc::path_result::outcome::feasible );
}

TEST_CASE( "failed subpaths are infeasible on random walkers" )
{
    auto rng = std::mt19937_64{ 11 };
    auto infeasible = 0;
    for ( int round = 0; round < 150; ++round )
    {
        const auto m = random_walker( rng );
        const auto x = m.state( "x" );
        auto path = std::vector< vertex_spec >{ vertex_spec::initial( m.init_predicate() ) };
        auto weights = std::vector< std::size_t >{};
        const auto n = 2 + rng() % 4;
        for ( std::size_t p = 0; p < n; ++p )
        {
            path.push_back( vertex_spec::of(
                    { "p" + std::to_string( p ), expr::eq( x, expr::integer( static_cast< value_t >( rng() % 4 ) ) ),
                      expr::boolean( true ) } ) );
            weights.push_back( p == 0 ? rng() % 2 : 1 + rng() % 2 );
        }
        path.push_back( vertex_spec::final( expr::boolean( true ) ) );
        weights.push_back( 1 );

        auto ctx = bmc::context{ m, {} };
        const auto r = bmc::check_path( ctx, path, weights );
        if ( r.result != bmc::path_result::outcome::infeasible )
            continue;
        ++infeasible;
        REQUIRE( r.failed.size() >= 2 );
        for ( std::size_t i = 1; i < r.failed.size(); ++i )
            CHECK( r.failed[ i ] == r.failed[ i - 1 ] + 1 );
        const auto lo = r.failed.front();
        const auto hi = r.failed.back();
        auto sub = std::vector< vertex_spec >( path.begin() + lo, path.begin() + hi + 1 );
        auto sw = std::vector< std::size_t >( weights.begin() + lo, weights.begin() + hi );
        CHECK( bmc::check_path( ctx, sub, sw ).result == bmc::path_result::outcome::infeasible );
    }
    CHECK( infeasible > 20 );
}

TEST_CASE( "assertion violations are reported as bugs" )
{
    auto m = model{ "counter" };
    m.add_state( "x", domain::integer( 0, 3 ), 0 );
    m.add_input( "go", domain::boolean() );
    const auto x = m.state( "x" );
    m.set_transition( 0, expr::ite( m.input( "go" ), expr::add( x, expr::integer( 1 ) ), x ) );
    const auto p = property{ "grow", expr::eq( x, expr::integer( 0 ) ), expr::eq( m.next( "x" ), expr::integer( 2 ) ) };
    auto ctx = bmc::context{ m, {} };
    const auto path = std::vector< vertex_spec >{ vertex_spec::initial( m.init_predicate() ), vertex_spec::of( p ),
                                                  vertex_spec::final( expr::boolean( true ) ) };
    const auto r = bmc::check_path( ctx, path, { 0, 1 } );
    REQUIRE( r.result == bmc::path_result::outcome::assertion_violated );
    REQUIRE( r.violations.size() == 1 );
    CHECK( r.violations[ 0 ].property == "grow" );
    CHECK( r.violations[ 0 ].step == 0 );
    CHECK( r.counterexample );
}

TEST_CASE( "anchored reach and singleton triggers" )
{
    const auto m = test::cruise_model();
    const auto props = test::cruise_properties( m );
    const auto vs = cruise_vertices( m, props );
    auto ctx = bmc::context{ m, {} };

    // from p4 covered in its only state to p1 takes two steps
    const auto w = bmc::anchored_reach( ctx, vs[ 4 ], std::nullopt, vs[ 1 ], 2 );
    REQUIRE( w );
    CHECK( holds( props[ 3 ].assumption, w->states[ 0 ], w->inputs[ 0 ] ) );
    CHECK( holds( props[ 0 ].assumption, w->states[ 2 ], w->inputs[ 2 ] ) );
    CHECK_FALSE( bmc::anchored_reach( ctx, vs[ 4 ], std::nullopt, vs[ 1 ], 2, { w->states[ 2 ] } ) );
    CHECK_FALSE( bmc::anchored_reach( ctx, vs[ 1 ], std::nullopt, vs[ 5 ], 0 ) );
    CHECK( bmc::anchored_reach( ctx, vs[ 0 ], m.initial_state(), vs[ 4 ], 2 ) );

    CHECK( bmc::singleton_trigger( ctx, props[ 0 ].assumption ) );
    CHECK_FALSE( bmc::singleton_trigger( ctx, m.input( "gas" ) ) );
    CHECK_FALSE( bmc::singleton_trigger( ctx, expr::boolean( false ) ) );
}

TEST_CASE( "strengthened invariant" )
{
    auto m = model{ "gap" };
    m.add_state( "x", domain::integer( 0, 5 ), 0 );
    m.add_input( "go", domain::boolean() );
    const auto x = m.state( "x" );
    m.set_transition( 0, expr::ite( m.input( "go" ), expr::add( x, expr::integer( 2 ) ), x ) );
    const auto s = bmc::strengthen_invariant( m, 100 );
    REQUIRE( s );
    CHECK( states_satisfying( *s, expr::boolean( true ) ).size() == 4 ); // 0, 2, 4 and the saturated 5
    CHECK_FALSE( bmc::strengthen_invariant( m, 2 ) );
}
