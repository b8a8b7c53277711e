#include "doctest.h"

#include "chainforge/reachgraph/graph.hpp"
#include "cruise_fixture.hpp"
#include "edge_oracle.hpp"
#include "graph_oracle.hpp"

using namespace chainforge;
using reach::reach_graph;

namespace
{

std::vector< bmc::vertex_spec > cruise_vertices( const model& m )
{
    auto out = std::vector< bmc::vertex_spec >{ bmc::vertex_spec::initial( m.init_predicate() ) };
    for ( const auto& p : test::cruise_properties( m ) )
        out.push_back( bmc::vertex_spec::of( p ) );
    out.push_back( bmc::vertex_spec::final( m.init_predicate() ) );
    return out;
}

// The eleven reference edges, vertices I, p1..p4, F.
reach_graph reference_graph()
{
    const auto m = test::cruise_model();
    auto g = reach_graph{ cruise_vertices( m ) };
    const auto edges = std::vector< std::tuple< int, int, int > >{
            { 0, 1, 2 }, { 0, 4, 2 }, { 1, 2, 2 }, { 2, 1, 1 }, { 1, 3, 1 }, { 3, 1, 2 },
            { 2, 3, 1 }, { 2, 4, 2 }, { 4, 1, 2 }, { 4, 3, 2 }, { 3, 5, 2 } };
    for ( const auto& [ u, v, w ] : edges )
        g.set_edge( u, v, w );
    return g;
}

reach_graph line_graph( std::size_t n )
{
    return test::random_graph( *std::make_unique< std::mt19937_64 >( 0 ), n, 0.0 );
}

} // namespace

TEST_CASE( "closure" )
{
    auto g = line_graph( 2 );
    g.set_edge( 0, 1, 1 );
    g.set_edge( 1, 2, 1 );
    const auto c = reach::closure{ g };
    CHECK( c.dist( 0, 2 ) == 2 );
    CHECK( c.expand( 0, 2 ) == std::vector< std::size_t >{ 0, 1, 2 } );
    CHECK_FALSE( c.reaches( 2, 0 ) );
    const auto closed = reach::transitive_closure( g );
    CHECK( closed.weight( 0, 2 ) == 2u );
    CHECK( reach::transitive_closure( closed ).edges() == closed.edges() );

    const auto pub = reach::transitive_closure( reference_graph() );
    CHECK( pub.weight( 0, 2 ) == 4u );
    CHECK( pub.weight( 0, 5 ) == 5u );
}

TEST_CASE( "closure edges expand to paths of equal weight" )
{
    auto rng = std::mt19937_64{ 3 };
    for ( int round = 0; round < 200; ++round )
    {
        const auto g = test::random_graph( rng, 1 + rng() % 6, 0.35 );
        const auto c = reach::closure{ g };
        for ( std::size_t u = 0; u < g.size(); ++u )
            for ( std::size_t v = 0; v < g.size(); ++v )
            {
                if ( !c.reaches( u, v ) )
                    continue;
                const auto p = reach::with_weights( g, c.expand( u, v ) );
                REQUIRE( p );
                CHECK( p->length() == c.dist( u, v ) );
            }
    }
}

TEST_CASE( "covering path existence" )
{
    const auto pub = reference_graph();
    CHECK( reach::exists_covering_path( pub ) );
    const auto p = reach::get_covering_path( pub );
    REQUIRE( p );
    CHECK( reach::is_covering( pub, *p ) );

    auto iso = line_graph( 2 );
    CHECK_FALSE( reach::exists_covering_path( iso ) );
    const auto report = reach::check_covering( iso );
    CHECK( report.describe( iso ) == "F is not reachable from I" );

    auto one = line_graph( 1 );
    one.set_edge( 0, 1, 3 );
    one.set_edge( 1, 2, 1 );
    const auto single = reach::get_covering_path( one );
    REQUIRE( single );
    CHECK( single->vertices == std::vector< std::size_t >{ 0, 1, 2 } );
    CHECK( single->length() == 4 );

    auto apart = line_graph( 2 );
    apart.set_edge( 0, 1, 1 );
    apart.set_edge( 0, 2, 1 );
    apart.set_edge( 1, 3, 1 );
    apart.set_edge( 2, 3, 1 );
    const auto r = reach::check_covering( apart );
    CHECK_FALSE( r.ok );
    CHECK( r.conditions_1_2() );
    CHECK( r.unordered == std::vector< reach::vertex_pair >{ { 1, 2 } } );
    CHECK( r.describe( apart ) == "p1 and p2 do not reach each other" );

    auto none = reach_graph{ { bmc::vertex_spec::initial( expr::boolean( true ) ),
                               bmc::vertex_spec::final( expr::boolean( true ) ) } };
    CHECK_FALSE( reach::exists_covering_path( none ) );
    none.set_edge( 0, 1, 0 );
    CHECK( reach::get_covering_path( none )->vertices == std::vector< std::size_t >{ 0, 1 } );
}

TEST_CASE( "covering paths agree with exhaustive search" )
{
    auto rng = std::mt19937_64{ 5 };
    auto found = 0;
    for ( int round = 0; round < 600; ++round )
    {
        auto g = test::random_graph( rng, 1 + rng() % 6, 0.2 + 0.1 * ( round % 5 ) );
        // some rounds split vertices into groups
        if ( round % 3 == 0 )
        {
            const auto v = 1 + rng() % g.num_properties();
            const auto c = g.clone( v );
            for ( std::size_t u = 0; u < g.size(); ++u )
            {
                if ( u != c && u != g.final_vertex() && g.active( u ) && rng() % 3 == 0 )
                    g.set_edge( u, c, rng() % 4 );
                if ( u != c && u != g.initial() && g.active( u ) && rng() % 3 == 0 )
                    g.set_edge( c, u, rng() % 4 );
            }
        }
        const auto expect = test::brute_force_covering( g );
        CHECK( reach::exists_covering_path( g ) == expect );
        const auto p = reach::get_covering_path( g );
        CHECK( p.has_value() == expect );
        if ( p )
        {
            ++found;
            CHECK( reach::is_covering( g, *p ) );
        }
    }
    CHECK( found > 100 );
}

TEST_CASE( "graph construction on the cruise controller" )
{
    const auto m = test::cruise_model();
    const auto vs = cruise_vertices( m );
    auto ctx = bmc::context{ m, {} };
    const auto r = reach::build_graph( ctx, vs );
    REQUIRE( r.result == reach::build_result::outcome::ok );
    CHECK( r.k == 2 );
    CHECK( r.solver_calls > 0 );

    const auto pub = reference_graph();
    // every reference edge with its weight, except p2 -> p4
    for ( const auto& [ e, w ] : pub.edges() )
    {
        INFO( pub.name( e.first ), " -> ", pub.name( e.second ) );
        if ( e == reach::vertex_pair{ 2, 4 } )
            CHECK_FALSE( r.graph.weight( 2, 4 ) );
        else
            CHECK( r.graph.weight( e.first, e.second ) == w );
    }
    // and the built weights are the true minimal step counts
    for ( const auto& [ e, w ] : r.graph.edges() )
        CHECK( test::min_weight( m, vs[ e.first ], vs[ e.second ], 10 ) == w );
    CHECK( r.graph.edges().size() == 11 );
    CHECK( r.graph.weight( 0, 3 ) == 2u );

    const auto dot = reach::to_dot( r.graph );
    CHECK( dot.find( "digraph reach" ) == 0 );
    CHECK( dot.find( "v0 -> v1 [label=\"2\"]" ) != std::string::npos );
}

TEST_CASE( "graph construction corner cases" )
{
    const auto m = test::cruise_model();
    auto ctx = bmc::context{ m, {} };
    const auto home = m.init_predicate();

    const auto empty = reach::build_graph( ctx, { bmc::vertex_spec::initial( home ), bmc::vertex_spec::final( home ) } );
    REQUIRE( empty.result == reach::build_result::outcome::ok );
    CHECK( empty.graph.edges().size() == 1 );
    CHECK( empty.graph.weight( 0, 1 ) == 0u );

    // unsatisfiable final set
    const auto bad = bmc::vertex_spec::final( expr::boolean( false ) );
    const auto p1 = bmc::vertex_spec::of( test::cruise_properties( m )[ 0 ] );
    const auto r = reach::build_graph( ctx, { bmc::vertex_spec::initial( home ), p1, bad }, { 6, 0 } );
    CHECK( r.result == reach::build_result::outcome::bound_exceeded );
    CHECK( r.k == 6 );

    // k_min keeps collecting edges
    const auto more = reach::build_graph( ctx, cruise_vertices( m ), { 50, 4 } );
    CHECK( more.k == 4 );
    CHECK( more.graph.weight( 2, 4 ) == 3u );
}

TEST_CASE( "no single chain when all pairs are resolved" )
{
    // x stays where the first input puts it
    auto m = model{ "split" };
    m.add_state( "x", domain::integer( 0, 2 ), 0 );
    m.add_input( "go", domain::integer( 1, 2 ) );
    const auto x = m.state( "x" );
    m.set_transition( 0, expr::ite( expr::eq( x, expr::integer( 0 ) ), m.input( "go" ), x ) );
    auto ctx = bmc::context{ m, {} };
    const auto vs = std::vector< bmc::vertex_spec >{
            bmc::vertex_spec::initial( m.init_predicate() ),
            bmc::vertex_spec::of( { "a", expr::eq( x, expr::integer( 1 ) ), expr::boolean( true ) } ),
            bmc::vertex_spec::of( { "b", expr::eq( x, expr::integer( 2 ) ), expr::boolean( true ) } ),
            bmc::vertex_spec::final( expr::boolean( true ) ) };
    const auto r = reach::build_graph( ctx, vs, { 10, 0 } );
    CHECK( r.result == reach::build_result::outcome::bound_exceeded );
    const auto report = reach::check_covering( r.graph );
    CHECK( report.conditions_1_2() );
    CHECK( report.unordered.size() == 1 );
}

TEST_CASE( "weights on random walkers match explicit distances" )
{
    auto rng = std::mt19937_64{ 21 };
    for ( int round = 0; round < 60; ++round )
    {
        auto m = model{ "walker" };
        m.add_state( "x", domain::integer( 0, 3 ), 0 );
        m.add_input( "b", domain::boolean() );
        const auto x = m.state( "x" );
        auto t = expr::integer( 0 );
        for ( value_t v = 0; v < 4; ++v )
            t = expr::ite( expr::eq( x, expr::integer( v ) ),
                           expr::ite( m.input( "b" ), expr::integer( rng() % 4 ), expr::integer( rng() % 4 ) ), t );
        m.set_transition( 0, t );
        auto vs = std::vector< bmc::vertex_spec >{ bmc::vertex_spec::initial( m.init_predicate() ) };
        for ( int p = 0; p < 3; ++p )
            vs.push_back( bmc::vertex_spec::of(
                    { "p" + std::to_string( p ), expr::eq( x, expr::integer( rng() % 4 ) ), expr::boolean( true ) } ) );
        vs.push_back( bmc::vertex_spec::final( m.init_predicate() ) );
        auto ctx = bmc::context{ m, {} };
        const auto r = reach::build_graph( ctx, vs, { 8, 8 } );
        for ( const auto& [ e, w ] : r.graph.edges() )
            CHECK( test::min_weight( m, vs[ e.first ], vs[ e.second ], 8 ) == w );
        CHECK( r.result != reach::build_result::outcome::no_single_chain );
    }
}
