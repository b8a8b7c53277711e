#include "cruise_fixture.hpp"

#include "chainforge/dsl/parser.hpp"
#include "chainforge/dsl/printer.hpp"
#include "chainforge/model/interpreter.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace chainforge;
using namespace chainforge::dsl;

namespace
{

const std::filesystem::path source_dir{ CHAINFORGE_SOURCE_DIR };

std::string slurp( const std::filesystem::path& p )
{
    auto in = std::ifstream{ p };
    auto ss = std::stringstream{};
    ss << in.rdbuf();
    return ss.str();
}

// Compares against a checked-in file; CHAINFORGE_UPDATE_GOLDEN=1 rewrites it.
void check_golden( const std::string& actual, const std::string& name )
{
    const auto path = source_dir / "tests" / "golden" / name;
    if ( std::getenv( "CHAINFORGE_UPDATE_GOLDEN" ) )
    {
        std::ofstream{ path } << actual;
        return;
    }
    REQUIRE_MESSAGE( std::filesystem::exists( path ), "missing golden file " << path );
    CHECK( actual == slurp( path ) );
}

std::string first_error( const std::vector< diagnostic >& diags )
{
    for ( const auto& d : diags )
        if ( d.level == severity::error )
            return d.message;
    return "";
}

model tiny()
{
    return *parse_model( "model m { state x: bool init false; input i: bool; trans { x' = i; } }" ).value;
}

} // namespace

TEST_CASE( "tiny model" )
{
    const auto r = parse_model( "model m { state x: bool init false; input i: bool; trans { x' = i; } }" );
    REQUIRE( r.ok() );
    CHECK( r.diagnostics.empty() );
    CHECK( r.value->states().size() == 1 );
    CHECK( r.value->inputs().size() == 1 );
    CHECK( r.value->initial_state() == state_vec{ { 0 } } );
}

TEST_CASE( "cruise model file" )
{
    const auto m = load_model( source_dir / "models" / "cruise.rsys" );
    CHECK( m.name() == "cruise" );
    CHECK( m.states().size() == 3 );
    CHECK( m.inputs().size() == 5 );

    // same semantics as the hand-built model
    const auto ref = test::cruise_model();
    for_each_input( m, [ & ]( const input_vec& i ) {
        CHECK( holds( m.input_assumption(), {}, i ) == holds( ref.input_assumption(), {}, i ) );
    } );
    for_each_state( m, [ & ]( const state_vec& s ) {
        CHECK( holds( m.invariant(), s, {} ) == holds( ref.invariant(), s, {} ) );
        for_each_input( m, [ & ]( const input_vec& i ) { CHECK( apply_transition( m, s, i ) == apply_transition( ref, s, i ) ); } );
    } );
    // transition trees coincide too
    for ( std::size_t v = 0; v < 3; ++v )
        CHECK( *m.transition( v ) == *ref.transition( v ) );

    const auto props = load_properties( source_dir / "models" / "cruise1.props", m );
    const auto ref_props = test::cruise_properties( ref );
    REQUIRE( props.size() == 4 );
    for ( std::size_t k = 0; k < 4; ++k )
    {
        CHECK( props[ k ].name == ref_props[ k ].name );
        CHECK( props[ k ].assumption == ref_props[ k ].assumption );
        CHECK( props[ k ].assertion == ref_props[ k ].assertion );
    }
}

TEST_CASE( "properties" )
{
    const auto m = test::cruise_model();
    const auto p1 = parse_properties( "property p1 { assume mode==ON && speed==1 && dec; assert next(speed)==1; }", m );
    REQUIRE( p1.ok() );
    CHECK( p1.value->at( 0 ).assumption == test::cruise_properties( m )[ 0 ].assumption );
    CHECK_FALSE( p1.value->at( 0 ).assumption.has_next_refs() );
    CHECK( p1.value->at( 0 ).assertion.has_next_refs() );

    const auto t = parse_properties( "property t { assume true; assert true; }", m );
    REQUIRE( t.ok() );
    CHECK( t.value->at( 0 ).assumption.is_true() );

    const auto undeclared = parse_properties( "property q { assume wheels == 4; assert true; }", m );
    CHECK_FALSE( undeclared.ok() );
    CHECK( first_error( undeclared.diagnostics ) == "unknown name 'wheels'" );

    const auto next_in_assume = parse_properties( "property q { assume next(speed) == 1; assert true; }", m );
    CHECK_FALSE( next_in_assume.ok() );
    CHECK( first_error( next_in_assume.diagnostics ) == "next() cannot appear in a property assumption" );

    // satisfiable syntactically, but no state of the invariant has it
    const auto empty = parse_properties( "property e { assume mode == ON && speed == 2; assert true; }", m );
    REQUIRE( empty.ok() );
    REQUIRE( empty.diagnostics.size() == 1 );
    CHECK( empty.diagnostics[ 0 ].level == severity::warning );
}

TEST_CASE( "state sets" )
{
    const auto m = test::cruise_model();
    const auto home = parse_state_set( "mode==OFF && speed==0 && !enable", m );
    REQUIRE( home.ok() );
    for_each_state( m, [ & ]( const state_vec& s ) {
        CHECK( holds( *home.value, s, {} ) == ( s == m.initial_state() ) );
    } );
    CHECK( parse_state_set( "true", m ).value->is_true() );

    const auto bad = parse_state_set( "gas", m );
    CHECK_FALSE( bad.ok() );
    CHECK( first_error( bad.diagnostics ) == "input variable 'gas' cannot appear in a state set" );
}

TEST_CASE( "errors carry spans" )
{
    const auto text = std::string{ "model m {\n  state x : 5..2 init 0;\n}" };
    const auto r = parse_model( text, "m.rsys" );
    REQUIRE_FALSE( r.ok() );
    const auto& d = r.diagnostics.at( 0 );
    CHECK( d.message.find( "empty domain" ) != std::string::npos );
    CHECK( d.span.line == 2 );
    CHECK( d.span.column == 13 );
    CHECK( d.span.column <= d.span.end_column );
    CHECK( d.span.offset < text.size() );
    CHECK( d.format().rfind( "m.rsys:2:13: error:", 0 ) == 0 );

    const auto cases = std::vector< std::string >{
        "model m { state x : bool; state x : bool; }",
        "model m { state x : {A, B}; trans { x' = 3; } }",
        "model m { state x : {A, B}; invariant x < B; }",
        "model m { state x : 0..3; input i : bool; assume x == 1; }",
        "model m { state x : 0..3 init 4; }",
        "model m { state x : 0..3 init 0; invariant x > 0; }",
        "model m { state x : bool trans }",
        "model m { state x : bool; } extra",
        "model m { state x : bool; trans { y' = x; } }",
        "model m { state x : bool; @ }",
    };
    for ( const auto& c : cases )
    {
        const auto e = parse_model( c );
        CHECK_MESSAGE( !e.ok(), c );
        for ( const auto& diag : e.diagnostics )
        {
            CHECK( diag.span.offset <= c.size() );
            CHECK( diag.span.column <= diag.span.end_column );
        }
    }
    CHECK( first_error( parse_model( cases[ 2 ] ).diagnostics ) == "enum values can only be compared with == and !=" );
}

TEST_CASE( "enum constants resolve by context" )
{
    const auto r = parse_model( R"(
        model m {
          state a : {X, Y} init X;
          state b : {Y, Z} init Z;
          trans { a' = Y; b' = b == Y ? Z : Y; }
        })" );
    REQUIRE( r.ok() );
    const auto& m = *r.value;
    CHECK( apply_transition( m, m.initial_state(), {} ) == state_vec{ { 1, 0 } } );
    CHECK( first_error( parse_state_set( "Y == Y", m ).diagnostics ) == "ambiguous enum constant 'Y'" );
    CHECK( parse_state_set( "Y == b", m ).ok() );
}

TEST_CASE( "print then parse is a fixpoint" )
{
    const auto m = load_model( source_dir / "models" / "cruise.rsys" );
    const auto printed = print_model( m );
    const auto again = parse_model( printed );
    REQUIRE_MESSAGE( again.ok(), format_all( again.diagnostics ) );
    CHECK( print_model( *again.value ) == printed );
    for ( std::size_t v = 0; v < m.states().size(); ++v )
        CHECK( *again.value->transition( v ) == *m.transition( v ) );
    CHECK( again.value->input_assumption() == m.input_assumption() );
    CHECK( again.value->invariant() == m.invariant() );
    check_golden( printed, "cruise.rsys" );

    for ( const auto* file : { "cruise1.props", "broken.props" } )
    {
        const auto props = load_properties( source_dir / "models" / file, m );
        const auto text = print_properties( m, props );
        const auto back = parse_properties( text, m );
        REQUIRE( back.ok() );
        REQUIRE( back.value->size() == props.size() );
        for ( std::size_t k = 0; k < props.size(); ++k )
        {
            CHECK( back.value->at( k ).assumption == props[ k ].assumption );
            CHECK( back.value->at( k ).assertion == props[ k ].assertion );
        }
        check_golden( text, file );
    }

    // odd corners: negative literals, unary minus, comparisons flipped
    const auto n = *parse_model( "model n { state x : -3..3 init -2; input i : 0..1; "
                                 "trans { x' = -x + -1 >= i ? x - i : -3; } }" ).value;
    const auto n2 = parse_model( print_model( n ) );
    REQUIRE( n2.ok() );
    CHECK( *n2.value->transition( 0 ) == *n.transition( 0 ) );
    CHECK( n.initial_state() == state_vec{ { -2 } } );
    (void) tiny();
}
