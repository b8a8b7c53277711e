#include "doctest.h"

#include "chainforge/cli/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace chainforge;
namespace fs = std::filesystem;

namespace
{

const std::string root = CHAINFORGE_SOURCE_DIR "/";

struct outcome
{
    int code;
    std::string out;
    std::string err;
};

outcome invoke( std::vector< std::string > args )
{
    args.insert( args.begin(), "chainforge" );
    auto argv = std::vector< const char* >{};
    for ( const auto& a : args )
        argv.push_back( a.c_str() );
    auto out = std::ostringstream{};
    auto err = std::ostringstream{};
    const auto code = cli::run( static_cast< int >( argv.size() ), argv.data(), out, err );
    return { code, out.str(), err.str() };
}

fs::path scratch( const std::string& name )
{
    const auto dir = fs::temp_directory_path() / "chainforge_cli_test";
    fs::create_directories( dir );
    return dir / name;
}

void write( const fs::path& p, const std::string& text )
{
    auto f = std::ofstream{ p };
    f << text;
}

std::string read( const fs::path& p )
{
    auto in = std::ifstream{ p };
    auto ss = std::stringstream{};
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::ordered_json without_time( std::string text )
{
    auto j = nlohmann::ordered_json::parse( text );
    j.erase( "time_ms" );
    return j;
}

} // namespace

TEST_CASE( "generate cruise" )
{
    const auto r = invoke( { "generate", root + "models/cruise.rsys", root + "models/cruise1.props" } );
    CHECK( r.code == cli::exit_code::ok );
    CHECK( r.out.find( "tcs=1 len=9 status=minimal-certified" ) != std::string::npos );
    CHECK( r.out.find( "chain 1: I -> p4 -> p1 -> p2 -> p3 -> F" ) != std::string::npos );
    // one line per step
    auto steps = 0;
    auto in = std::istringstream{ r.out };
    for ( std::string line; std::getline( in, line ); )
        steps += line.find( ") -> (" ) != std::string::npos;
    CHECK( steps == 9 );

    for ( const auto* backend : { "exact", "heuristic" } )
    {
        const auto b = invoke( { "generate", root + "models/cruise.rsys", root + "models/cruise1.props", "--backend",
                              backend } );
        CHECK( b.out.find( "tcs=1 len=9" ) != std::string::npos );
    }
}

TEST_CASE( "json is deterministic and replays" )
{
    const auto args = std::vector< std::string >{ "generate", root + "models/cruise.rsys", root + "models/cruise2.props",
                                                  "--format", "json", "--seed", "3" };
    const auto a = invoke( args );
    const auto b = invoke( args );
    REQUIRE( a.code == 0 );
    CHECK( without_time( a.out ).dump() == without_time( b.out ).dump() );

    const auto report = without_time( a.out );
    CHECK( report[ "schema" ] == 1 );
    CHECK( report[ "summary" ][ "tcs" ] == 1 );
    CHECK( report[ "chains" ][ 0 ][ "covers" ].size() == 9 );

    const auto file = scratch( "cruise2.json" );
    write( file, a.out );
    const auto r = invoke( { "generate", root + "models/cruise.rsys", root + "models/cruise2.props", "--replay",
                          file.string() } );
    REQUIRE( r.code == 0 );
    const auto rep = nlohmann::ordered_json::parse( r.out );
    CHECK( rep[ "ok" ] == true );
    CHECK( rep[ "uncovered" ].empty() );
    CHECK( rep[ "chains" ][ 0 ][ "steps" ] == report[ "chains" ][ 0 ][ "steps" ] );
    CHECK( rep[ "chains" ][ 0 ][ "covers" ] == report[ "chains" ][ 0 ][ "covers" ] );

    SUBCASE( "a shortened chain does not replay" )
    {
        auto cut = nlohmann::ordered_json::parse( a.out );
        cut[ "chains" ][ 0 ][ "steps" ].erase( cut[ "chains" ][ 0 ][ "steps" ].size() - 1 );
        write( file, cut.dump() );
        const auto bad = invoke( { "generate", root + "models/cruise.rsys", root + "models/cruise2.props", "--replay",
                                file.string() } );
        CHECK( bad.code == cli::exit_code::other );
        CHECK( nlohmann::ordered_json::parse( bad.out )[ "ok" ] == false );
    }
    SUBCASE( "multi-chain reports replay" )
    {
        const auto m = invoke( { "generate", root + "models/clusters.rsys", root + "models/clusters.props", "--final",
                              "zone != HOME && x == 0", "--format", "json", "-o", file.string() } );
        REQUIRE( m.code == 0 );
        const auto r2 = invoke( { "generate", root + "models/clusters.rsys", root + "models/clusters.props", "--final",
                               "zone != HOME && x == 0", "--replay", file.string() } );
        CHECK( r2.code == 0 );
        CHECK( nlohmann::ordered_json::parse( r2.out )[ "chains" ].size() == 2 );
    }
}

TEST_CASE( "dot export" )
{
    const auto r = invoke( { "generate", root + "models/cruise.rsys", root + "models/cruise1.props", "--format", "dot" } );
    REQUIRE( r.code == 0 );
    CHECK( r.out == read( root + "tests/golden/cruise1.dot" ) );
}

TEST_CASE( "exit codes" )
{
    const auto model = root + "models/cruise.rsys";
    const auto props = root + "models/cruise1.props";

    const auto unreachable = invoke( { "generate", model, props, "--final", "mode == ON && !enable", "--kmax", "5" } );
    CHECK( unreachable.code == cli::exit_code::no_chain );
    CHECK( unreachable.out.find( "F is not reachable from I" ) != std::string::npos );

    const auto bad_model = scratch( "bad.rsys" );
    write( bad_model, "model bad {\n  state a : bool;\n  trans { a' = nope; }\n}\n" );
    const auto parse = invoke( { "generate", bad_model.string(), props } );
    CHECK( parse.code == cli::exit_code::parse );
    CHECK( parse.err.find( "bad.rsys:3:" ) != std::string::npos );

    const auto bad_final = invoke( { "generate", model, props, "--final", "mode == FAST" } );
    CHECK( bad_final.code == cli::exit_code::parse );

    const auto slow = invoke( { "generate", model, root + "models/cruise2.props", "--timeout", "0.000001" } );
    CHECK( slow.code == cli::exit_code::timeout );

    const auto single = invoke( { "generate", root + "models/clusters.rsys", root + "models/clusters.props", "--final",
                               "zone != HOME && x == 0", "--no-multi" } );
    CHECK( single.code == cli::exit_code::no_chain );
    CHECK( single.out.find( "do not reach each other" ) != std::string::npos );

    const auto route = scratch( "route.rsys" );
    write( route, "model route {\n  state x : 0..3 init 0;\n  input b : bool;\n  trans { x' = x == 0 ? 1 : 3; }\n}\n" );
    const auto wrong = scratch( "route.props" );
    write( wrong, "property p { assume x == 1 || x == 2; assert x == 2; }\n" );
    const auto violated = invoke( { "generate", route.string(), wrong.string(), "--final", "x == 3", "--format", "json" } );
    CHECK( violated.code == cli::exit_code::other );
    const auto report = nlohmann::ordered_json::parse( violated.out );
    CHECK( report[ "failure" ][ "kind" ] == "assertion_violated" );
    CHECK( report[ "violations" ][ 0 ][ "property" ] == "p" );
    CHECK( report[ "counterexample" ].size() == 2 );

    CHECK( invoke( { "generate", model } ).code == cli::exit_code::other );
    CHECK( invoke( { "--help" } ).code == cli::exit_code::ok );
}

TEST_CASE( "external solver backend" )
{
    ::setenv( "CHAINFORGE_SOLVER", "external:" CHAINFORGE_STUB_SOLVER, 1 );
    const auto r = invoke( { "generate", root + "models/cruise.rsys", root + "models/broken.props" } );
    ::setenv( "CHAINFORGE_SOLVER", "nonsense", 1 );
    const auto bad = invoke( { "generate", root + "models/cruise.rsys", root + "models/broken.props" } );
    ::unsetenv( "CHAINFORGE_SOLVER" );
    CHECK( r.code == 0 );
    CHECK( r.out.find( "tcs=1 len=4" ) != std::string::npos );
    CHECK( bad.code == cli::exit_code::other );
    CHECK( bad.err.find( "CHAINFORGE_SOLVER" ) != std::string::npos );
}

TEST_CASE( "bench" )
{
    const auto r = invoke( { "bench", root + "bench" } );
    INFO( r.out );
    CHECK( r.code == 0 );
    CHECK( r.out.find( "cruise1" ) != std::string::npos );
    CHECK( r.out.find( "FAIL" ) == std::string::npos );

    const auto empty = scratch( "empty_suite" );
    fs::create_directories( empty );
    for ( const auto& e : fs::directory_iterator( empty ) )
        fs::remove( e.path() );
    const auto none = invoke( { "bench", empty.string() } );
    CHECK( none.code == 0 );
    CHECK( std::count( none.out.begin(), none.out.end(), '\n' ) == 1 );

    const auto failing = scratch( "failing_suite" );
    fs::create_directories( failing );
    write( failing / "cruise.json", "{ \"model\": \"" + root + "models/cruise.rsys\", \"properties\": \"" + root +
                                        "models/cruise1.props\", \"expect\": { \"len\": 8 } }" );
    write( failing / "missing.json", "{ \"model\": \"nowhere.rsys\", \"properties\": \"nowhere.props\" }" );
    const auto bad = invoke( { "bench", failing.string(), "--format", "json" } );
    CHECK( bad.code == cli::exit_code::other );
    const auto rows = nlohmann::ordered_json::parse( bad.out );
    REQUIRE( rows.size() == 2 );
    CHECK( rows[ 0 ][ "len" ] == 9 );
    CHECK( rows[ 0 ][ "problems" ].size() == 1 );
    CHECK( rows[ 1 ][ "status" ] == "error" );
}
