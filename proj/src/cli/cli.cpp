#include "chainforge/cli/cli.hpp"
#include "chainforge/dsl/parser.hpp"
#include "chainforge/model/error.hpp"
#include "chainforge/oracle/oracle.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace chainforge::cli
{

namespace
{

using json = nlohmann::ordered_json;

std::string read_file( const std::filesystem::path& p )
{
    auto in = std::ifstream{ p };
    if ( !in )
        throw dsl::load_error( "cannot open " + p.string() );
    auto ss = std::stringstream{};
    ss << in.rdbuf();
    return ss.str();
}

std::string failure_name( engine::failure f )
{
    switch ( f )
    {
    case engine::failure::none:
        return "none";
    case engine::failure::no_chain_at_bound:
        return "no_chain_at_bound";
    case engine::failure::no_single_chain:
        return "no_single_chain";
    case engine::failure::unchainable:
        return "unchainable";
    case engine::failure::assertion_violated:
        return "assertion_violated";
    }
    return "?";
}

json value_json( const domain& d, value_t v )
{
    if ( d.is_bool() )
        return json( v != 0 );
    if ( d.is_enum() )
        return json( d.format( v ) );
    return json( v );
}

value_t value_of( const domain& d, const json& j, const std::string& var )
{
    if ( d.is_bool() && j.is_boolean() )
        return j.get< bool >() ? 1 : 0;
    if ( d.is_enum() && j.is_string() )
        if ( const auto v = d.lookup( j.get< std::string >() ) )
            return *v;
    if ( d.is_int() && j.is_number_integer() && d.contains( j.get< value_t >() ) )
        return j.get< value_t >();
    throw dsl::load_error( "bad value " + j.dump() + " for " + var );
}

template < typename Vars, typename Vec >
json vec_json( const Vars& vars, const Vec& vec )
{
    auto out = json::object();
    for ( std::size_t i = 0; i < vars.size(); ++i )
        out[ vars[ i ].name ] = value_json( vars[ i ].dom, vec[ i ] );
    return out;
}

template < typename Vec, typename Vars >
Vec vec_of( const Vars& vars, const json& j )
{
    auto out = Vec{};
    for ( const auto& v : vars )
    {
        if ( !j.contains( v.name ) )
            throw dsl::load_error( "missing value for " + v.name );
        out.values.push_back( value_of( v.dom, j.at( v.name ), v.name ) );
    }
    return out;
}

// Executes, keeps every assertion and ends in F; coverage is judged over all chains.
bool sound( const replay_report& r )
{
    return r.violations.empty() && r.final_reached && !r.invalid_input_step && !r.invariant_violation_step;
}

// Steps and covers of one input sequence, replayed from `start`.
json chain_json( const problem& p, const std::vector< input_vec >& inputs, const state_vec& start )
{
    const auto rep = replay( p.m, p.props, p.final, inputs, start );
    auto out = json::object();
    out[ "length" ] = inputs.size();
    out[ "initial" ] = vec_json( p.m.states(), start );
    auto steps = json::array();
    for ( std::size_t t = 0; t < inputs.size() && t + 1 < rep.trace.size(); ++t )
        steps.push_back( { { "step", t },
                           { "input", vec_json( p.m.inputs(), inputs[ t ] ) },
                           { "state", vec_json( p.m.states(), rep.trace[ t + 1 ] ) } } );
    out[ "steps" ] = steps;
    auto covers = json::object();
    for ( const auto& [ name, step ] : rep.covers )
        covers[ name ] = step;
    out[ "covers" ] = covers;
    out[ "final_reached" ] = rep.final_reached;
    out[ "replay_ok" ] = sound( rep );
    return out;
}

std::string covers_at( const test_chain& c, std::size_t t )
{
    auto out = std::string{};
    for ( const auto& [ name, step ] : c.covers )
        if ( step == t )
            out += ( out.empty() ? "  covers " : " " ) + name;
    return out;
}

double ms_since( std::chrono::steady_clock::time_point t0 )
{
    return std::chrono::duration< double, std::milli >( std::chrono::steady_clock::now() - t0 ).count();
}

std::string fixed( double v, int digits )
{
    char buf[ 32 ];
    std::snprintf( buf, sizeof buf, "%.*f", digits, v );
    return buf;
}

} // namespace

problem load_problem( const std::filesystem::path& model_file, const std::filesystem::path& props_file,
                      const std::string& init, const std::string& final )
{
    auto m = dsl::load_model( model_file );
    auto props = dsl::load_properties( props_file, m );
    const auto state_set = [ & ]( const std::string& text, const std::string& what ) {
        auto r = dsl::parse_state_set( text, m, what );
        if ( !r.ok() )
            throw dsl::load_error( r.diagnostics );
        return *r.value;
    };
    auto i = init.empty() ? m.init_predicate() : state_set( init, "--init" );
    auto f = final.empty() ? i : state_set( final, "--final" );
    return { std::move( m ), std::move( props ), std::move( i ), std::move( f ) };
}

int exit_code_of( const engine::chain_result& r )
{
    if ( r.ok() )
        return exit_code::ok;
    switch ( r.why )
    {
    case engine::failure::no_chain_at_bound:
    case engine::failure::no_single_chain:
    case engine::failure::unchainable:
        return exit_code::no_chain;
    default:
        return exit_code::other;
    }
}

json to_json( const problem& p, const engine::chain_result& r, std::optional< double > time_ms )
{
    auto out = json::object();
    out[ "schema" ] = 1;
    out[ "model" ] = p.m.name();
    out[ "status" ] = r.ok() ? engine::to_string( r.result ) : "failed";
    out[ "failure" ] = r.ok() ? json( nullptr ) : json{ { "kind", failure_name( r.why ) }, { "reason", r.reason } };
    out[ "summary" ] = { { "tcs", r.chains.size() }, { "len", r.total_length() } };
    if ( time_ms )
        out[ "time_ms" ] = std::round( *time_ms * 1000 ) / 1000;

    auto chains = json::array();
    for ( const auto& c : r.chains )
    {
        auto j = json::object();
        j[ "path" ] = c.vertices;
        j[ "weights" ] = c.path.weights;
        const auto start = c.chain.trace.empty() ? p.m.initial_state() : c.chain.trace.front();
        j.update( chain_json( p, c.chain.inputs, start ) );
        chains.push_back( std::move( j ) );
    }
    out[ "chains" ] = chains;
    out[ "statistics" ] = { { "k", r.stats.k },
                            { "solver_calls", r.stats.solver_calls },
                            { "paths_checked", r.stats.paths_checked },
                            { "repairs", r.stats.repairs },
                            { "repair_increments", r.stats.repair_increments },
                            { "refinement_splits", r.stats.refinement_splits },
                            { "deepenings", r.stats.deepenings } };
    auto violations = json::array();
    for ( const auto& v : r.violations )
        violations.push_back( { { "property", v.property }, { "step", v.step } } );
    out[ "violations" ] = violations;
    if ( r.counterexample )
    {
        auto cex = json::array();
        for ( const auto& i : r.counterexample->inputs )
            cex.push_back( vec_json( p.m.inputs(), i ) );
        out[ "counterexample" ] = cex;
    }
    return out;
}

std::string to_text( const problem& p, const engine::chain_result& r, double time_ms )
{
    auto out = std::ostringstream{};
    for ( std::size_t k = 0; k < r.chains.size(); ++k )
    {
        const auto& c = r.chains[ k ];
        out << "chain " << k + 1 << ":";
        for ( std::size_t j = 0; j < c.vertices.size(); ++j )
            out << ( j ? " -> " : " " ) << c.vertices[ j ];
        out << "\n";
        const auto start = c.chain.trace.empty() ? p.m.initial_state() : c.chain.trace.front();
        out << "  start " << p.m.format( start ) << "\n";
        const auto rep = replay( p.m, p.props, p.final, c.chain.inputs, start );
        for ( std::size_t t = 0; t < c.chain.inputs.size(); ++t )
        {
            out << "  " << t << "  " << p.m.format( c.chain.inputs[ t ] ) << " -> "
                << p.m.format( rep.trace.at( t + 1 ) );
            auto cov = test_chain{};
            cov.covers = rep.covers;
            out << covers_at( cov, t ) << "\n";
        }
    }
    if ( !r.ok() )
    {
        out << "failed: " << failure_name( r.why ) << ": " << r.reason << "\n";
        for ( const auto& v : r.violations )
            out << "  violation " << v.property << " at step " << v.step << "\n";
        if ( r.counterexample )
            for ( std::size_t t = 0; t < r.counterexample->inputs.size(); ++t )
                out << "  cex " << t << "  " << p.m.format( r.counterexample->inputs[ t ] ) << "\n";
    }
    out << "tcs=" << r.chains.size() << " len=" << r.total_length()
        << " status=" << ( r.ok() ? engine::to_string( r.result ) : "failed" ) << " k=" << r.stats.k
        << " time=" << fixed( time_ms, 1 ) << "ms\n";
    return out.str();
}

std::string to_dot( const engine::chain_result& r )
{
    if ( r.chains.empty() )
        return reach::to_dot( r.graph );
    return reach::to_dot( r.graph, &r.chains.front().path );
}

std::vector< std::vector< input_vec > > inputs_of( const model& m, const json& report )
{
    auto out = std::vector< std::vector< input_vec > >{};
    if ( !report.contains( "chains" ) || !report.at( "chains" ).is_array() )
        throw dsl::load_error( "report has no chains" );
    for ( const auto& c : report.at( "chains" ) )
    {
        auto seq = std::vector< input_vec >{};
        for ( const auto& s : c.at( "steps" ) )
            seq.push_back( vec_of< input_vec >( m.inputs(), s.at( "input" ) ) );
        out.push_back( std::move( seq ) );
    }
    return out;
}

json replay_json( const problem& p, const json& report )
{
    const auto chains = inputs_of( p.m, report );
    auto out = json::object();
    out[ "schema" ] = 1;
    out[ "model" ] = p.m.name();
    auto list = json::array();
    auto covered = std::set< std::string >{};
    auto ok = true;
    for ( std::size_t k = 0; k < chains.size(); ++k )
    {
        const auto& c = report.at( "chains" ).at( k );
        const auto start = c.contains( "initial" ) ? vec_of< state_vec >( p.m.states(), c.at( "initial" ) )
                                                   : p.m.initial_state();
        if ( !holds( p.initial, start, input_vec{} ) )
            ok = false;
        auto j = chain_json( p, chains[ k ], start );
        ok = ok && j.at( "replay_ok" ).get< bool >();
        for ( const auto& [ name, step ] : j.at( "covers" ).items() )
            covered.insert( name );
        list.push_back( std::move( j ) );
    }
    out[ "chains" ] = list;
    out[ "covered" ] = covered;
    auto missing = json::array();
    for ( const auto& prop : p.props )
        if ( !covered.contains( prop.name ) )
            missing.push_back( prop.name );
    out[ "uncovered" ] = missing;
    out[ "ok" ] = ok && missing.empty();
    return out;
}

// ---------------------------------------------------------------- bench

std::vector< bench_row > run_bench( const std::filesystem::path& dir, const engine::config& cfg,
                                    std::optional< double > timeout_s )
{
    auto files = std::vector< std::filesystem::path >{};
    for ( const auto& e : std::filesystem::directory_iterator( dir ) )
        if ( e.is_regular_file() && e.path().extension() == ".json" )
            files.push_back( e.path() );
    std::sort( files.begin(), files.end() );

    auto rows = std::vector< bench_row >{};
    for ( const auto& file : files )
    {
        auto row = bench_row{};
        row.name = file.stem().string();
        try
        {
            const auto spec = json::parse( read_file( file ) );
            const auto base = file.parent_path();
            const auto p = load_problem( base / spec.at( "model" ).get< std::string >(),
                                         base / spec.at( "properties" ).get< std::string >(),
                                         spec.value( "init", std::string{} ), spec.value( "final", std::string{} ) );
            auto c = cfg;
            c.k_max = spec.value( "kmax", cfg.k_max );
            c.k_min = spec.value( "kmin", cfg.k_min );
            if ( timeout_s )
                c.limits.deadline = std::chrono::steady_clock::now() +
                                    std::chrono::duration_cast< std::chrono::steady_clock::duration >(
                                        std::chrono::duration< double >( *timeout_s ) );

            const auto t0 = std::chrono::steady_clock::now();
            const auto r = engine::generate_chain( p.m, p.props, p.initial, p.final, c );
            row.time_ms = ms_since( t0 );
            row.status = r.ok() ? engine::to_string( r.result ) : "failed:" + failure_name( r.why );
            row.tcs = r.chains.size();
            row.len = r.total_length();

            if ( p.m.state_space_size() <= ( 1u << 16 ) )
            {
                const auto o = oracle::min_chain( p.m, p.props, p.initial, p.final );
                if ( o.result == oracle::oracle_answer::outcome::found )
                    row.oracle_len = o.length;
            }
            const auto rb = oracle::random_baseline( p.m, p.props, p.initial, p.final,
                                                     spec.value( "random_budget", std::size_t{ 10000 } ), c.seed );
            row.random_coverage = rb.coverage;
            row.random_len = rb.total_length;

            for ( std::size_t k = 0; k < r.chains.size(); ++k )
            {
                const auto& ch = r.chains[ k ];
                auto subset = std::vector< property >{};
                for ( const auto& prop : p.props )
                    if ( std::find( ch.vertices.begin(), ch.vertices.end(), prop.name ) != ch.vertices.end() )
                        subset.push_back( prop );
                const auto start = ch.chain.trace.empty() ? p.m.initial_state() : ch.chain.trace.front();
                if ( !replay( p.m, subset, p.final, ch.chain.inputs, start ).ok() )
                    row.problems.push_back( "chain " + std::to_string( k + 1 ) + " does not replay" );
            }

            const auto expect = spec.value( "expect", json::object() );
            const auto want_ok = expect.value( "ok", true );
            if ( want_ok != r.ok() )
                row.problems.push_back( want_ok ? "expected a chain: " + r.reason : "expected no chain" );
            if ( expect.contains( "tcs" ) && expect.at( "tcs" ).get< std::size_t >() != row.tcs )
                row.problems.push_back( "tcs " + std::to_string( row.tcs ) + " != " + expect.at( "tcs" ).dump() );
            if ( expect.contains( "len" ) && expect.at( "len" ).get< std::size_t >() != row.len )
                row.problems.push_back( "len " + std::to_string( row.len ) + " != " + expect.at( "len" ).dump() );
            if ( expect.contains( "len_max" ) && row.len > expect.at( "len_max" ).get< std::size_t >() )
                row.problems.push_back( "len " + std::to_string( row.len ) + " > " + expect.at( "len_max" ).dump() );
            if ( expect.contains( "oracle_len" ) &&
                 row.oracle_len != std::optional< std::size_t >( expect.at( "oracle_len" ).get< std::size_t >() ) )
                row.problems.push_back( "oracle length differs from " + expect.at( "oracle_len" ).dump() );
            if ( expect.contains( "oracle_slack" ) && row.oracle_len &&
                 row.len > *row.oracle_len + expect.at( "oracle_slack" ).get< std::size_t >() )
                row.problems.push_back( "len " + std::to_string( row.len ) + " exceeds oracle " +
                                        std::to_string( *row.oracle_len ) + " + slack" );
            if ( expect.contains( "status" ) && expect.at( "status" ).get< std::string >() != row.status )
                row.problems.push_back( "status " + row.status + " != " + expect.at( "status" ).get< std::string >() );
        }
        catch ( const timeout_error& )
        {
            row.status = "t/o";
            row.problems.push_back( "timed out" );
        }
        catch ( const std::exception& e )
        {
            row.status = "error";
            row.problems.push_back( e.what() );
        }
        rows.push_back( std::move( row ) );
    }
    return rows;
}

std::string bench_table( const std::vector< bench_row >& rows )
{
    auto out = std::ostringstream{};
    char line[ 256 ];
    std::snprintf( line, sizeof line, "%-20s %4s %5s %10s %7s %9s %8s  %-26s %s\n", "benchmark", "tcs", "len", "time[ms]",
                   "oracle", "rnd-cov", "rnd-len", "status", "verdict" );
    out << line;
    for ( const auto& r : rows )
    {
        const auto oracle = r.oracle_len ? std::to_string( *r.oracle_len ) : std::string{ "-" };
        std::snprintf( line, sizeof line, "%-20s %4zu %5zu %10.1f %7s %8.0f%% %8zu  %-26s %s\n", r.name.c_str(), r.tcs,
                       r.len, r.time_ms, oracle.c_str(), 100 * r.random_coverage, r.random_len, r.status.c_str(),
                       r.problems.empty() ? "ok" : "FAIL" );
        out << line;
        for ( const auto& p : r.problems )
            out << "    " << p << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------- command line

namespace
{

opt::backend parse_backend( const std::string& s )
{
    if ( s == "exact" )
        return opt::backend::exact;
    if ( s == "heuristic" )
        return opt::backend::heuristic;
    return opt::backend::automatic;
}

} // namespace

int run( int argc, const char* const* argv, std::ostream& out, std::ostream& err )
{
    auto app = CLI::App{ "chainforge: minimal test case chains for synchronous reactive models" };
    app.require_subcommand( 1 );

    auto model_file = std::string{};
    auto props_file = std::string{};
    auto init = std::string{};
    auto final = std::string{};
    auto fmt = std::string{ "text" };
    auto backend = std::string{ "auto" };
    auto replay_file = std::string{};
    auto output = std::string{};
    auto timeout = 0.0;
    auto no_multi = false;
    auto cfg = engine::config{};

    const auto common = [ & ]( CLI::App* c ) {
        c->add_option( "--kmax", cfg.k_max, "Largest step bound" )->check( CLI::NonNegativeNumber );
        c->add_option( "--backend", backend, "ATSP backend" )->check( CLI::IsMember( { "auto", "exact", "heuristic" } ) );
        c->add_option( "--seed", cfg.seed, "Seed for the heuristic and the random baseline" );
        c->add_option( "--timeout", timeout, "Wall-clock limit in seconds" )->check( CLI::PositiveNumber );
        c->add_flag( "--no-multi", no_multi, "Fail instead of splitting into several chains" );
    };

    auto* gen = app.add_subcommand( "generate", "Compute a test case chain" );
    gen->add_option( "model", model_file, "Model file (.rsys)" )->required()->check( CLI::ExistingFile );
    gen->add_option( "properties", props_file, "Property file (.props)" )->required()->check( CLI::ExistingFile );
    gen->add_option( "--init", init, "Initial state set, default: the model's init" );
    gen->add_option( "--final", final, "Final state set, default: the initial set" );
    gen->add_option( "--kmin", cfg.k_min, "Smallest step bound for graph construction" );
    gen->add_option( "--format", fmt, "Output format" )->check( CLI::IsMember( { "text", "json", "dot" } ) );
    gen->add_option( "--output,-o", output, "Write the report to a file" );
    gen->add_option( "--replay", replay_file, "Replay the chains of a JSON report instead of generating" )
        ->check( CLI::ExistingFile );
    gen->add_flag( "--strengthen", cfg.strengthen_invariant, "Strengthen the invariant to the reachable states" );
    common( gen );

    auto suite = std::string{};
    auto* bench = app.add_subcommand( "bench", "Run a benchmark suite" );
    bench->add_option( "suite", suite, "Directory of benchmark descriptions" )->required()->check( CLI::ExistingDirectory );
    bench->add_option( "--format", fmt, "Output format" )->check( CLI::IsMember( { "text", "json" } ) );
    common( bench );

    try
    {
        app.parse( argc, argv );
    }
    catch ( const CLI::ParseError& e )
    {
        const auto code = app.exit( e, out, err );
        return code == 0 ? exit_code::ok : exit_code::other;
    }

    cfg.backend = parse_backend( backend );
    cfg.allow_multi_chain = !no_multi;
    const auto limit = timeout > 0 ? std::optional< double >( timeout ) : std::nullopt;

    try
    {
        if ( bench->parsed() )
        {
            const auto rows = run_bench( suite, cfg, limit );
            if ( fmt == "json" )
            {
                auto j = json::array();
                for ( const auto& r : rows )
                    j.push_back( { { "benchmark", r.name },
                                   { "status", r.status },
                                   { "tcs", r.tcs },
                                   { "len", r.len },
                                   { "oracle_len", r.oracle_len ? json( *r.oracle_len ) : json( nullptr ) },
                                   { "random_coverage", r.random_coverage },
                                   { "random_len", r.random_len },
                                   { "problems", r.problems } } );
                out << j.dump( 2 ) << "\n";
            }
            else
                out << bench_table( rows );
            const auto bad = std::any_of( rows.begin(), rows.end(), []( const bench_row& r ) { return !r.problems.empty(); } );
            return bad ? exit_code::other : exit_code::ok;
        }

        const auto p = load_problem( model_file, props_file, init, final );
        auto text = std::string{};
        auto code = exit_code::ok;
        if ( !replay_file.empty() )
        {
            const auto report = json::parse( read_file( replay_file ) );
            const auto r = replay_json( p, report );
            text = r.dump( 2 ) + "\n";
            code = r.at( "ok" ).get< bool >() ? exit_code::ok : exit_code::other;
        }
        else
        {
            if ( limit )
                cfg.limits.deadline = std::chrono::steady_clock::now() +
                                      std::chrono::duration_cast< std::chrono::steady_clock::duration >(
                                          std::chrono::duration< double >( *limit ) );
            const auto t0 = std::chrono::steady_clock::now();
            const auto r = engine::generate_chain( p.m, p.props, p.initial, p.final, cfg );
            const auto ms = ms_since( t0 );
            if ( fmt == "json" )
                text = to_json( p, r, ms ).dump( 2 ) + "\n";
            else if ( fmt == "dot" )
                text = to_dot( r );
            else
                text = to_text( p, r, ms );
            code = exit_code_of( r );
            if ( !r.ok() && fmt != "text" )
                err << "chainforge: " << r.reason << "\n";
        }
        if ( output.empty() )
            out << text;
        else
        {
            auto f = std::ofstream{ output };
            if ( !f )
                throw error( "cannot write " + output );
            f << text;
        }
        return code;
    }
    catch ( const dsl::load_error& e )
    {
        err << e.what() << ( std::string_view{ e.what() }.ends_with( '\n' ) ? "" : "\n" );
        return exit_code::parse;
    }
    catch ( const nlohmann::json::exception& e )
    {
        err << "chainforge: bad JSON: " << e.what() << "\n";
        return exit_code::parse;
    }
    catch ( const timeout_error& )
    {
        err << "chainforge: timed out after " << timeout << " s\n";
        return exit_code::timeout;
    }
    catch ( const std::exception& e )
    {
        err << "chainforge: " << e.what() << "\n";
        return exit_code::other;
    }
}

} // namespace chainforge::cli
