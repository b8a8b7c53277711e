#include "chainforge/sat/solver.hpp"
#include "chainforge/model/error.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

namespace chainforge::sat
{

namespace
{

std::string shell_quote( const std::string& s )
{
    auto out = std::string{ "'" };
    for ( const auto c : s )
        out += c == '\'' ? std::string{ "'\\''" } : std::string( 1, c );
    return out + "'";
}

class external final : public solver
{
    std::filesystem::path _path;
    cnf _clauses;
    std::vector< bool > _model;
    std::vector< lit > _core;
    solver_stats _stats;
    std::optional< clock::time_point > _deadline;

    // One run of the external process on clauses plus units.
    status run( std::span< const lit > units )
    {
        if ( _deadline && clock::now() > *_deadline )
            return status::unknown;
        ++_stats.solves;

        static std::atomic< unsigned > counter{ 0 };
        const auto file = std::filesystem::temp_directory_path() /
                          ( "chainforge-" + std::to_string( ::getpid() ) + "-" + std::to_string( counter++ ) + ".cnf" );
        {
            auto copy = _clauses;
            for ( const auto u : units )
                copy.add_clause( { u } );
            auto out = std::ofstream{ file };
            copy.write_dimacs( out );
        }

        const auto command = shell_quote( _path.string() ) + " " + shell_quote( file.string() ) + " 2>/dev/null";
        auto* pipe = ::popen( command.c_str(), "r" );
        if ( pipe == nullptr )
        {
            std::filesystem::remove( file );
            throw error( "cannot run external solver " + _path.string() );
        }
        auto output = std::string{};
        char buf[ 4096 ];
        while ( const auto n = std::fread( buf, 1, sizeof buf, pipe ) )
            output.append( buf, n );
        const auto rc = ::pclose( pipe );
        std::filesystem::remove( file );
        const auto code = WIFEXITED( rc ) ? WEXITSTATUS( rc ) : -1;

        auto verdict = std::optional< status >{};
        auto model = std::vector< bool >( static_cast< std::size_t >( _clauses.num_vars() ) + 1, false );
        auto in = std::istringstream{ output };
        auto line = std::string{};
        while ( std::getline( in, line ) )
        {
            if ( line.rfind( "s ", 0 ) == 0 )
            {
                if ( line.find( "UNSATISFIABLE" ) != std::string::npos )
                    verdict = status::unsat;
                else if ( line.find( "SATISFIABLE" ) != std::string::npos )
                    verdict = status::sat;
                else
                    verdict = status::unknown;
            }
            else if ( line.rfind( "v ", 0 ) == 0 )
            {
                auto ss = std::istringstream{ line.substr( 2 ) };
                auto v = 0L;
                while ( ss >> v )
                    if ( v > 0 && static_cast< std::size_t >( v ) < model.size() )
                        model[ static_cast< std::size_t >( v ) ] = true;
            }
        }
        if ( !verdict )
        {
            if ( code == 10 )
                verdict = status::sat;
            else if ( code == 20 )
                verdict = status::unsat;
            else
                throw error( "external solver " + _path.string() + " gave no answer (exit code " +
                             std::to_string( code ) + ")" );
        }
        if ( *verdict == status::sat )
            _model = std::move( model );
        return *verdict;
    }

public:
    using clause_sink::add_clause;
    using solver::solve;

    explicit external( std::filesystem::path path ) : _path{ std::move( path ) } {}

    lit new_var() override { return _clauses.new_var(); }
    void add_clause( std::span< const lit > c ) override { _clauses.add_clause( c ); }
    [[nodiscard]] int num_vars() const override { return _clauses.num_vars(); }

    status solve( std::span< const lit > assumptions ) override
    {
        _model.clear();
        _core.clear();
        for ( const auto a : assumptions )
            _clauses.reserve_vars( a.var() );

        const auto result = run( assumptions );
        if ( result != status::unsat )
            return result;

        // Core by deletion over the assumptions.
        auto core = std::vector< lit >( assumptions.begin(), assumptions.end() );
        for ( std::size_t i = 0; i < core.size(); )
        {
            auto trial = core;
            trial.erase( trial.begin() + static_cast< std::ptrdiff_t >( i ) );
            const auto r = run( trial );
            if ( r == status::unsat )
                core = std::move( trial );
            else if ( r == status::sat )
                ++i;
            else
                break; // out of time: keep the larger core
        }
        _model.clear();
        _core = std::move( core );
        return status::unsat;
    }

    [[nodiscard]] bool value( lit l ) const override
    {
        const auto v = static_cast< std::size_t >( l.var() );
        const auto t = v < _model.size() && _model[ v ];
        return l.negated() ? !t : t;
    }

    [[nodiscard]] const std::vector< lit >& core() const override { return _core; }
    void set_conflict_budget( std::int64_t ) override {}
    void set_deadline( std::optional< clock::time_point > deadline ) override { _deadline = deadline; }
    [[nodiscard]] const solver_stats& stats() const override { return _stats; }
    [[nodiscard]] std::string name() const override { return "external:" + _path.string(); }
};

} // namespace

std::unique_ptr< solver > make_external_solver( std::filesystem::path path )
{
    return std::make_unique< external >( std::move( path ) );
}

std::unique_ptr< solver > make_solver()
{
    const auto* env = std::getenv( "CHAINFORGE_SOLVER" );
    const auto choice = std::string{ env ? env : "" };
    if ( choice.empty() || choice == "cdcl" )
        return make_cdcl_solver();
    if ( choice.rfind( "external:", 0 ) == 0 && choice.size() > 9 )
        return make_external_solver( choice.substr( 9 ) );
    throw error( "CHAINFORGE_SOLVER must be 'cdcl' or 'external:<path>', got '" + choice + "'" );
}

std::vector< lit > shrink_core( solver& s, std::vector< lit > core )
{
    const auto cap = 2 * core.size();
    auto calls = std::size_t{ 0 };
    for ( std::size_t i = 0; i < core.size() && calls < cap; )
    {
        auto trial = core;
        trial.erase( trial.begin() + static_cast< std::ptrdiff_t >( i ) );
        ++calls;
        if ( s.solve( trial ) == status::unsat )
        {
            const auto kept = std::set< lit >( s.core().begin(), s.core().end() );
            core.clear();
            for ( const auto l : trial )
                if ( kept.contains( l ) )
                    core.push_back( l );
        }
        else
        {
            ++i;
        }
    }
    return core;
}

} // namespace chainforge::sat
