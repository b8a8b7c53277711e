#include "chainforge/sat/cnf.hpp"
#include "chainforge/model/error.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace chainforge::sat
{

void cnf::add_clause( std::span< const lit > c )
{
    for ( const auto l : c )
    {
        if ( !l.valid() )
            throw error( "literal 0 in clause" );
        _vars = std::max( _vars, l.var() );
    }
    _clauses.emplace_back( c.begin(), c.end() );
}

bool cnf::satisfied_by( const std::vector< bool >& assignment ) const
{
    for ( const auto& c : _clauses )
    {
        auto ok = false;
        for ( const auto l : c )
            if ( assignment.at( static_cast< std::size_t >( l.var() ) ) != l.negated() )
            {
                ok = true;
                break;
            }
        if ( !ok )
            return false;
    }
    return true;
}

void cnf::write_dimacs( std::ostream& out ) const
{
    out << "p cnf " << _vars << ' ' << _clauses.size() << '\n';
    for ( const auto& c : _clauses )
    {
        for ( const auto l : c )
            out << l.dimacs() << ' ';
        out << "0\n";
    }
}

cnf cnf::read_dimacs( std::istream& in )
{
    auto out = cnf{};
    auto line = std::string{};
    auto header = false;
    auto declared_clauses = 0L;
    auto current = clause{};

    while ( std::getline( in, line ) )
    {
        if ( line.empty() || line[ 0 ] == 'c' || line[ 0 ] == '%' )
            continue;
        auto ss = std::istringstream{ line };
        if ( line[ 0 ] == 'p' )
        {
            auto p = std::string{};
            auto fmt = std::string{};
            auto vars = 0;
            if ( header || !( ss >> p >> fmt >> vars >> declared_clauses ) || fmt != "cnf" || vars < 0 )
                throw error( "malformed DIMACS header: " + line );
            header = true;
            out._vars = vars;
            continue;
        }
        if ( !header )
            throw error( "DIMACS clause before header" );
        auto v = 0L;
        while ( ss >> v )
        {
            if ( v == 0 )
            {
                out.add_clause( current );
                current.clear();
            }
            else
            {
                if ( std::labs( v ) > out._vars )
                    throw error( "DIMACS literal " + std::to_string( v ) + " exceeds declared variable count" );
                current.emplace_back( static_cast< int >( v ) );
            }
        }
        if ( !ss.eof() )
            throw error( "malformed DIMACS line: " + line );
    }
    if ( !header )
        throw error( "missing DIMACS header" );
    if ( !current.empty() )
        out.add_clause( current );
    if ( static_cast< long >( out._clauses.size() ) != declared_clauses )
        throw error( "DIMACS header declares " + std::to_string( declared_clauses ) + " clauses, found " +
                     std::to_string( out._clauses.size() ) );
    return out;
}

} // namespace chainforge::sat
