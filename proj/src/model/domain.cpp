#include "chainforge/model/domain.hpp"
#include "chainforge/model/error.hpp"

#include <algorithm>
#include <set>

namespace chainforge
{

domain::domain( domain_kind kind, value_t lo, value_t hi, std::vector< std::string > names )
        : _kind{ kind }, _lo{ lo }, _hi{ hi }, _names{ std::move( names ) }
{}

domain domain::boolean()
{
    return domain{ domain_kind::boolean, 0, 1, {} };
}

domain domain::integer( value_t lo, value_t hi )
{
    if ( lo > hi )
        throw sort_error( "empty domain " + std::to_string( lo ) + ".." + std::to_string( hi ) );
    return domain{ domain_kind::integer, lo, hi, {} };
}

domain domain::enumeration( std::vector< std::string > names )
{
    if ( names.empty() )
        throw sort_error( "enum domain needs at least one constant" );

    auto seen = std::set< std::string >{};
    for ( const auto& n : names )
        if ( !seen.insert( n ).second )
            throw sort_error( "duplicate enum constant '" + n + "'" );

    const auto hi = static_cast< value_t >( names.size() ) - 1;
    return domain{ domain_kind::enumeration, 0, hi, std::move( names ) };
}

std::optional< value_t > domain::lookup( const std::string& name ) const
{
    const auto it = std::find( _names.begin(), _names.end(), name );
    if ( it == _names.end() )
        return std::nullopt;
    return static_cast< value_t >( it - _names.begin() );
}

std::string domain::format( value_t v ) const
{
    switch ( _kind )
    {
    case domain_kind::boolean:
        return v != 0 ? "true" : "false";
    case domain_kind::enumeration:
        if ( contains( v ) )
            return _names[ static_cast< std::size_t >( v ) ];
        return "<enum " + std::to_string( v ) + ">";
    case domain_kind::integer:
        break;
    }
    return std::to_string( v );
}

std::string domain::to_string() const
{
    switch ( _kind )
    {
    case domain_kind::boolean:
        return "bool";
    case domain_kind::integer:
        return std::to_string( _lo ) + ".." + std::to_string( _hi );
    case domain_kind::enumeration:
        break;
    }

    auto out = std::string{ "{" };
    for ( std::size_t i = 0; i < _names.size(); ++i )
    {
        if ( i > 0 )
            out += ", ";
        out += _names[ i ];
    }
    return out + "}";
}

domain hull( const domain& a, const domain& b )
{
    return domain::integer( std::min( a.lo(), b.lo() ), std::max( a.hi(), b.hi() ) );
}

} // namespace chainforge
