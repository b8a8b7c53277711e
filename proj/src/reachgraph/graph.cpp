#include "chainforge/reachgraph/graph.hpp"
#include "chainforge/model/error.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace chainforge::reach
{

reach_graph::reach_graph( std::vector< bmc::vertex_spec > vertices )
{
    if ( vertices.size() < 2 )
        throw error( "reach graph needs I and F" );
    for ( std::size_t v = 0; v < vertices.size(); ++v )
        _nodes.push_back( { std::move( vertices[ v ] ), v, true } );
    _final = _nodes.size() - 1;
}

std::vector< std::size_t > reach_graph::members( std::size_t group ) const
{
    auto out = std::vector< std::size_t >{};
    for ( std::size_t v = 0; v < _nodes.size(); ++v )
        if ( _nodes[ v ].active && _nodes[ v ].group == group )
            out.push_back( v );
    return out;
}

std::vector< std::size_t > reach_graph::property_groups() const
{
    auto out = std::vector< std::size_t >{};
    for ( std::size_t v = 1; v < _final; ++v )
        if ( !members( v ).empty() )
            out.push_back( v );
    return out;
}

bool reach_graph::refined() const
{
    return _nodes.size() > _final + 1;
}

void reach_graph::set_edge( std::size_t u, std::size_t v, weight_t w )
{
    if ( u >= size() || v >= size() || !active( u ) || !active( v ) )
        throw error( "edge between unknown vertices" );
    _edges[ { u, v } ] = w;
}

void reach_graph::remove_edge( std::size_t u, std::size_t v )
{
    _edges.erase( { u, v } );
}

std::optional< weight_t > reach_graph::weight( std::size_t u, std::size_t v ) const
{
    const auto it = _edges.find( { u, v } );
    if ( it == _edges.end() )
        return std::nullopt;
    return it->second;
}

std::size_t reach_graph::clone( std::size_t v )
{
    if ( !is_property( v ) )
        throw error( "only property vertices can be split" );
    auto n = _nodes.at( v );
    n.spec.name = n.spec.name + "'" ;
    while ( std::any_of( _nodes.begin(), _nodes.end(), [ & ]( const node& o ) { return o.spec.name == n.spec.name; } ) )
        n.spec.name += "'";
    _nodes.push_back( std::move( n ) );
    return _nodes.size() - 1;
}

void reach_graph::remove_vertex( std::size_t v )
{
    _nodes.at( v ).active = false;
    std::erase_if( _edges, [ v ]( const auto& e ) { return e.first.first == v || e.first.second == v; } );
}

reach_graph reach_graph::restricted( const std::vector< std::size_t >& groups ) const
{
    auto out = *this;
    for ( std::size_t v = 0; v < size(); ++v )
        if ( is_property( v ) && active( v ) &&
             std::find( groups.begin(), groups.end(), group_of( v ) ) == groups.end() )
            out.remove_vertex( v );
    return out;
}

// ---------------------------------------------------------------- closure

closure::closure( const reach_graph& g ) : _n{ g.size() }, _dist( _n * _n, unreachable ), _next( _n * _n, _n )
{
    for ( std::size_t v = 0; v < _n; ++v )
    {
        _dist[ v * _n + v ] = 0;
        _next[ v * _n + v ] = v;
    }
    for ( const auto& [ e, w ] : g.edges() )
    {
        const auto [ u, v ] = e;
        if ( u != v && w < _dist[ u * _n + v ] )
        {
            _dist[ u * _n + v ] = w;
            _next[ u * _n + v ] = v;
        }
    }
    for ( std::size_t k = 0; k < _n; ++k )
        for ( std::size_t i = 0; i < _n; ++i )
        {
            const auto ik = _dist[ i * _n + k ];
            if ( ik >= unreachable )
                continue;
            for ( std::size_t j = 0; j < _n; ++j )
            {
                const auto kj = _dist[ k * _n + j ];
                if ( kj < unreachable && ik + kj < _dist[ i * _n + j ] )
                {
                    _dist[ i * _n + j ] = ik + kj;
                    _next[ i * _n + j ] = _next[ i * _n + k ];
                }
            }
        }
}

std::vector< std::size_t > closure::expand( std::size_t u, std::size_t v ) const
{
    if ( !reaches( u, v ) )
        throw error( "no path to expand" );
    auto out = std::vector< std::size_t >{ u };
    while ( u != v )
    {
        u = _next[ u * _n + v ];
        out.push_back( u );
    }
    return out;
}

reach_graph transitive_closure( const reach_graph& g )
{
    const auto c = closure{ g };
    auto out = g;
    for ( std::size_t u = 0; u < g.size(); ++u )
        for ( std::size_t v = 0; v < g.size(); ++v )
            if ( u != v && c.reaches( u, v ) )
                out.set_edge( u, v, c.dist( u, v ) );
    return out;
}

// ---------------------------------------------------------------- covering

std::string covering_report::describe( const reach_graph& g ) const
{
    if ( ok )
        return "a covering path exists";
    auto os = std::ostringstream{};
    auto first = true;
    const auto sep = [ & ] {
        if ( !first )
            os << "; ";
        first = false;
    };
    for ( const auto v : unreachable_from_initial )
    {
        sep();
        os << g.name( v ) << " is not reachable from I";
    }
    for ( const auto v : cannot_reach_final )
    {
        sep();
        os << "F is not reachable from " << g.name( v );
    }
    for ( const auto& [ a, b ] : unordered )
    {
        sep();
        os << g.name( a ) << " and " << g.name( b ) << " do not reach each other";
    }
    return os.str();
}

namespace
{

constexpr std::size_t choice_limit = 4096;

} // namespace

covering_report check_covering( const reach_graph& g )
{
    const auto c = closure{ g };
    const auto i = g.initial();
    const auto f = g.final_vertex();
    auto out = covering_report{};

    if ( !c.reaches( i, f ) )
    {
        out.cannot_reach_final.push_back( i );
        return out;
    }

    // visitable members per group
    auto options = std::vector< std::vector< std::size_t > >{};
    for ( const auto grp : g.property_groups() )
    {
        auto good = std::vector< std::size_t >{};
        auto ms = g.members( grp );
        for ( const auto v : ms )
            if ( c.reaches( i, v ) && c.reaches( v, f ) )
                good.push_back( v );
        if ( good.empty() )
        {
            for ( const auto v : ms )
            {
                if ( !c.reaches( i, v ) )
                    out.unreachable_from_initial.push_back( v );
                if ( !c.reaches( v, f ) )
                    out.cannot_reach_final.push_back( v );
            }
        }
        options.push_back( std::move( good ) );
    }
    if ( !out.conditions_1_2() )
        return out;

    const auto ordered_pairs = [ & ]( const std::vector< std::size_t >& chosen, std::vector< vertex_pair >* bad ) {
        auto ok = true;
        for ( std::size_t a = 0; a < chosen.size(); ++a )
            for ( std::size_t b = a + 1; b < chosen.size(); ++b )
                if ( !c.reaches( chosen[ a ], chosen[ b ] ) && !c.reaches( chosen[ b ], chosen[ a ] ) )
                {
                    ok = false;
                    if ( !bad )
                        return false;
                    bad->push_back( { chosen[ a ], chosen[ b ] } );
                }
        return ok;
    };

    auto combos = std::size_t{ 1 };
    for ( const auto& o : options )
        combos = std::min( choice_limit + 1, combos * o.size() );

    auto idx = std::vector< std::size_t >( options.size(), 0 );
    const auto current = [ & ] {
        auto chosen = std::vector< std::size_t >{};
        for ( std::size_t gi = 0; gi < options.size(); ++gi )
            chosen.push_back( options[ gi ][ idx[ gi ] ] );
        return chosen;
    };
    for ( std::size_t n = 0; n < std::min( combos, choice_limit ); ++n )
    {
        const auto chosen = current();
        if ( ordered_pairs( chosen, nullptr ) )
        {
            out.ok = true;
            out.chosen = chosen;
            return out;
        }
        // odometer, last group fastest
        for ( auto gi = options.size(); gi-- > 0; )
        {
            if ( ++idx[ gi ] < options[ gi ].size() )
                break;
            idx[ gi ] = 0;
        }
    }
    std::fill( idx.begin(), idx.end(), 0 );
    ordered_pairs( current(), &out.unordered );
    return out;
}

bool exists_covering_path( const reach_graph& g )
{
    return check_covering( g ).ok;
}

weight_t abstract_path::length() const
{
    auto total = weight_t{ 0 };
    for ( const auto w : weights )
        total += w;
    return total;
}

std::optional< abstract_path > with_weights( const reach_graph& g, const std::vector< std::size_t >& vs )
{
    auto out = abstract_path{ vs, {} };
    for ( std::size_t j = 1; j < vs.size(); ++j )
    {
        const auto w = g.weight( vs[ j - 1 ], vs[ j ] );
        if ( !w )
            return std::nullopt;
        out.weights.push_back( *w );
    }
    return out;
}

std::optional< abstract_path > get_covering_path( const reach_graph& g )
{
    const auto report = check_covering( g );
    if ( !report.ok )
        return std::nullopt;
    const auto c = closure{ g };

    auto order = std::vector< std::size_t >{ g.initial() };
    for ( const auto v : report.chosen )
    {
        auto p = std::size_t{ 0 };
        for ( std::size_t q = 0; q < order.size(); ++q )
            if ( c.reaches( order[ q ], v ) )
                p = q;
        order.insert( order.begin() + static_cast< std::ptrdiff_t >( p ) + 1, v );
    }
    order.push_back( g.final_vertex() );

    auto vs = std::vector< std::size_t >{ g.initial() };
    for ( std::size_t j = 1; j < order.size(); ++j )
    {
        const auto hop = c.expand( order[ j - 1 ], order[ j ] );
        vs.insert( vs.end(), hop.begin() + 1, hop.end() );
    }
    return with_weights( g, vs );
}

bool is_covering( const reach_graph& g, const abstract_path& p )
{
    if ( p.vertices.size() < 2 || p.vertices.front() != g.initial() || p.vertices.back() != g.final_vertex() ||
         p.weights.size() + 1 != p.vertices.size() )
        return false;
    for ( std::size_t j = 1; j < p.vertices.size(); ++j )
        if ( g.weight( p.vertices[ j - 1 ], p.vertices[ j ] ) != p.weights[ j - 1 ] )
            return false;
    auto seen = std::set< std::size_t >{};
    for ( const auto v : p.vertices )
        seen.insert( g.group_of( v ) );
    for ( const auto grp : g.property_groups() )
        if ( !seen.contains( grp ) )
            return false;
    return true;
}

// ---------------------------------------------------------------- build

build_result build_graph( bmc::context& ctx, const std::vector< bmc::vertex_spec >& vertices, const build_options& opt )
{
    auto out = build_result{ reach_graph{ vertices }, build_result::outcome::bound_exceeded, 0, 0 };
    auto& g = out.graph;
    const auto i = g.initial();
    const auto f = g.final_vertex();
    const auto calls_before = ctx.solver_calls;

    auto pending = std::set< vertex_pair >{};
    if ( g.num_properties() == 0 )
        pending.insert( { i, f } );
    for ( std::size_t p = 1; p < f; ++p )
    {
        pending.insert( { i, p } );
        pending.insert( { p, f } );
        for ( std::size_t q = 1; q < f; ++q )
            if ( p != q )
                pending.insert( { p, q } );
    }

    auto kr = bmc::kreach{ ctx, vertices };
    for ( std::size_t k = 0; k <= opt.k_max; ++k )
    {
        out.k = k;
        for ( const auto& [ u, v ] : kr.edges( pending, k ) )
            g.set_edge( u, v, k );
        if ( k >= opt.k_min && exists_covering_path( g ) )
        {
            out.result = build_result::outcome::ok;
            break;
        }
        if ( pending.empty() )
        {
            out.result = exists_covering_path( g ) ? build_result::outcome::ok : build_result::outcome::no_single_chain;
            break;
        }
    }
    out.solver_calls = ctx.solver_calls - calls_before;
    return out;
}

// ---------------------------------------------------------------- dot

namespace
{

std::string quoted( const std::string& s )
{
    auto out = std::string{ "\"" };
    for ( const auto ch : s )
    {
        if ( ch == '"' || ch == '\\' )
            out += '\\';
        out += ch;
    }
    return out + "\"";
}

} // namespace

std::string to_dot( const reach_graph& g, const abstract_path* highlight )
{
    auto bold = std::set< vertex_pair >{};
    if ( highlight )
        for ( std::size_t j = 1; j < highlight->vertices.size(); ++j )
            bold.insert( { highlight->vertices[ j - 1 ], highlight->vertices[ j ] } );

    auto os = std::ostringstream{};
    os << "digraph reach {\n  rankdir=LR;\n  node [shape=ellipse];\n";
    for ( std::size_t v = 0; v < g.size(); ++v )
    {
        if ( !g.active( v ) || g.members( g.group_of( v ) ).size() > 1 )
            continue;
        os << "  v" << v << " [label=" << quoted( g.name( v ) ) << ( g.is_property( v ) ? "" : ", shape=box" ) << "];\n";
    }
    for ( const auto grp : g.property_groups() )
    {
        const auto ms = g.members( grp );
        if ( ms.size() < 2 )
            continue;
        os << "  subgraph cluster_" << grp << " {\n    style=rounded;\n    label=" << quoted( g.name( grp ) ) << ";\n";
        for ( const auto v : ms )
            os << "    v" << v << " [label=" << quoted( g.name( v ) ) << "];\n";
        os << "  }\n";
    }
    for ( const auto& [ e, w ] : g.edges() )
    {
        os << "  v" << e.first << " -> v" << e.second << " [label=\"" << w << "\"";
        if ( bold.contains( e ) )
            os << ", style=bold";
        os << "];\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace chainforge::reach
