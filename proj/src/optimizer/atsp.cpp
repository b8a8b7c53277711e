#include "chainforge/optimizer/atsp.hpp"
#include "chainforge/model/error.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace chainforge::opt
{

cost_t tour_cost( const atsp_instance& inst, const std::vector< std::size_t >& order )
{
    auto total = cost_t{ 0 };
    for ( std::size_t j = 0; j < order.size(); ++j )
    {
        const auto c = inst.at( order[ j ], order[ ( j + 1 ) % order.size() ] );
        if ( c >= infinite )
            return infinite;
        total += c;
    }
    return total;
}

std::optional< tour > solve_atsp_exact( const atsp_instance& inst )
{
    const auto n = inst.n;
    if ( n > exact_limit )
        throw error( "exact ATSP refused: " + std::to_string( n ) + " vertices exceed the limit of " +
                     std::to_string( exact_limit ) );
    if ( n == 0 )
        return std::nullopt;
    if ( n == 1 )
        return tour{ { 0 }, 0 };

    // dp over subsets of vertices 1..n-1, bit j-1 for vertex j
    const auto m = n - 1;
    const auto subsets = std::size_t{ 1 } << m;
    auto dp = std::vector< cost_t >( subsets * m, infinite );
    auto parent = std::vector< std::uint8_t >( subsets * m, 0 );
    for ( std::size_t j = 0; j < m; ++j )
        dp[ ( std::size_t{ 1 } << j ) * m + j ] = inst.at( 0, j + 1 );

    for ( std::size_t mask = 1; mask < subsets; ++mask )
        for ( std::size_t j = 0; j < m; ++j )
        {
            if ( !( mask & ( std::size_t{ 1 } << j ) ) )
                continue;
            const auto here = dp[ mask * m + j ];
            if ( here >= infinite )
                continue;
            for ( std::size_t k = 0; k < m; ++k )
            {
                if ( mask & ( std::size_t{ 1 } << k ) )
                    continue;
                const auto c = inst.at( j + 1, k + 1 );
                if ( c >= infinite )
                    continue;
                const auto next = mask | ( std::size_t{ 1 } << k );
                if ( here + c < dp[ next * m + k ] )
                {
                    dp[ next * m + k ] = here + c;
                    parent[ next * m + k ] = static_cast< std::uint8_t >( j );
                }
            }
        }

    const auto full = subsets - 1;
    auto best = infinite;
    auto last = m;
    for ( std::size_t j = 0; j < m; ++j )
    {
        const auto here = dp[ full * m + j ];
        const auto back = inst.at( j + 1, 0 );
        if ( here < infinite && back < infinite && here + back < best )
        {
            best = here + back;
            last = j;
        }
    }
    if ( last == m )
        return std::nullopt;

    auto order = std::vector< std::size_t >{};
    auto mask = full;
    auto j = last;
    while ( mask )
    {
        order.push_back( j + 1 );
        const auto prev = parent[ mask * m + j ];
        mask &= ~( std::size_t{ 1 } << j );
        j = prev;
    }
    order.push_back( 0 );
    std::reverse( order.begin(), order.end() );
    return tour{ order, best };
}

namespace
{

// (missing edges, cost of present edges), compared lexicographically
struct score
{
    std::int64_t missing = 0;
    std::int64_t cost = 0;

    score& operator+=( const score& o )
    {
        missing += o.missing;
        cost += o.cost;
        return *this;
    }
    score& operator-=( const score& o )
    {
        missing -= o.missing;
        cost -= o.cost;
        return *this;
    }
    [[nodiscard]] auto operator<=>( const score& ) const = default;
};

score edge( const atsp_instance& inst, std::size_t u, std::size_t v )
{
    const auto c = inst.at( u, v );
    if ( c >= infinite )
        return { 1, 0 };
    return { 0, static_cast< std::int64_t >( c ) };
}

score evaluate( const atsp_instance& inst, const std::vector< std::size_t >& t )
{
    auto s = score{};
    for ( std::size_t j = 0; j < t.size(); ++j )
        s += edge( inst, t[ j ], t[ ( j + 1 ) % t.size() ] );
    return s;
}

std::vector< std::size_t > nearest_neighbour( const atsp_instance& inst )
{
    auto t = std::vector< std::size_t >{ 0 };
    auto used = std::vector< bool >( inst.n, false );
    used[ 0 ] = true;
    for ( std::size_t step = 1; step < inst.n; ++step )
    {
        auto best = inst.n;
        for ( std::size_t v = 0; v < inst.n; ++v )
            if ( !used[ v ] && ( best == inst.n || edge( inst, t.back(), v ) < edge( inst, t.back(), best ) ) )
                best = v;
        used[ best ] = true;
        t.push_back( best );
    }
    return t;
}

// Exchange of the adjacent segments [a, b) and [b, c) keeping orientation.
// With one segment of at most three vertices this is an Or-opt move.
void exchange( std::vector< std::size_t >& t, std::size_t a, std::size_t b, std::size_t c )
{
    std::rotate( t.begin() + static_cast< std::ptrdiff_t >( a ), t.begin() + static_cast< std::ptrdiff_t >( b ),
                 t.begin() + static_cast< std::ptrdiff_t >( c ) );
}

score exchange_delta( const atsp_instance& inst, const std::vector< std::size_t >& t, std::size_t a, std::size_t b,
                      std::size_t c )
{
    const auto n = t.size();
    const auto before_a = t[ a - 1 ];
    const auto after_c = t[ c % n ];
    auto d = score{};
    d += edge( inst, before_a, t[ b ] );
    d += edge( inst, t[ c - 1 ], t[ a ] );
    d += edge( inst, t[ b - 1 ], after_c );
    d -= edge( inst, before_a, t[ a ] );
    d -= edge( inst, t[ b - 1 ], t[ b ] );
    d -= edge( inst, t[ c - 1 ], after_c );
    return d;
}

bool improve_once( const atsp_instance& inst, std::vector< std::size_t >& t, std::size_t max_short )
{
    const auto n = t.size();
    for ( std::size_t a = 1; a < n; ++a )
        for ( std::size_t b = a + 1; b < n; ++b )
            for ( std::size_t c = b + 1; c <= n; ++c )
            {
                if ( max_short && b - a > max_short && c - b > max_short )
                    continue;
                if ( exchange_delta( inst, t, a, b, c ) < score{} )
                {
                    exchange( t, a, b, c );
                    return true;
                }
            }
    return false;
}

void local_search( const atsp_instance& inst, std::vector< std::size_t >& t )
{
    // Or-opt first, then full segment exchanges
    while ( improve_once( inst, t, 3 ) )
    {
    }
    while ( improve_once( inst, t, 0 ) )
    {
        while ( improve_once( inst, t, 3 ) )
        {
        }
    }
}

} // namespace

std::optional< tour > solve_atsp_heuristic( const atsp_instance& inst, std::uint64_t seed, std::size_t rounds )
{
    if ( inst.n == 0 )
        return std::nullopt;
    auto current = nearest_neighbour( inst );
    local_search( inst, current );
    auto best = current;
    auto best_score = evaluate( inst, best );

    auto rng = std::mt19937_64{ seed };
    if ( inst.n >= 5 )
        for ( std::size_t r = 0; r < rounds; ++r )
        {
            // double bridge on the best tour so far
            auto t = best;
            auto cut = std::uniform_int_distribution< std::size_t >( 1, inst.n - 1 );
            auto pts = std::vector< std::size_t >{ cut( rng ), cut( rng ), cut( rng ) };
            std::sort( pts.begin(), pts.end() );
            if ( pts[ 0 ] == pts[ 1 ] || pts[ 1 ] == pts[ 2 ] )
                continue;
            exchange( t, pts[ 0 ], pts[ 1 ], pts[ 2 ] + 1 > inst.n ? inst.n : pts[ 2 ] + 1 );
            local_search( inst, t );
            const auto s = evaluate( inst, t );
            if ( s < best_score )
            {
                best = t;
                best_score = s;
            }
        }

    if ( best_score.missing > 0 )
        return std::nullopt;
    return tour{ best, static_cast< cost_t >( best_score.cost ) };
}

std::optional< tour > solve_atsp( const atsp_instance& inst, backend b, std::uint64_t seed )
{
    if ( b == backend::exact || ( b == backend::automatic && inst.n <= exact_limit ) )
        return solve_atsp_exact( inst );
    return solve_atsp_heuristic( inst, seed );
}

// ---------------------------------------------------------------- covering paths

path_instance make_instance( const reach::reach_graph& g, const reach::closure& c )
{
    auto out = path_instance{};
    out.vertices.push_back( g.initial() );
    for ( std::size_t v = 0; v < g.size(); ++v )
        if ( g.is_property( v ) && g.active( v ) )
            out.vertices.push_back( v );
    out.vertices.push_back( g.final_vertex() );

    const auto n = out.vertices.size();
    out.inst = atsp_instance{ n };
    for ( std::size_t u = 0; u < n; ++u )
        for ( std::size_t v = 0; v < n; ++v )
        {
            if ( u == v || v == 0 || u == n - 1 )
                continue;
            out.inst.set( u, v, c.dist( out.vertices[ u ], out.vertices[ v ] ) );
        }
    out.inst.set( n - 1, 0, 1 );
    return out;
}

collapsed_graph collapse_groups( const reach::reach_graph& g, const reach::abstract_path& path )
{
    auto out = collapsed_graph{ g, {} };
    auto& cg = out.graph;
    const auto interior = [ & ]( std::size_t a, std::size_t b ) {
        const auto it = out.via.find( { a, b } );
        return it == out.via.end() ? std::vector< std::size_t >{} : it->second;
    };
    for ( const auto grp : g.property_groups() )
    {
        const auto ms = g.members( grp );
        if ( ms.size() < 2 )
            continue;
        auto keep = ms.front();
        for ( const auto v : path.vertices )
            if ( g.group_of( v ) == grp )
            {
                keep = v;
                break;
            }
        for ( const auto v : ms )
        {
            if ( v == keep )
                continue;
            auto ins = std::vector< std::pair< std::size_t, reach::weight_t > >{};
            auto outs = std::vector< std::pair< std::size_t, reach::weight_t > >{};
            for ( const auto& [ e, w ] : cg.edges() )
            {
                if ( e.second == v && e.first != v )
                    ins.push_back( { e.first, w } );
                if ( e.first == v && e.second != v )
                    outs.push_back( { e.second, w } );
            }
            for ( const auto& [ a, wa ] : ins )
                for ( const auto& [ b, wb ] : outs )
                    if ( a != b && !cg.weight( a, b ) )
                    {
                        cg.set_edge( a, b, wa + wb );
                        auto mid = interior( a, v );
                        mid.push_back( v );
                        const auto tail = interior( v, b );
                        mid.insert( mid.end(), tail.begin(), tail.end() );
                        out.via[ { a, b } ] = std::move( mid );
                    }
            cg.remove_vertex( v );
            std::erase_if( out.via, [ v ]( const auto& e ) { return e.first.first == v || e.first.second == v; } );
        }
    }
    return out;
}

reach::abstract_path collapsed_graph::expand( const reach::reach_graph& refined, const reach::abstract_path& p ) const
{
    auto vs = std::vector< std::size_t >{};
    for ( std::size_t j = 0; j < p.vertices.size(); ++j )
    {
        if ( j > 0 )
            if ( const auto it = via.find( { p.vertices[ j - 1 ], p.vertices[ j ] } ); it != via.end() )
                vs.insert( vs.end(), it->second.begin(), it->second.end() );
        vs.push_back( p.vertices[ j ] );
    }
    auto out = reach::with_weights( refined, vs );
    if ( !out )
        throw error( "internal error: collapsed path does not expand to graph edges" );
    return *out;
}

std::optional< covering_result > min_covering_path( const reach::reach_graph& g, backend b, std::uint64_t seed )
{
    auto result = covering_result{};
    auto refined = false;
    for ( const auto grp : g.property_groups() )
        refined = refined || g.members( grp ).size() > 1;
    auto collapsed = collapsed_graph{ g, {} };
    if ( refined )
    {
        const auto p = reach::get_covering_path( g );
        if ( !p )
            return std::nullopt;
        collapsed = collapse_groups( g, *p );
        result.collapsed = true;
    }
    const auto& work = collapsed.graph;

    const auto c = reach::closure{ work };
    const auto pi = make_instance( work, c );
    const auto t = solve_atsp( pi.inst, b, seed );
    if ( !t )
        return std::nullopt;
    result.exact = b == backend::exact || ( b == backend::automatic && pi.inst.n <= exact_limit );
    result.tour_cost = t->cost;

    auto vs = std::vector< std::size_t >{ work.initial() };
    for ( std::size_t j = 1; j < t->order.size(); ++j )
    {
        const auto hop = c.expand( pi.vertices[ t->order[ j - 1 ] ], pi.vertices[ t->order[ j ] ] );
        vs.insert( vs.end(), hop.begin() + 1, hop.end() );
    }
    auto p = reach::with_weights( work, vs );
    if ( !p || vs.back() != work.final_vertex() )
        throw error( "internal error: circuit does not cut into a path from I to F" );
    result.path = collapsed.expand( g, *p );
    return result;
}

} // namespace chainforge::opt
