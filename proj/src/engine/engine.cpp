#include "chainforge/engine/engine.hpp"
#include "chainforge/model/error.hpp"

#include <algorithm>
#include <bit>
#include <set>

namespace chainforge::engine
{

std::string to_string( status s )
{
    switch ( s )
    {
    case status::minimal_certified:
        return "minimal-certified";
    case status::minimised:
        return "minimised";
    case status::multi_chain:
        return "multi-chain";
    case status::failed:
        return "failed";
    }
    return "?";
}

std::size_t chain_result::total_length() const
{
    auto n = std::size_t{ 0 };
    for ( const auto& c : chains )
        n += c.chain.length();
    return n;
}

namespace
{

std::vector< bmc::vertex_spec > specs_of( const reach::reach_graph& g, const std::vector< std::size_t >& vs )
{
    auto out = std::vector< bmc::vertex_spec >{};
    for ( const auto v : vs )
        out.push_back( g.spec( v ) );
    return out;
}

std::vector< std::size_t > as_sizes( const std::vector< reach::weight_t >& ws )
{
    return { ws.begin(), ws.end() };
}

// concrete configuration a covered vertex starts from
struct anchor
{
    state_vec state;
    input_vec input;
};

// Least w in [from, k_max] with an execution of w steps covering `src` at
// `start` (if given) and reaching `dst`, ending outside `exclude`.
std::optional< std::pair< std::size_t, anchor > > chain_step( bmc::context& ctx, const bmc::vertex_spec& src,
                                                               const std::optional< anchor >& start,
                                                               const bmc::vertex_spec& dst, std::size_t from,
                                                               std::size_t k_max, const std::vector< anchor >& exclude )
{
    auto u = bmc::unrolling{ ctx };
    auto fixed = std::vector< sat::lit >{ u.source( src, 0 ) };
    if ( start )
    {
        fixed.push_back( u.state_is( 0, start->state ) );
        fixed.push_back( u.input_is( 0, start->input ) );
    }
    for ( auto w = from; w <= k_max; ++w )
    {
        ctx.check_deadline();
        if ( src.k == bmc::vertex_spec::kind::property && dst.k == bmc::vertex_spec::kind::final && w == 0 )
            continue;
        auto a = u.steps( w );
        a.insert( a.end(), fixed.begin(), fixed.end() );
        a.push_back( u.target( dst, w ) );
        for ( const auto& e : exclude )
            a.push_back( ~u.enc().and_( u.state_is( w, e.state ), u.input_is( w, e.input ) ) );
        if ( u.solve( a ) == sat::status::sat )
            return std::pair{ w, anchor{ u.state( w ), u.input( w ) } };
    }
    return std::nullopt;
}

} // namespace

// ---------------------------------------------------------------- repair

repair_result repair_path( bmc::context& ctx, const reach::reach_graph& g, const reach::abstract_path& path,
                           std::size_t lo, std::size_t hi, const config& cfg )
{
    auto out = repair_result{ false, path.weights, 0, {} };
    const auto n = hi - lo + 1;
    // sigma[j]: concrete configuration anchoring vertex lo + j
    auto sigma = std::vector< std::optional< anchor > >( n );
    auto tried = std::vector< std::vector< anchor > >( n );

    auto e = lo;
    while ( e < hi )
    {
        const auto j = e - lo;
        const auto& src = g.spec( path.vertices[ e ] );
        const auto& dst = g.spec( path.vertices[ e + 1 ] );
        const auto step = chain_step( ctx, src, sigma[ j ], dst, path.weights[ e ], cfg.k_max, {} );
        if ( step )
        {
            out.weights[ e ] = step->first;
            sigma[ j + 1 ] = step->second;
            ++e;
            continue;
        }

        // another witness for the anchor of this edge, if the previous edge can give one
        auto retried = false;
        if ( e > lo && sigma[ j ] && tried[ j ].size() + 1 < cfg.repair_witnesses )
        {
            tried[ j ].push_back( *sigma[ j ] );
            const auto& prev = g.spec( path.vertices[ e - 1 ] );
            const auto again = chain_step( ctx, prev, sigma[ j - 1 ], src, out.weights[ e - 1 ], cfg.k_max, tried[ j ] );
            if ( again )
            {
                out.weights[ e - 1 ] = again->first;
                sigma[ j ] = again->second;
                retried = true;
            }
        }
        if ( retried )
            continue;

        if ( e > lo )
            out.triple = { e - 1, e, e + 1 };
        else if ( e + 2 < path.vertices.size() )
            out.triple = { e, e + 1, e + 2 };
        for ( std::size_t i = lo; i < hi; ++i )
            out.increments += out.weights[ i ] - path.weights[ i ];
        return out;
    }
    for ( std::size_t i = lo; i < hi; ++i )
        out.increments += out.weights[ i ] - path.weights[ i ];
    out.succeeded = true;
    return out;
}

// ---------------------------------------------------------------- refinement

std::size_t refine( reach::reach_graph& g, const reach::abstract_path& path, const std::vector< std::size_t >& triple,
                    bool literal_weight )
{
    if ( triple.size() != 3 )
        throw error( "refinement needs a failed triple" );
    const auto before = path.vertices.at( triple[ 0 ] );
    const auto phi = path.vertices.at( triple[ 1 ] );
    const auto after = path.vertices.at( triple[ 2 ] );
    if ( !g.is_property( phi ) )
        throw error( "refinement can only split property vertices" );

    auto w = g.weight( before, phi );
    if ( literal_weight && g.weight( before, after ) )
        w = g.weight( before, after );
    if ( !w )
        throw error( "refinement triple is not a path of the graph" );

    const auto outgoing = [ & ] {
        auto es = std::vector< std::pair< std::size_t, reach::weight_t > >{};
        for ( const auto& [ e, wt ] : g.edges() )
            if ( e.first == phi && e.second != after )
                es.push_back( { e.second, wt } );
        return es;
    }();

    const auto fresh = g.clone( phi );
    g.set_edge( before, fresh, *w );
    g.remove_edge( before, phi );
    for ( const auto& [ v, wt ] : outgoing )
        if ( v != fresh )
            g.set_edge( fresh, v, wt );
    g.set_edge( phi, fresh, 0 );
    return fresh;
}

loop_result refinement_loop( bmc::context& ctx, reach::reach_graph& g, const config& cfg, statistics& stats )
{
    auto out = loop_result{};
    auto best = opt::min_covering_path( g, cfg.backend, cfg.seed );
    if ( !best )
    {
        out.why = failure::no_single_chain;
        out.reason = reach::check_covering( g ).describe( g );
        return out;
    }
    out.exact = best->exact && !best->collapsed;
    auto path = best->path;
    const auto max_checks = 4 * ( cfg.k_max + 1 ) * ( g.size() + cfg.max_refinements );

    for ( std::size_t round = 0; round < max_checks; ++round )
    {
        ++stats.paths_checked;
        const auto r = bmc::check_path( ctx, specs_of( g, path.vertices ), as_sizes( path.weights ) );

        if ( r.result == bmc::path_result::outcome::feasible )
        {
            auto entry = chain_entry{ *r.chain, path, {} };
            for ( const auto v : path.vertices )
                entry.vertices.push_back( g.name( v ) );
            out.chain = std::move( entry );
            return out;
        }
        if ( r.result == bmc::path_result::outcome::assertion_violated )
        {
            out.why = failure::assertion_violated;
            out.violations = r.violations;
            out.counterexample = r.counterexample;
            out.reason = "property assertion violated";
            for ( const auto& v : r.violations )
                out.reason += " " + v.property + "@" + std::to_string( v.step );
            return out;
        }
        if ( !cfg.repair )
        {
            out.why = failure::no_chain_at_bound;
            out.reason = "abstract path is not feasible and repair is disabled";
            return out;
        }

        const auto lo = r.failed.front();
        const auto hi = r.failed.back();
        auto rep = repair_path( ctx, g, path, lo, hi, cfg );
        ++stats.repairs;
        if ( rep.succeeded && rep.weights == path.weights && ( lo != 0 || hi + 1 != path.vertices.size() ) )
        {
            // the region chains on its own; anchor the whole path at I instead
            rep = repair_path( ctx, g, path, 0, path.vertices.size() - 1, cfg );
            ++stats.repairs;
        }
        if ( rep.succeeded && rep.weights != path.weights )
        {
            stats.repair_increments += rep.increments;
            path.weights = rep.weights;
            out.stretched = true;
            continue;
        }
        if ( rep.triple.empty() )
            rep.triple = { lo, std::min( lo + 1, hi ), hi };

        if ( !cfg.refine )
        {
            out.why = failure::no_chain_at_bound;
            out.reason = "no chain found for given bound K=" + std::to_string( cfg.k_max );
            return out;
        }
        if ( stats.refinement_splits >= cfg.max_refinements || !g.is_property( path.vertices[ rep.triple[ 1 ] ] ) ||
             rep.triple[ 0 ] == rep.triple[ 1 ] || rep.triple[ 1 ] == rep.triple[ 2 ] )
        {
            out.why = failure::no_single_chain;
            out.reason = "chain repair and refinement exhausted";
            return out;
        }
        refine( g, path, rep.triple, cfg.literal_refinement_weight );
        ++stats.refinement_splits;

        best = opt::min_covering_path( g, cfg.backend, cfg.seed );
        if ( !best )
        {
            out.why = failure::no_single_chain;
            out.reason = "no covering path after refinement: " + reach::check_covering( g ).describe( g );
            return out;
        }
        path = best->path;
        out.exact = false;
        out.stretched = true;
    }
    out.why = failure::no_single_chain;
    out.reason = "chain repair did not converge";
    return out;
}

// ---------------------------------------------------------------- partitioning

std::vector< std::size_t > min_cover( const std::vector< std::size_t >& universe,
                                      const std::vector< std::vector< std::size_t > >& sets )
{
    const auto bit_of = [ & ]( std::size_t x ) {
        return static_cast< std::size_t >( std::find( universe.begin(), universe.end(), x ) - universe.begin() );
    };
    if ( universe.empty() )
        return {};

    if ( sets.size() <= 20 && universe.size() <= 64 )
    {
        auto masks = std::vector< std::uint64_t >{};
        for ( const auto& s : sets )
        {
            auto m = std::uint64_t{ 0 };
            for ( const auto x : s )
                if ( const auto b = bit_of( x ); b < universe.size() )
                    m |= std::uint64_t{ 1 } << b;
            masks.push_back( m );
        }
        const auto full = universe.size() == 64 ? ~std::uint64_t{ 0 } : ( std::uint64_t{ 1 } << universe.size() ) - 1;
        auto best = std::uint64_t{ 0 };
        auto best_count = sets.size() + 1;
        for ( std::uint64_t pick = 1; pick < ( std::uint64_t{ 1 } << sets.size() ); ++pick )
        {
            const auto count = static_cast< std::size_t >( std::popcount( pick ) );
            if ( count >= best_count )
                continue;
            auto covered = std::uint64_t{ 0 };
            for ( std::size_t i = 0; i < sets.size(); ++i )
                if ( pick & ( std::uint64_t{ 1 } << i ) )
                    covered |= masks[ i ];
            if ( ( covered & full ) == full )
            {
                best = pick;
                best_count = count;
            }
        }
        auto out = std::vector< std::size_t >{};
        for ( std::size_t i = 0; i < sets.size(); ++i )
            if ( best & ( std::uint64_t{ 1 } << i ) )
                out.push_back( i );
        return out;
    }

    auto left = std::set< std::size_t >( universe.begin(), universe.end() );
    auto out = std::vector< std::size_t >{};
    while ( !left.empty() )
    {
        auto best = sets.size();
        auto gain = std::size_t{ 0 };
        for ( std::size_t i = 0; i < sets.size(); ++i )
        {
            auto g = std::size_t{ 0 };
            for ( const auto x : sets[ i ] )
                g += left.contains( x );
            if ( g > gain )
            {
                gain = g;
                best = i;
            }
        }
        if ( best == sets.size() )
            break;
        out.push_back( best );
        for ( const auto x : sets[ best ] )
            left.erase( x );
    }
    std::sort( out.begin(), out.end() );
    return out;
}

std::vector< std::vector< std::size_t > > partition_properties( const reach::reach_graph& g )
{
    const auto c = reach::closure{ g };
    const auto i = g.initial();
    const auto f = g.final_vertex();
    const auto groups = g.property_groups();

    auto visitable = std::map< std::size_t, std::vector< std::size_t > >{};
    for ( const auto grp : groups )
    {
        for ( const auto v : g.members( grp ) )
            if ( c.reaches( i, v ) && c.reaches( v, f ) )
                visitable[ grp ].push_back( v );
        if ( visitable[ grp ].empty() )
            throw error( "property " + g.name( grp ) + " cannot be placed between I and F" );
    }
    const auto ordered = [ & ]( std::size_t a, std::size_t b ) {
        for ( const auto x : visitable[ a ] )
            for ( const auto y : visitable[ b ] )
                if ( c.reaches( x, y ) || c.reaches( y, x ) )
                    return true;
        return false;
    };

    using side = std::set< std::size_t >;
    auto classes = std::vector< std::pair< side, side > >{};
    auto rest = side( groups.begin(), groups.end() );
    auto involved = std::vector< std::size_t >{};
    for ( std::size_t a = 0; a < groups.size(); ++a )
        for ( std::size_t b = a + 1; b < groups.size(); ++b )
        {
            const auto vi = groups[ a ];
            const auto vj = groups[ b ];
            if ( ordered( vi, vj ) )
                continue;
            rest.erase( vi );
            rest.erase( vj );
            for ( const auto v : { vi, vj } )
                if ( std::find( involved.begin(), involved.end(), v ) == involved.end() )
                    involved.push_back( v );

            if ( classes.empty() )
            {
                classes = { { { vi }, { vj } }, { { vj }, { vi } } };
                continue;
            }
            auto next = std::vector< std::pair< side, side > >{};
            for ( auto [ plus, minus ] : classes )
            {
                const auto ip = plus.contains( vi ), im = minus.contains( vi );
                const auto jp = plus.contains( vj ), jm = minus.contains( vj );
                if ( ip && jp )
                {
                    auto p2 = plus;
                    auto m2 = minus;
                    p2.erase( vi );
                    m2.insert( vi );
                    next.push_back( { p2, m2 } );
                    plus.erase( vj );
                    minus.insert( vj );
                }
                else if ( im && !jm && !jp )
                    plus.insert( vj );
                else if ( !im && !jm && jp )
                    minus.insert( vi );
                else if ( jm && !im && !ip )
                    plus.insert( vi );
                else if ( !jm && !im && ip )
                    minus.insert( vj );
                else if ( !ip && !im && !jp && !jm )
                {
                    auto p2 = plus;
                    auto m2 = minus;
                    p2.insert( vi );
                    m2.insert( vj );
                    next.push_back( { p2, m2 } );
                    plus.insert( vj );
                    minus.insert( vi );
                }
                next.push_back( { plus, minus } );
            }
            std::sort( next.begin(), next.end() );
            next.erase( std::unique( next.begin(), next.end() ), next.end() );
            classes = std::move( next );
        }

    std::sort( involved.begin(), involved.end() );
    auto candidates = std::vector< std::vector< std::size_t > >{};
    for ( const auto& [ plus, minus ] : classes )
    {
        auto s = std::vector< std::size_t >( plus.begin(), plus.end() );
        if ( std::find( candidates.begin(), candidates.end(), s ) == candidates.end() )
            candidates.push_back( std::move( s ) );
    }
    auto chosen = std::vector< std::vector< std::size_t > >{};
    for ( const auto k : min_cover( involved, candidates ) )
        chosen.push_back( candidates[ k ] );

    // disjoint classes, uncovered vertices on their own
    auto placed = std::set< std::size_t >{};
    auto result = std::vector< std::vector< std::size_t > >{};
    for ( auto& s : chosen )
    {
        std::erase_if( s, [ & ]( std::size_t v ) { return placed.contains( v ); } );
        placed.insert( s.begin(), s.end() );
        if ( !s.empty() )
            result.push_back( s );
    }
    for ( const auto v : involved )
        if ( !placed.contains( v ) )
            result.push_back( { v } );
    if ( result.empty() )
        result.emplace_back();

    auto largest = std::size_t{ 0 };
    for ( std::size_t k = 1; k < result.size(); ++k )
        if ( result[ k ].size() > result[ largest ].size() )
            largest = k;
    result[ largest ].insert( result[ largest ].end(), rest.begin(), rest.end() );

    for ( auto& s : result )
    {
        std::sort( s.begin(), s.end() );
        s.insert( s.begin(), i );
        s.push_back( f );
    }
    return result;
}

// ---------------------------------------------------------------- pipeline

namespace
{

bool repeats( const reach::abstract_path& p )
{
    auto seen = std::set< std::size_t >{};
    for ( const auto v : p.vertices )
        if ( !seen.insert( v ).second )
            return true;
    return false;
}

std::vector< std::size_t > groups_in( const std::vector< std::size_t >& cls, const reach::reach_graph& g )
{
    auto out = std::vector< std::size_t >{};
    for ( const auto v : cls )
        if ( g.is_property( v ) )
            out.push_back( g.group_of( v ) );
    return out;
}

} // namespace

chain_result generate_chain( const model& m, const std::vector< property >& props, const expr& initial,
                             const expr& final, const config& cfg )
{
    auto strengthened = std::optional< model >{};
    if ( cfg.strengthen_invariant )
        strengthened = bmc::strengthen_invariant( m, cfg.strengthen_limit );
    const auto& mm = strengthened ? *strengthened : m;

    auto out = chain_result{};
    auto ctx = bmc::context{ mm, cfg.limits, 0 };

    auto vertices = std::vector< bmc::vertex_spec >{ bmc::vertex_spec::initial( initial ) };
    for ( const auto& p : props )
        vertices.push_back( bmc::vertex_spec::of( p ) );
    vertices.push_back( bmc::vertex_spec::final( final ) );

    const auto finish = [ & ]( chain_result& r ) -> chain_result& {
        r.stats.solver_calls = ctx.solver_calls;
        return r;
    };

    // a spurious path that neither repair nor refinement fixes is retried one bound higher
    auto build = reach::build_result{};
    auto single_reason = std::string{};
    for ( auto k_min = cfg.k_min;; )
    {
        build = reach::build_graph( ctx, vertices, { cfg.k_max, k_min } );
        out.stats.k = build.k;
        out.graph = build.graph;
        if ( build.result != reach::build_result::outcome::ok )
            break;

        auto g = build.graph;
        auto lr = refinement_loop( ctx, g, cfg, out.stats );
        out.graph = g;
        if ( lr.chain )
        {
            auto certified = lr.exact && !lr.stretched && !repeats( lr.chain->path );
            for ( std::size_t p = 0; certified && p < props.size(); ++p )
                certified = bmc::singleton_trigger( ctx, props[ p ].assumption );
            out.result = certified ? status::minimal_certified : status::minimised;
            out.chains.push_back( std::move( *lr.chain ) );
            return finish( out );
        }
        if ( lr.why == failure::assertion_violated )
        {
            out.why = lr.why;
            out.reason = lr.reason;
            out.violations = lr.violations;
            out.counterexample = lr.counterexample;
            return finish( out );
        }
        if ( build.k >= cfg.k_max )
        {
            if ( lr.why != failure::no_single_chain )
            {
                out.why = lr.why;
                out.reason = lr.reason;
                return finish( out );
            }
            single_reason = lr.reason;
            break;
        }
        k_min = build.k + 1;
        ++out.stats.deepenings;
    }

    const auto report = reach::check_covering( build.graph );
    if ( build.result != reach::build_result::outcome::ok )
    {
        if ( !report.conditions_1_2() )
        {
            out.why = build.result == reach::build_result::outcome::bound_exceeded ? failure::no_chain_at_bound
                                                                                    : failure::unchainable;
            out.reason = "no chain found for given bound K=" + std::to_string( build.k ) + ": " +
                         report.describe( build.graph );
            return finish( out );
        }
        single_reason = report.describe( build.graph );
    }

    if ( !cfg.allow_multi_chain )
    {
        out.why = failure::no_single_chain;
        out.reason = "no single chain: " + single_reason;
        return finish( out );
    }

    const auto classes = partition_properties( build.graph );
    auto pending = std::vector< std::vector< std::size_t > >{};
    for ( const auto& cls : classes )
        pending.push_back( groups_in( cls, build.graph ) );
    for ( std::size_t k = 0; k < pending.size(); ++k )
    {
        auto g = build.graph.restricted( pending[ k ] );
        auto lr = refinement_loop( ctx, g, cfg, out.stats );
        if ( lr.chain )
        {
            out.chains.push_back( std::move( *lr.chain ) );
            continue;
        }
        if ( lr.why == failure::no_single_chain && pending[ k ].size() > 1 )
        {
            for ( const auto grp : pending[ k ] )
                pending.push_back( { grp } );
            continue;
        }
        out.chains.clear();
        out.why = lr.why == failure::no_single_chain ? failure::unchainable : lr.why;
        out.reason = lr.reason;
        out.violations = lr.violations;
        out.counterexample = lr.counterexample;
        return finish( out );
    }
    out.result = out.chains.size() > 1 ? status::multi_chain : status::minimised;
    return finish( out );
}

} // namespace chainforge::engine
