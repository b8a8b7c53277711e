#include "chainforge/bmc/bmc.hpp"
#include "chainforge/model/error.hpp"

#include <algorithm>

namespace chainforge::bmc
{

std::unique_ptr< sat::solver > context::new_solver() const
{
    auto s = sat::make_solver();
    s->set_conflict_budget( lim.conflict_budget );
    s->set_deadline( lim.deadline );
    return s;
}

void context::check_deadline() const
{
    if ( lim.deadline && std::chrono::steady_clock::now() > *lim.deadline )
        throw timeout_error();
}

sat::status context::solve( sat::solver& s, std::span< const sat::lit > assumptions )
{
    check_deadline();
    ++solver_calls;
    const auto r = s.solve( assumptions );
    if ( r == sat::status::unknown )
        throw timeout_error();
    return r;
}

// ---------------------------------------------------------------- unrolling

unrolling::unrolling( context& ctx ) : _ctx{ ctx }, _solver{ ctx.new_solver() }, _enc{ *_solver }
{
    _act.push_back( _enc.false_lit() );
}

void unrolling::extend( std::size_t n )
{
    const auto& m = _ctx.m;
    while ( _frames.size() <= n )
    {
        auto f = sat::frame{ _enc.new_frame_id(), {}, {}, {} };
        for ( const auto& v : m.states() )
            f.state.push_back( _enc.make_var( v.dom ) );
        for ( const auto& v : m.inputs() )
            f.input.push_back( _enc.make_var( v.dom ) );
        _frames.push_back( std::move( f ) );
        const auto j = _frames.size() - 1;

        _solver->add_clause( { _enc.encode( m.invariant(), _frames[ j ] ) } );
        _solver->add_clause( { _enc.encode( m.input_assumption(), _frames[ j ] ) } );

        if ( j == 0 )
            continue;

        auto prev = _frames[ j - 1 ];
        prev.next = _frames[ j ].state;
        _with_next.push_back( prev );

        const auto act = _solver->new_var();
        _act.push_back( act );
        for ( std::size_t v = 0; v < m.states().size(); ++v )
        {
            const auto& t = m.transition( v );
            const auto& dom = m.states()[ v ].dom;
            const auto rhs = t ? *t : expr::state_ref( v, dom );
            _solver->add_clause( { ~act, _enc.assigns( _frames[ j ].state[ v ], dom, rhs, _frames[ j - 1 ] ) } );
        }
    }
}

sat::lit unrolling::step( std::size_t j )
{
    extend( j );
    return _act.at( j );
}

sat::lit unrolling::at( const expr& e, std::size_t k )
{
    if ( e.has_next_refs() )
    {
        extend( k + 1 );
        return _enc.encode( e, _with_next[ k ] );
    }
    extend( k );
    return _enc.encode( e, _frames[ k ] );
}

sat::lit unrolling::state_is( std::size_t k, const state_vec& s )
{
    extend( k );
    auto parts = std::vector< sat::lit >{};
    for ( std::size_t v = 0; v < s.values.size(); ++v )
        parts.push_back( _enc.equals( _frames[ k ].state[ v ], m().states()[ v ].dom, s[ v ] ) );
    return _enc.and_all( parts );
}

sat::lit unrolling::input_is( std::size_t k, const input_vec& i )
{
    extend( k );
    auto parts = std::vector< sat::lit >{};
    for ( std::size_t v = 0; v < i.values.size(); ++v )
        parts.push_back( _enc.equals( _frames[ k ].input[ v ], m().inputs()[ v ].dom, i[ v ] ) );
    return _enc.and_all( parts );
}

sat::lit unrolling::source( const vertex_spec& v, std::size_t k, bool with_assertion )
{
    if ( v.k != vertex_spec::kind::property )
        return at( v.trigger, k );
    auto out = _enc.and_( at( v.trigger, k ), step( k + 1 ) );
    if ( with_assertion )
        out = _enc.and_( out, at( v.assertion, k ) );
    return out;
}

sat::lit unrolling::target( const vertex_spec& v, std::size_t k )
{
    return at( v.trigger, k );
}

state_vec unrolling::state( std::size_t k ) const
{
    auto out = state_vec{};
    for ( std::size_t v = 0; v < m().states().size(); ++v )
        out.values.push_back( sat::encoder::decode( _frames.at( k ).state[ v ], m().states()[ v ].dom, *_solver ) );
    return out;
}

input_vec unrolling::input( std::size_t k ) const
{
    auto out = input_vec{};
    for ( std::size_t v = 0; v < m().inputs().size(); ++v )
        out.values.push_back( sat::encoder::decode( _frames.at( k ).input[ v ], m().inputs()[ v ].dom, *_solver ) );
    return out;
}

witness unrolling::decode( std::size_t n ) const
{
    auto w = witness{};
    for ( std::size_t k = 0; k <= n; ++k )
    {
        w.states.push_back( state( k ) );
        w.inputs.push_back( input( k ) );
    }
    return w;
}

std::vector< sat::lit > unrolling::steps( std::size_t n )
{
    extend( n );
    return std::vector< sat::lit >( _act.begin() + 1, _act.begin() + static_cast< std::ptrdiff_t >( n ) + 1 );
}

// ---------------------------------------------------------------- queries

std::optional< witness > reach_check( context& ctx, const expr& from, const expr& to, std::size_t k )
{
    auto u = unrolling{ ctx };
    auto a = u.steps( k );
    a.push_back( u.at( from, 0 ) );
    a.push_back( u.at( to, k ) );
    if ( u.solve( a ) != sat::status::sat )
        return std::nullopt;
    return u.decode( std::max< std::size_t >( k, u.frames() - 1 ) );
}

bool witnesses( const model& m, const witness& w, const vertex_spec& from, const vertex_spec& to, std::size_t k )
{
    if ( from.k == vertex_spec::kind::property && to.k == vertex_spec::kind::final && k == 0 )
        return false;
    if ( w.states.size() <= k || w.inputs.size() <= k )
        return false;

    const auto& s0 = w.states[ 0 ];
    const auto& i0 = w.inputs[ 0 ];
    if ( !holds( from.trigger, s0, i0 ) )
        return false;
    if ( from.k == vertex_spec::kind::property )
    {
        const auto s1 = try_step( m, s0, i0 );
        if ( !s1 || !holds( from.assertion, s0, i0, &*s1 ) )
            return false;
    }
    return holds( to.trigger, w.states[ k ], w.inputs[ k ] );
}

kreach::kreach( context& ctx, std::vector< vertex_spec > vertices ) : _u{ ctx }, _vertices{ std::move( vertices ) } {}

std::vector< vertex_pair > kreach::edges( std::set< vertex_pair >& pending, std::size_t k )
{
    auto found = std::vector< vertex_pair >{};
    _u.extend( k + 1 );
    const auto assumptions_base = _u.steps( k );

    while ( true )
    {
        auto disjuncts = std::vector< sat::lit >{};
        for ( const auto& [ a, b ] : pending )
        {
            const auto& from = _vertices[ a ];
            const auto& to = _vertices[ b ];
            if ( from.k == vertex_spec::kind::property && to.k == vertex_spec::kind::final && k == 0 )
                continue;
            disjuncts.push_back( _u.enc().and_( _u.source( from, 0 ), _u.target( to, k ) ) );
        }
        if ( disjuncts.empty() )
            break;

        const auto guard = _u.solver().new_var();
        auto c = sat::clause{ ~guard };
        c.insert( c.end(), disjuncts.begin(), disjuncts.end() );
        _u.solver().add_clause( c );

        auto assumptions = assumptions_base;
        assumptions.push_back( guard );
        const auto r = _u.solve( assumptions );
        if ( r == sat::status::sat )
        {
            const auto w = _u.decode( std::max< std::size_t >( k, 1 ) );
            auto hit = std::vector< vertex_pair >{};
            for ( const auto& p : pending )
                if ( witnesses( _u.m(), w, _vertices[ p.first ], _vertices[ p.second ], k ) )
                    hit.push_back( p );
            if ( hit.empty() )
                throw error( "internal error: k-reach witness satisfies no pending pair" );
            for ( const auto& p : hit )
                pending.erase( p );
            found.insert( found.end(), hit.begin(), hit.end() );
        }
        // retire this disjunction
        _u.solver().add_clause( { ~guard } );
        if ( r != sat::status::sat )
            break;
    }
    std::sort( found.begin(), found.end() );
    return found;
}

// ---------------------------------------------------------------- paths

namespace
{

std::vector< std::size_t > offsets_of( const std::vector< std::size_t >& weights )
{
    auto out = std::vector< std::size_t >{ 0 };
    for ( const auto w : weights )
        out.push_back( out.back() + w );
    return out;
}

std::pair< std::size_t, std::size_t > widen( std::size_t lo, std::size_t hi, std::size_t n )
{
    while ( hi - lo + 1 < 3 && hi - lo + 1 < n )
    {
        if ( hi + 1 < n )
            ++hi;
        else
            --lo;
    }
    return { lo, hi };
}

path_result check( context& ctx, const std::vector< vertex_spec >& path, const std::vector< std::size_t >& weights,
                   bool with_assertions, bool top )
{
    if ( path.empty() || weights.size() + 1 != path.size() )
        throw error( "check_path: need one weight per consecutive vertex pair" );
    const auto offsets = offsets_of( weights );
    const auto total = offsets.back();
    // a property covered at the last offset needs one more step to execute
    auto frames = total;
    for ( std::size_t j = 0; j + 1 < path.size(); ++j )
        if ( path[ j ].k == vertex_spec::kind::property && offsets[ j ] >= total )
        {
            if ( path.back().k == vertex_spec::kind::final )
                throw error( "check_path: property '" + path[ j ].name + "' would be covered after the last step" );
            frames = total + 1;
        }

    auto u = unrolling{ ctx };
    u.extend( frames );
    auto& s = u.solver();

    auto tags = std::vector< sat::lit >{};
    auto vertex_tag = std::vector< sat::lit >{};
    auto edge_tag = std::vector< sat::lit >{ sat::lit{} };
    for ( std::size_t j = 0; j < path.size(); ++j )
    {
        // a trailing property is only reached, not covered
        const auto b = s.new_var();
        const auto last = j + 1 == path.size();
        s.add_clause( { ~b, last ? u.target( path[ j ], offsets[ j ] )
                                 : u.source( path[ j ], offsets[ j ], with_assertions ) } );
        vertex_tag.push_back( b );
        tags.push_back( b );
        if ( j == 0 )
            continue;
        const auto a = s.new_var();
        for ( auto t = offsets[ j - 1 ] + 1; t <= offsets[ j ]; ++t )
            s.add_clause( { ~a, u.step( t ) } );
        edge_tag.push_back( a );
        tags.push_back( a );
    }

    auto out = path_result{};
    if ( u.solve( tags ) == sat::status::sat )
    {
        const auto w = u.decode( frames );
        auto chain = test_chain{};
        chain.trace = w.states;
        chain.inputs.assign( w.inputs.begin(), w.inputs.begin() + static_cast< std::ptrdiff_t >( frames ) );
        for ( std::size_t j = 0; j + 1 < path.size(); ++j )
            if ( path[ j ].k == vertex_spec::kind::property )
                chain.covers.try_emplace( path[ j ].name, offsets[ j ] );
        out.result = path_result::outcome::feasible;
        out.chain = std::move( chain );
        return out;
    }

    // Map the core back to path positions: vertex j is position 2j, the edge
    // into vertex j is position 2j - 1.
    const auto before = s.stats().solves;
    const auto core = sat::shrink_core( s, s.core() );
    ctx.solver_calls += s.stats().solves - before;

    auto positions = std::vector< std::size_t >{};
    for ( const auto l : core )
    {
        for ( std::size_t j = 0; j < vertex_tag.size(); ++j )
            if ( vertex_tag[ j ] == l )
                positions.push_back( 2 * j );
        for ( std::size_t j = 1; j < edge_tag.size(); ++j )
            if ( edge_tag[ j ] == l )
                positions.push_back( 2 * j - 1 );
    }
    std::sort( positions.begin(), positions.end() );

    auto lo = std::size_t{ 0 };
    auto hi = path.size() - 1;
    if ( !positions.empty() )
    {
        lo = positions.front() / 2;
        hi = ( positions.back() + 1 ) / 2;

        // Prefer the leftmost contiguous region when it is infeasible alone.
        auto run_end = positions.front();
        for ( std::size_t i = 1; i < positions.size() && positions[ i ] <= run_end + 1; ++i )
            run_end = positions[ i ];
        if ( run_end != positions.back() )
        {
            const auto [ l, h ] = widen( positions.front() / 2, ( run_end + 1 ) / 2, path.size() );
            const auto sub_path = std::vector< vertex_spec >( path.begin() + static_cast< std::ptrdiff_t >( l ),
                                                             path.begin() + static_cast< std::ptrdiff_t >( h ) + 1 );
            const auto sub_weights = std::vector< std::size_t >( weights.begin() + static_cast< std::ptrdiff_t >( l ),
                                                                 weights.begin() + static_cast< std::ptrdiff_t >( h ) );
            if ( h - l + 1 < path.size() && check( ctx, sub_path, sub_weights, with_assertions, false ).result ==
                                   path_result::outcome::infeasible )
            {
                lo = l;
                hi = h;
            }
        }
    }
    std::tie( lo, hi ) = widen( lo, hi, path.size() );
    for ( auto j = lo; j <= hi; ++j )
        out.failed.push_back( j );
    out.result = path_result::outcome::infeasible;

    if ( top && with_assertions && path.front().k == vertex_spec::kind::initial )
    {
        auto relaxed = check( ctx, path, weights, false, false );
        if ( relaxed.result == path_result::outcome::feasible )
        {
            const auto& chain = *relaxed.chain;
            auto w = witness{ chain.trace, chain.inputs };
            for ( std::size_t j = 0; j + 1 < path.size(); ++j )
            {
                if ( path[ j ].k != vertex_spec::kind::property )
                    continue;
                const auto o = offsets[ j ];
                if ( !holds( path[ j ].assertion, chain.trace[ o ], chain.inputs[ o ], &chain.trace[ o + 1 ] ) )
                    out.violations.push_back( { path[ j ].name, o } );
            }
            out.result = path_result::outcome::assertion_violated;
            out.counterexample = std::move( w );
        }
    }
    return out;
}

} // namespace

path_result check_path( context& ctx, const std::vector< vertex_spec >& path, const std::vector< std::size_t >& weights,
                        bool check_assertions )
{
    return check( ctx, path, weights, check_assertions, true );
}

std::optional< witness > anchored_reach( context& ctx, const vertex_spec& from, const std::optional< state_vec >& sigma,
                                         const vertex_spec& to, std::size_t k, const std::vector< state_vec >& exclude )
{
    if ( from.k == vertex_spec::kind::property && to.k == vertex_spec::kind::final && k == 0 )
        return std::nullopt;

    auto u = unrolling{ ctx };
    auto a = u.steps( k );
    a.push_back( u.source( from, 0 ) );
    a.push_back( u.target( to, k ) );
    if ( sigma )
        a.push_back( u.state_is( 0, *sigma ) );
    for ( const auto& e : exclude )
        u.solver().add_clause( { ~u.state_is( k, e ) } );
    if ( u.solve( a ) != sat::status::sat )
        return std::nullopt;
    return u.decode( std::max( k, u.frames() - 1 ) );
}

bool singleton_trigger( context& ctx, const expr& trigger )
{
    auto u = unrolling{ ctx };
    const auto t = u.at( trigger, 0 );
    const auto one = std::vector< sat::lit >{ t };
    if ( u.solve( one ) != sat::status::sat )
        return false;
    const auto s = u.state( 0 );
    u.solver().add_clause( { ~u.state_is( 0, s ) } );
    return u.solve( one ) == sat::status::unsat;
}

std::optional< model > strengthen_invariant( const model& m, std::size_t limit )
{
    if ( m.state_space_size() > ( std::uint64_t{ 1 } << 22 ) || m.input_space_size() > ( std::uint64_t{ 1 } << 16 ) )
        return std::nullopt;
    const auto reach = reachable_states( m, states_satisfying( m, m.init_predicate() ), limit );
    if ( !reach )
        return std::nullopt;

    auto alternatives = std::vector< expr >{};
    for ( const auto& s : *reach )
    {
        auto parts = std::vector< expr >{};
        for ( std::size_t v = 0; v < s.values.size(); ++v )
        {
            const auto& dom = m.states()[ v ].dom;
            parts.push_back( expr::eq( expr::state_ref( v, dom ), expr::constant( dom, s[ v ] ) ) );
        }
        alternatives.push_back( expr::all_of( parts ) );
    }
    auto out = m;
    out.add_invariant( expr::any_of( alternatives ) );
    return out;
}

} // namespace chainforge::bmc
