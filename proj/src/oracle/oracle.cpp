#include "chainforge/oracle/oracle.hpp"
#include "chainforge/model/error.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <random>

namespace chainforge::oracle
{

state_graph::state_graph( const model& m, std::size_t state_limit ) : _m{ &m }
{
    if ( m.state_space_size() > state_limit )
        throw error( "state space too large for explicit exploration" );
    _states = states_satisfying( m, expr::boolean( true ) );
    std::sort( _states.begin(), _states.end() );
    _inputs = valid_inputs( m );
    _succ.assign( _states.size() * _inputs.size(), blocked );
    for ( std::size_t s = 0; s < _states.size(); ++s )
        for ( std::size_t i = 0; i < _inputs.size(); ++i )
            if ( const auto n = try_step( m, _states[ s ], _inputs[ i ] ) )
                _succ[ s * _inputs.size() + i ] = static_cast< std::uint32_t >( *index_of( *n ) );
}

std::optional< std::size_t > state_graph::index_of( const state_vec& s ) const
{
    const auto it = std::lower_bound( _states.begin(), _states.end(), s );
    if ( it == _states.end() || *it != s )
        return std::nullopt;
    return static_cast< std::size_t >( it - _states.begin() );
}

oracle_answer min_chain( const model& m, const std::vector< property >& props, const expr& initial, const expr& final,
                         std::size_t node_limit )
{
    auto out = oracle_answer{};
    if ( props.size() >= 31 || m.state_space_size() > node_limit ||
         m.state_space_size() << props.size() > node_limit )
        return out;
    const auto g = state_graph{ m, node_limit };
    const auto masks = std::size_t{ 1 } << props.size();
    const auto full = masks - 1;
    if ( g.size() * masks > node_limit )
        return out;

    const auto ni = g.inputs().size();
    auto cover = std::vector< std::uint32_t >( g.size() * ni, 0 );
    auto in_final = std::vector< bool >( g.size(), false );
    for ( std::size_t s = 0; s < g.size(); ++s )
    {
        in_final[ s ] = holds( final, g.states()[ s ], input_vec{ std::vector< value_t >( m.inputs().size(), 0 ) } );
        for ( std::size_t i = 0; i < ni; ++i )
        {
            const auto n = g.succ( s, i );
            if ( n == state_graph::blocked )
                continue;
            for ( std::size_t p = 0; p < props.size(); ++p )
                if ( holds( props[ p ].assumption, g.states()[ s ], g.inputs()[ i ] ) &&
                     holds( props[ p ].assertion, g.states()[ s ], g.inputs()[ i ], &g.states()[ n ] ) )
                    cover[ s * ni + i ] |= 1u << p;
        }
    }

    constexpr auto none = ~std::uint32_t{ 0 };
    auto parent = std::vector< std::uint32_t >( g.size() * masks, none );
    auto via = std::vector< std::uint32_t >( g.size() * masks, 0 );
    auto queue = std::deque< std::uint32_t >{};
    for ( const auto& s : states_satisfying( m, initial ) )
    {
        const auto node = static_cast< std::uint32_t >( *g.index_of( s ) * masks );
        parent[ node ] = node;
        queue.push_back( node );
    }

    while ( !queue.empty() )
    {
        const auto node = queue.front();
        queue.pop_front();
        const auto s = node / masks;
        const auto mask = node % masks;
        if ( mask == full && in_final[ s ] )
        {
            auto rev = std::vector< input_vec >{};
            for ( auto at = node; parent[ at ] != at; at = parent[ at ] )
                rev.push_back( g.inputs()[ via[ at ] ] );
            out.inputs.assign( rev.rbegin(), rev.rend() );
            out.length = out.inputs.size();
            out.result = oracle_answer::outcome::found;
            return out;
        }
        for ( std::size_t i = 0; i < ni; ++i )
        {
            const auto n = g.succ( s, i );
            if ( n == state_graph::blocked )
                continue;
            const auto next = static_cast< std::uint32_t >( n * masks + ( mask | cover[ s * ni + i ] ) );
            if ( parent[ next ] != none )
                continue;
            parent[ next ] = node;
            via[ next ] = static_cast< std::uint32_t >( i );
            queue.push_back( next );
        }
    }
    out.result = oracle_answer::outcome::none;
    return out;
}

std::optional< std::size_t > diameter( const model& m, std::size_t state_limit )
{
    if ( m.state_space_size() > state_limit )
        return std::nullopt;
    const auto g = state_graph{ m, state_limit };
    auto best = std::size_t{ 0 };
    auto dist = std::vector< std::size_t >( g.size() );
    for ( std::size_t src = 0; src < g.size(); ++src )
    {
        std::fill( dist.begin(), dist.end(), SIZE_MAX );
        dist[ src ] = 0;
        auto queue = std::deque< std::size_t >{ src };
        while ( !queue.empty() )
        {
            const auto s = queue.front();
            queue.pop_front();
            best = std::max( best, dist[ s ] );
            for ( std::size_t i = 0; i < g.inputs().size(); ++i )
            {
                const auto n = g.succ( s, i );
                if ( n != state_graph::blocked && dist[ n ] == SIZE_MAX )
                {
                    dist[ n ] = dist[ s ] + 1;
                    queue.push_back( n );
                }
            }
        }
    }
    return best;
}

random_instance random_model( std::uint64_t seed, const random_params& params )
{
    if ( params.state_bits < 1 || params.state_bits > 6 || params.inputs < 2 || params.min_props > params.max_props )
        throw error( "bad random model parameters" );
    auto rng = std::mt19937_64{ seed };
    const auto n = value_t{ 1 } << params.state_bits;
    const auto ni = static_cast< value_t >( params.inputs );
    auto pick = [ & ]( value_t hi ) { return std::uniform_int_distribution< value_t >( 0, hi - 1 )( rng ); };

    auto m = model{ "random" + std::to_string( seed ) };
    const auto xd = domain::integer( 0, n - 1 );
    const auto id = domain::integer( 0, ni - 1 );
    m.add_state( "x", xd, 0 );
    m.add_input( "in", id );
    const auto x = m.state( "x" );
    const auto in = m.input( "in" );
    const auto num = []( value_t v ) { return expr::integer( v ); };

    auto table = std::vector< std::vector< value_t > >( static_cast< std::size_t >( n ) );
    for ( value_t s = 0; s < n; ++s )
        for ( value_t i = 0; i < ni; ++i )
            table[ static_cast< std::size_t >( s ) ].push_back( i == 0 && params.strongly_connected ? ( s + 1 ) % n
                                                                                                 : pick( n ) );

    auto trans = expr{};
    for ( auto s = n; s-- > 0; )
    {
        const auto& row = table[ static_cast< std::size_t >( s ) ];
        auto e = num( row[ 0 ] );
        for ( auto i = ni; i-- > 1; )
            e = expr::ite( expr::eq( in, num( i ) ), num( row[ static_cast< std::size_t >( i ) ] ), e );
        trans = s + 1 == n ? e : expr::ite( expr::eq( x, num( s ) ), e, trans );
    }
    m.set_transition( 0, trans );

    auto out = random_instance{ m, {}, expr::eq( x, num( 0 ) ), expr::eq( x, num( pick( n ) ) ) };
    const auto count = params.min_props + static_cast< std::size_t >( pick(
                                                  static_cast< value_t >( params.max_props - params.min_props + 1 ) ) );
    for ( std::size_t p = 0; p < count; ++p )
    {
        auto trigger = expr{};
        auto assertion = expr::boolean( true );
        const auto c = pick( n );
        if ( params.singleton_triggers )
            trigger = expr::eq( x, num( c ) );
        else
        {
            auto alts = std::vector< expr >{ expr::eq( x, num( c ) ) };
            for ( auto extra = 1 + pick( 2 ); extra-- > 0; )
                alts.push_back( expr::eq( x, num( pick( n ) ) ) );
            trigger = expr::any_of( alts );
        }
        if ( pick( 2 ) == 0 )
        {
            const auto i = pick( ni );
            trigger = expr::and_( trigger, expr::eq( in, num( i ) ) );
            if ( params.singleton_triggers )
                assertion = expr::eq( m.next( "x" ),
                                      num( table[ static_cast< std::size_t >( c ) ][ static_cast< std::size_t >( i ) ] ) );
        }
        out.props.push_back( { "p" + std::to_string( p + 1 ), trigger, assertion } );
    }
    return out;
}

baseline_result random_baseline( const model& m, const std::vector< property >& props, const expr& initial,
                                 const expr& final, std::size_t budget, std::uint64_t seed, std::size_t walk_length )
{
    auto out = baseline_result{};
    const auto g = state_graph{ m, std::size_t{ 1 } << 20 };
    const auto ni = g.inputs().size();
    auto starts = std::vector< std::size_t >{};
    for ( const auto& s : states_satisfying( m, initial ) )
        starts.push_back( *g.index_of( s ) );
    if ( props.empty() )
    {
        out.coverage = 1;
        return out;
    }
    if ( starts.empty() || walk_length == 0 )
        return out;

    auto in_final = std::vector< bool >( g.size() );
    for ( std::size_t s = 0; s < g.size(); ++s )
        in_final[ s ] = holds( final, g.states()[ s ], g.inputs().front() );

    struct test
    {
        std::vector< input_vec > inputs;
        std::uint32_t covers;
    };
    auto tests = std::vector< test >{};
    auto rng = std::mt19937_64{ seed };
    while ( out.steps_used < budget )
    {
        auto s = starts[ std::uniform_int_distribution< std::size_t >( 0, starts.size() - 1 )( rng ) ];
        auto walk = std::vector< input_vec >{};
        auto mask = std::uint32_t{ 0 };
        auto best = test{ {}, 0 };
        const auto length = std::min( walk_length, budget - out.steps_used );
        for ( std::size_t t = 0; t < length; ++t )
        {
            auto options = std::vector< std::size_t >{};
            for ( std::size_t i = 0; i < ni; ++i )
                if ( g.succ( s, i ) != state_graph::blocked )
                    options.push_back( i );
            if ( options.empty() )
                break;
            const auto i = options[ std::uniform_int_distribution< std::size_t >( 0, options.size() - 1 )( rng ) ];
            const auto n = g.succ( s, i );
            for ( std::size_t p = 0; p < props.size(); ++p )
                if ( holds( props[ p ].assumption, g.states()[ s ], g.inputs()[ i ] ) &&
                     holds( props[ p ].assertion, g.states()[ s ], g.inputs()[ i ], &g.states()[ n ] ) )
                    mask |= 1u << p;
            walk.push_back( g.inputs()[ i ] );
            ++out.steps_used;
            s = n;
            if ( in_final[ s ] && mask != best.covers )
                best = test{ walk, mask };
        }
        if ( best.covers )
            tests.push_back( std::move( best ) );
        if ( walk.empty() )
            break;
    }

    // greedy weighted set cover: most new properties per step
    auto covered = std::uint32_t{ 0 };
    auto used = std::vector< bool >( tests.size(), false );
    while ( true )
    {
        auto pick = tests.size();
        for ( std::size_t k = 0; k < tests.size(); ++k )
        {
            if ( used[ k ] )
                continue;
            const auto gain = std::popcount( tests[ k ].covers & ~covered );
            if ( gain == 0 )
                continue;
            if ( pick == tests.size() )
            {
                pick = k;
                continue;
            }
            const auto best_gain = std::popcount( tests[ pick ].covers & ~covered );
            // gain per step, compared without division
            const auto lhs = static_cast< std::uint64_t >( gain ) * std::max< std::size_t >( 1, tests[ pick ].inputs.size() );
            const auto rhs = static_cast< std::uint64_t >( best_gain ) * std::max< std::size_t >( 1, tests[ k ].inputs.size() );
            if ( lhs > rhs )
                pick = k;
        }
        if ( pick == tests.size() )
            break;
        used[ pick ] = true;
        covered |= tests[ pick ].covers;
        out.suite.push_back( tests[ pick ].inputs );
        out.total_length += tests[ pick ].inputs.size();
    }
    for ( const auto& t : tests )
        out.generated.push_back( t.inputs );
    out.covered = static_cast< std::size_t >( std::popcount( covered ) );
    out.coverage = static_cast< double >( out.covered ) / static_cast< double >( props.size() );
    return out;
}

} // namespace chainforge::oracle
