#include "chainforge/sat/solver.hpp"
#include "chainforge/model/error.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>

namespace chainforge::sat
{

namespace
{

// Internal literal: 2 * var + sign, variables from 0.
using ilit = std::uint32_t;
using cref = std::uint32_t;

constexpr ilit undef_lit = std::numeric_limits< ilit >::max();
constexpr cref no_reason = std::numeric_limits< cref >::max();

constexpr ilit to_ilit( lit l ) { return 2 * static_cast< ilit >( l.var() - 1 ) + ( l.negated() ? 1 : 0 ); }
constexpr lit to_lit( ilit x )
{
    const auto v = static_cast< int >( x >> 1 ) + 1;
    return lit{ ( x & 1 ) ? -v : v };
}
constexpr ilit neg( ilit x ) { return x ^ 1; }
constexpr std::size_t var_of( ilit x ) { return x >> 1; }

double luby( double y, int x )
{
    auto size = 1;
    auto seq = 0;
    while ( size < x + 1 )
    {
        ++seq;
        size = 2 * size + 1;
    }
    while ( size - 1 != x )
    {
        size = ( size - 1 ) >> 1;
        --seq;
        x = x % size;
    }
    auto r = 1.0;
    for ( auto i = 0; i < seq; ++i )
        r *= y;
    return r;
}

// Max-heap of variables ordered by activity.
class var_heap
{
    const std::vector< double >& _act;
    std::vector< std::size_t > _heap;
    std::vector< int > _pos; // -1 if absent

    bool less( std::size_t a, std::size_t b ) const { return _act[ a ] > _act[ b ]; }

    void up( std::size_t i )
    {
        const auto v = _heap[ i ];
        while ( i > 0 )
        {
            const auto parent = ( i - 1 ) / 2;
            if ( !less( v, _heap[ parent ] ) )
                break;
            _heap[ i ] = _heap[ parent ];
            _pos[ _heap[ i ] ] = static_cast< int >( i );
            i = parent;
        }
        _heap[ i ] = v;
        _pos[ v ] = static_cast< int >( i );
    }

    void down( std::size_t i )
    {
        const auto v = _heap[ i ];
        while ( true )
        {
            auto child = 2 * i + 1;
            if ( child >= _heap.size() )
                break;
            if ( child + 1 < _heap.size() && less( _heap[ child + 1 ], _heap[ child ] ) )
                ++child;
            if ( !less( _heap[ child ], v ) )
                break;
            _heap[ i ] = _heap[ child ];
            _pos[ _heap[ i ] ] = static_cast< int >( i );
            i = child;
        }
        _heap[ i ] = v;
        _pos[ v ] = static_cast< int >( i );
    }

public:
    explicit var_heap( const std::vector< double >& act ) : _act{ act } {}

    void grow( std::size_t n ) { _pos.resize( n, -1 ); }
    [[nodiscard]] bool empty() const { return _heap.empty(); }
    [[nodiscard]] bool contains( std::size_t v ) const { return _pos[ v ] >= 0; }

    void insert( std::size_t v )
    {
        if ( contains( v ) )
            return;
        _pos[ v ] = static_cast< int >( _heap.size() );
        _heap.push_back( v );
        up( _heap.size() - 1 );
    }

    void increased( std::size_t v )
    {
        if ( contains( v ) )
            up( static_cast< std::size_t >( _pos[ v ] ) );
    }

    std::size_t pop()
    {
        const auto top = _heap.front();
        _heap.front() = _heap.back();
        _pos[ _heap.front() ] = 0;
        _heap.pop_back();
        _pos[ top ] = -1;
        if ( !_heap.empty() )
            down( 0 );
        return top;
    }
};

class cdcl final : public solver
{
    struct clause_data
    {
        std::vector< ilit > lits;
        bool learnt = false;
        double activity = 0;
    };

    struct watcher
    {
        cref c;
        ilit blocker;
    };

    enum class outcome
    {
        sat,
        unsat,
        restart,
        interrupted
    };

    bool _ok = true;
    std::vector< clause_data > _db;
    std::vector< cref > _free;
    std::vector< cref > _learnts;
    std::vector< std::vector< watcher > > _watches; // indexed by the watched literal

    std::vector< std::int8_t > _assign; // per variable: 0 undef, 1 true, -1 false
    std::vector< int > _level;
    std::vector< cref > _reason;
    std::vector< bool > _phase;
    std::vector< char > _seen;
    std::vector< double > _activity;
    var_heap _heap{ _activity };

    std::vector< ilit > _trail;
    std::vector< std::size_t > _trail_lim;
    std::size_t _qhead = 0;

    double _var_inc = 1;
    double _clause_inc = 1;
    double _max_learnts = 0;

    std::vector< ilit > _assumptions;
    std::vector< std::int8_t > _model;
    std::vector< lit > _core;

    std::int64_t _budget = -1;
    std::uint64_t _call_conflicts = 0;
    std::optional< clock::time_point > _deadline;
    solver_stats _stats;

    [[nodiscard]] int value( ilit x ) const
    {
        const auto a = _assign[ var_of( x ) ];
        return ( x & 1 ) ? -a : a;
    }

    [[nodiscard]] int decision_level() const { return static_cast< int >( _trail_lim.size() ); }

    void ensure_var( int v )
    {
        while ( num_vars() < v )
            new_var();
    }

    void enqueue( ilit x, cref why )
    {
        const auto v = var_of( x );
        _assign[ v ] = ( x & 1 ) ? -1 : 1;
        _level[ v ] = decision_level();
        _reason[ v ] = why;
        _trail.push_back( x );
    }

    void cancel_until( int level )
    {
        if ( decision_level() <= level )
            return;
        for ( auto i = _trail.size(); i > _trail_lim[ static_cast< std::size_t >( level ) ]; --i )
        {
            const auto x = _trail[ i - 1 ];
            const auto v = var_of( x );
            _assign[ v ] = 0;
            _reason[ v ] = no_reason;
            _phase[ v ] = ( x & 1 ) == 0;
            _heap.insert( v );
        }
        _trail.resize( _trail_lim[ static_cast< std::size_t >( level ) ] );
        _trail_lim.resize( static_cast< std::size_t >( level ) );
        _qhead = _trail.size();
    }

    cref store( std::vector< ilit > lits, bool learnt )
    {
        auto c = cref{};
        if ( !_free.empty() )
        {
            c = _free.back();
            _free.pop_back();
            _db[ c ] = clause_data{ std::move( lits ), learnt, 0 };
        }
        else
        {
            c = static_cast< cref >( _db.size() );
            _db.push_back( clause_data{ std::move( lits ), learnt, 0 } );
        }
        const auto& l = _db[ c ].lits;
        _watches[ l[ 0 ] ].push_back( { c, l[ 1 ] } );
        _watches[ l[ 1 ] ].push_back( { c, l[ 0 ] } );
        return c;
    }

    void detach( cref c )
    {
        for ( const auto w : { _db[ c ].lits[ 0 ], _db[ c ].lits[ 1 ] } )
        {
            auto& ws = _watches[ w ];
            ws.erase( std::find_if( ws.begin(), ws.end(), [ & ]( const watcher& x ) { return x.c == c; } ) );
        }
        _db[ c ].lits.clear();
        _free.push_back( c );
    }

    cref propagate()
    {
        auto conflict = no_reason;
        while ( _qhead < _trail.size() )
        {
            const auto false_lit = neg( _trail[ _qhead++ ] );
            auto& ws = _watches[ false_lit ];
            ++_stats.propagations;

            std::size_t i = 0;
            std::size_t j = 0;
            while ( i < ws.size() )
            {
                const auto w = ws[ i++ ];
                if ( value( w.blocker ) == 1 )
                {
                    ws[ j++ ] = w;
                    continue;
                }

                auto& lits = _db[ w.c ].lits;
                if ( lits[ 0 ] == false_lit )
                    std::swap( lits[ 0 ], lits[ 1 ] );
                const auto first = lits[ 0 ];
                if ( first != w.blocker && value( first ) == 1 )
                {
                    ws[ j++ ] = { w.c, first };
                    continue;
                }

                auto moved = false;
                for ( std::size_t k = 2; k < lits.size(); ++k )
                {
                    if ( value( lits[ k ] ) != -1 )
                    {
                        std::swap( lits[ 1 ], lits[ k ] );
                        _watches[ lits[ 1 ] ].push_back( { w.c, first } );
                        moved = true;
                        break;
                    }
                }
                if ( moved )
                    continue;

                ws[ j++ ] = { w.c, first };
                if ( value( first ) == -1 )
                {
                    conflict = w.c;
                    _qhead = _trail.size();
                    while ( i < ws.size() )
                        ws[ j++ ] = ws[ i++ ];
                }
                else
                {
                    enqueue( first, w.c );
                }
            }
            ws.resize( j );
            if ( conflict != no_reason )
                break;
        }
        return conflict;
    }

    void bump_var( std::size_t v )
    {
        if ( ( _activity[ v ] += _var_inc ) > 1e100 )
        {
            for ( auto& a : _activity )
                a *= 1e-100;
            _var_inc *= 1e-100;
        }
        _heap.increased( v );
    }

    void bump_clause( clause_data& c )
    {
        if ( ( c.activity += _clause_inc ) > 1e20 )
        {
            for ( const auto l : _learnts )
                _db[ l ].activity *= 1e-20;
            _clause_inc *= 1e-20;
        }
    }

    // First-UIP conflict analysis with basic clause minimisation.
    std::pair< std::vector< ilit >, int > analyze( cref conflict )
    {
        auto out = std::vector< ilit >{ undef_lit };
        auto pending = 0;
        auto p = undef_lit;
        auto index = _trail.size();

        do
        {
            auto& c = _db[ conflict ];
            if ( c.learnt )
                bump_clause( c );
            for ( std::size_t k = ( p == undef_lit ? 0 : 1 ); k < c.lits.size(); ++k )
            {
                const auto q = c.lits[ k ];
                const auto v = var_of( q );
                if ( _seen[ v ] || _level[ v ] == 0 )
                    continue;
                bump_var( v );
                _seen[ v ] = 1;
                if ( _level[ v ] >= decision_level() )
                    ++pending;
                else
                    out.push_back( q );
            }
            while ( !_seen[ var_of( _trail[ --index ] ) ] )
            {
            }
            p = _trail[ index ];
            conflict = _reason[ var_of( p ) ];
            _seen[ var_of( p ) ] = 0;
            --pending;
        } while ( pending > 0 );
        out[ 0 ] = neg( p );

        // Drop literals implied by the rest of the clause.
        auto kept = std::vector< ilit >{ out[ 0 ] };
        for ( std::size_t k = 1; k < out.size(); ++k )
        {
            const auto r = _reason[ var_of( out[ k ] ) ];
            auto needed = r == no_reason;
            if ( !needed )
                for ( std::size_t m = 1; m < _db[ r ].lits.size(); ++m )
                {
                    const auto v = var_of( _db[ r ].lits[ m ] );
                    if ( !_seen[ v ] && _level[ v ] > 0 )
                    {
                        needed = true;
                        break;
                    }
                }
            if ( needed )
                kept.push_back( out[ k ] );
        }
        for ( const auto x : out )
            _seen[ var_of( x ) ] = 0;

        auto back = 0;
        if ( kept.size() > 1 )
        {
            auto best = std::size_t{ 1 };
            for ( std::size_t k = 2; k < kept.size(); ++k )
                if ( _level[ var_of( kept[ k ] ) ] > _level[ var_of( kept[ best ] ) ] )
                    best = k;
            std::swap( kept[ 1 ], kept[ best ] );
            back = _level[ var_of( kept[ 1 ] ) ];
        }
        return { std::move( kept ), back };
    }

    // The assumptions responsible for `p` (an assumption found false).
    void analyze_final( ilit p )
    {
        _core.clear();
        _core.push_back( to_lit( p ) );
        if ( decision_level() == 0 )
            return;
        _seen[ var_of( p ) ] = 1;
        for ( auto i = _trail.size(); i > _trail_lim[ 0 ]; --i )
        {
            const auto x = _trail[ i - 1 ];
            const auto v = var_of( x );
            if ( !_seen[ v ] )
                continue;
            if ( _reason[ v ] == no_reason )
            {
                _core.push_back( to_lit( x ) );
            }
            else
            {
                const auto& lits = _db[ _reason[ v ] ].lits;
                for ( std::size_t k = 1; k < lits.size(); ++k )
                    if ( _level[ var_of( lits[ k ] ) ] > 0 )
                        _seen[ var_of( lits[ k ] ) ] = 1;
            }
            _seen[ v ] = 0;
        }
        _seen[ var_of( p ) ] = 0;
    }

    void reduce_db()
    {
        std::sort( _learnts.begin(), _learnts.end(),
                   [ & ]( cref a, cref b ) { return _db[ a ].activity < _db[ b ].activity; } );
        const auto limit = _clause_inc / static_cast< double >( _learnts.size() );
        auto kept = std::vector< cref >{};
        for ( std::size_t i = 0; i < _learnts.size(); ++i )
        {
            const auto c = _learnts[ i ];
            const auto& d = _db[ c ];
            const auto locked = _reason[ var_of( d.lits[ 0 ] ) ] == c && value( d.lits[ 0 ] ) == 1;
            if ( d.lits.size() > 2 && !locked && ( i < _learnts.size() / 2 || d.activity < limit ) )
                detach( c );
            else
                kept.push_back( c );
        }
        _learnts = std::move( kept );
    }

    [[nodiscard]] bool out_of_time() const
    {
        if ( _budget >= 0 && _call_conflicts >= static_cast< std::uint64_t >( _budget ) )
            return true;
        return _deadline && clock::now() > *_deadline;
    }

    outcome search( std::int64_t max_conflicts )
    {
        auto conflicts = std::int64_t{ 0 };
        while ( true )
        {
            const auto conflict = propagate();
            if ( conflict != no_reason )
            {
                ++_stats.conflicts;
                ++_call_conflicts;
                ++conflicts;
                if ( decision_level() == 0 )
                    return outcome::unsat;

                auto [ learnt, back ] = analyze( conflict );
                cancel_until( back );
                if ( learnt.size() == 1 )
                {
                    enqueue( learnt[ 0 ], no_reason );
                }
                else
                {
                    const auto first = learnt[ 0 ];
                    const auto c = store( std::move( learnt ), true );
                    _learnts.push_back( c );
                    bump_clause( _db[ c ] );
                    enqueue( first, c );
                }
                _var_inc /= 0.95;
                _clause_inc /= 0.999;
                if ( ( _call_conflicts & 63 ) == 0 && out_of_time() )
                    return outcome::interrupted;
                continue;
            }

            if ( conflicts >= max_conflicts )
            {
                cancel_until( 0 );
                return out_of_time() ? outcome::interrupted : outcome::restart;
            }
            if ( static_cast< double >( _learnts.size() ) - static_cast< double >( _trail.size() ) >= _max_learnts )
                reduce_db();

            auto next = undef_lit;
            while ( static_cast< std::size_t >( decision_level() ) < _assumptions.size() )
            {
                const auto p = _assumptions[ static_cast< std::size_t >( decision_level() ) ];
                if ( value( p ) == 1 )
                {
                    _trail_lim.push_back( _trail.size() );
                }
                else if ( value( p ) == -1 )
                {
                    analyze_final( p );
                    return outcome::unsat;
                }
                else
                {
                    next = p;
                    break;
                }
            }

            if ( next == undef_lit )
            {
                ++_stats.decisions;
                while ( !_heap.empty() )
                {
                    const auto v = _heap.pop();
                    if ( _assign[ v ] == 0 )
                    {
                        next = static_cast< ilit >( 2 * v + ( _phase[ v ] ? 0 : 1 ) );
                        break;
                    }
                }
                if ( next == undef_lit )
                    return outcome::sat;
            }
            _trail_lim.push_back( _trail.size() );
            enqueue( next, no_reason );
        }
    }

public:
    using clause_sink::add_clause;
    using solver::solve;

    lit new_var() override
    {
        const auto v = _assign.size();
        _assign.push_back( 0 );
        _level.push_back( 0 );
        _reason.push_back( no_reason );
        _phase.push_back( false );
        _seen.push_back( 0 );
        _activity.push_back( 0 );
        _watches.emplace_back();
        _watches.emplace_back();
        _heap.grow( v + 1 );
        _heap.insert( v );
        return lit{ static_cast< int >( v ) + 1 };
    }

    [[nodiscard]] int num_vars() const override { return static_cast< int >( _assign.size() ); }

    void add_clause( std::span< const lit > c ) override
    {
        if ( !_ok )
            return;
        cancel_until( 0 );

        auto lits = std::vector< ilit >{};
        for ( const auto l : c )
        {
            if ( !l.valid() )
                throw error( "literal 0 in clause" );
            ensure_var( l.var() );
            lits.push_back( to_ilit( l ) );
        }
        std::sort( lits.begin(), lits.end() );
        lits.erase( std::unique( lits.begin(), lits.end() ), lits.end() );

        auto kept = std::vector< ilit >{};
        for ( std::size_t i = 0; i < lits.size(); ++i )
        {
            if ( value( lits[ i ] ) == 1 || ( i + 1 < lits.size() && lits[ i + 1 ] == neg( lits[ i ] ) ) )
                return; // satisfied or tautology
            if ( value( lits[ i ] ) == 0 )
                kept.push_back( lits[ i ] );
        }

        if ( kept.empty() )
        {
            _ok = false;
        }
        else if ( kept.size() == 1 )
        {
            enqueue( kept[ 0 ], no_reason );
            _ok = propagate() == no_reason;
        }
        else
        {
            store( std::move( kept ), false );
        }
    }

    status solve( std::span< const lit > assumptions ) override
    {
        ++_stats.solves;
        _model.clear();
        _core.clear();
        if ( !_ok )
            return status::unsat;

        _assumptions.clear();
        for ( const auto a : assumptions )
        {
            ensure_var( a.var() );
            _assumptions.push_back( to_ilit( a ) );
        }

        _call_conflicts = 0;
        _max_learnts = std::max( 1000.0, static_cast< double >( _db.size() - _free.size() ) / 3 );
        auto result = outcome::restart;
        for ( auto round = 0; result == outcome::restart; ++round )
        {
            result = search( static_cast< std::int64_t >( luby( 2, round ) * 100 ) );
            _max_learnts *= 1.05;
        }

        if ( result == outcome::sat )
        {
            _model = _assign;
        }
        else if ( result == outcome::unsat && _core.empty() && decision_level() == 0 )
        {
            _ok = false;
        }
        cancel_until( 0 );

        switch ( result )
        {
        case outcome::sat:
            return status::sat;
        case outcome::unsat:
            return status::unsat;
        default:
            return status::unknown;
        }
    }

    [[nodiscard]] bool value( lit l ) const override
    {
        const auto v = static_cast< std::size_t >( l.var() - 1 );
        const auto t = v < _model.size() && _model[ v ] == 1;
        return l.negated() ? !t : t;
    }

    [[nodiscard]] const std::vector< lit >& core() const override { return _core; }

    void set_conflict_budget( std::int64_t conflicts ) override { _budget = conflicts; }
    void set_deadline( std::optional< clock::time_point > deadline ) override { _deadline = deadline; }
    [[nodiscard]] const solver_stats& stats() const override { return _stats; }
    [[nodiscard]] std::string name() const override { return "cdcl"; }
};

} // namespace

std::unique_ptr< solver > make_cdcl_solver()
{
    return std::make_unique< cdcl >();
}

} // namespace chainforge::sat
