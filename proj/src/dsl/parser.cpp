#include "chainforge/dsl/parser.hpp"
#include "chainforge/model/interpreter.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace chainforge::dsl
{

std::string diagnostic::format() const
{
    auto out = span.file + ":" + std::to_string( span.line ) + ":" + std::to_string( span.column ) + ": ";
    out += level == severity::error ? "error: " : "warning: ";
    return out + message;
}

std::string format_all( const std::vector< diagnostic >& diags )
{
    auto out = std::string{};
    for ( const auto& d : diags )
    {
        if ( !out.empty() )
            out += "\n";
        out += d.format();
    }
    return out;
}

namespace
{

// ---------------------------------------------------------------- lexing

enum class tok
{
    ident,
    number,
    punct,
    end
};

struct token
{
    tok kind;
    std::string text;
    source_span span;
};

struct syntax_error
{
    diagnostic diag;
};

[[noreturn]] void fail( const source_span& span, std::string message )
{
    throw syntax_error{ { severity::error, std::move( message ), span } };
}

std::vector< token > lex( std::string_view text, const std::string& file )
{
    static const char* const two_char[] = { "..", "==", "!=", "<=", ">=", "&&", "||", "->" };
    static const std::string_view one_char = "{}();,:'?=<>!+-";

    auto out = std::vector< token >{};
    auto line = std::size_t{ 1 };
    auto line_start = std::size_t{ 0 };
    auto pos = std::size_t{ 0 };

    const auto span_at = [ & ]( std::size_t begin, std::size_t end ) {
        return source_span{ file, line, begin - line_start + 1, end - line_start + 1, begin };
    };

    while ( pos < text.size() )
    {
        const auto c = text[ pos ];
        if ( c == '\n' )
        {
            ++pos;
            ++line;
            line_start = pos;
            continue;
        }
        if ( std::isspace( static_cast< unsigned char >( c ) ) )
        {
            ++pos;
            continue;
        }
        if ( c == '/' && pos + 1 < text.size() && text[ pos + 1 ] == '/' )
        {
            while ( pos < text.size() && text[ pos ] != '\n' )
                ++pos;
            continue;
        }

        const auto begin = pos;
        if ( std::isalpha( static_cast< unsigned char >( c ) ) || c == '_' )
        {
            while ( pos < text.size() &&
                    ( std::isalnum( static_cast< unsigned char >( text[ pos ] ) ) || text[ pos ] == '_' ) )
                ++pos;
            out.push_back( { tok::ident, std::string{ text.substr( begin, pos - begin ) }, span_at( begin, pos ) } );
            continue;
        }
        if ( std::isdigit( static_cast< unsigned char >( c ) ) )
        {
            while ( pos < text.size() && std::isdigit( static_cast< unsigned char >( text[ pos ] ) ) )
                ++pos;
            out.push_back( { tok::number, std::string{ text.substr( begin, pos - begin ) }, span_at( begin, pos ) } );
            continue;
        }

        auto matched = false;
        for ( const auto* p : two_char )
        {
            if ( text.substr( pos, 2 ) == p )
            {
                pos += 2;
                out.push_back( { tok::punct, p, span_at( begin, pos ) } );
                matched = true;
                break;
            }
        }
        if ( matched )
            continue;
        if ( one_char.find( c ) != std::string_view::npos )
        {
            ++pos;
            out.push_back( { tok::punct, std::string( 1, c ), span_at( begin, pos ) } );
            continue;
        }
        fail( span_at( begin, begin + 1 ), std::string{ "unexpected character '" } + c + "'" );
    }
    out.push_back( { tok::end, "", span_at( pos, pos ) } );
    return out;
}

// ---------------------------------------------------------------- syntax

struct node
{
    enum class kind
    {
        ident,
        number,
        boolean,
        next,
        unary,
        binary,
        ternary
    };

    kind k;
    std::string text; // identifier, operator or literal spelling
    value_t num = 0;
    std::vector< node > kids;
    source_span span;
};

source_span merge( const source_span& a, const source_span& b )
{
    auto out = a;
    if ( a.line == b.line && b.end_column > a.column )
        out.end_column = b.end_column;
    return out;
}

class parser
{
    std::vector< token > _toks;
    std::size_t _pos = 0;

public:
    explicit parser( std::vector< token > toks ) : _toks{ std::move( toks ) } {}

    [[nodiscard]] const token& peek( std::size_t ahead = 0 ) const
    {
        return _toks[ std::min( _pos + ahead, _toks.size() - 1 ) ];
    }
    [[nodiscard]] bool at_end() const { return peek().kind == tok::end; }

    [[nodiscard]] bool is( const std::string& text ) const
    {
        const auto& t = peek();
        return ( t.kind == tok::punct || t.kind == tok::ident ) && t.text == text;
    }

    const token& advance() { return _toks[ std::min( _pos++, _toks.size() - 1 ) ]; }

    bool accept( const std::string& text )
    {
        if ( !is( text ) )
            return false;
        ++_pos;
        return true;
    }

    const token& expect( const std::string& text )
    {
        if ( !is( text ) )
            fail( peek().span, "expected '" + text + "', found " + describe( peek() ) );
        return _toks[ _pos++ ];
    }

    const token& expect_ident( const char* what )
    {
        if ( peek().kind != tok::ident )
            fail( peek().span, std::string{ "expected " } + what + ", found " + describe( peek() ) );
        return _toks[ _pos++ ];
    }

    static std::string describe( const token& t )
    {
        if ( t.kind == tok::end )
            return "end of input";
        return "'" + t.text + "'";
    }

    value_t number( const token& t, bool negative )
    {
        auto v = std::uint64_t{ 0 };
        for ( const auto c : t.text )
        {
            v = v * 10 + static_cast< std::uint64_t >( c - '0' );
            if ( v > static_cast< std::uint64_t >( std::numeric_limits< std::int32_t >::max() ) )
                fail( t.span, "integer literal " + t.text + " is too large" );
        }
        return negative ? -static_cast< value_t >( v ) : static_cast< value_t >( v );
    }

    // expr := ternary
    node expression() { return ternary(); }

private:
    node ternary()
    {
        auto c = implication();
        if ( !is( "?" ) )
            return c;
        ++_pos;
        auto t = ternary();
        expect( ":" );
        auto e = ternary();
        auto span = merge( c.span, e.span );
        return node{ node::kind::ternary, "?:", 0, { std::move( c ), std::move( t ), std::move( e ) }, span };
    }

    node implication()
    {
        auto lhs = binary_level( 0 );
        if ( !is( "->" ) )
            return lhs;
        ++_pos;
        auto rhs = implication();
        auto span = merge( lhs.span, rhs.span );
        return node{ node::kind::binary, "->", 0, { std::move( lhs ), std::move( rhs ) }, span };
    }

    node binary_level( int level )
    {
        static const std::vector< std::vector< std::string > > levels = {
            { "||" }, { "&&" }, { "==", "!=" }, { "<", "<=", ">", ">=" }, { "+", "-" } };
        if ( level == static_cast< int >( levels.size() ) )
            return unary();

        auto lhs = binary_level( level + 1 );
        while ( true )
        {
            const auto& ops = levels[ level ];
            const auto it = std::find_if( ops.begin(), ops.end(), [ & ]( const std::string& o ) { return is( o ); } );
            if ( it == ops.end() || peek().kind != tok::punct )
                return lhs;
            ++_pos;
            auto rhs = binary_level( level + 1 );
            auto span = merge( lhs.span, rhs.span );
            lhs = node{ node::kind::binary, *it, 0, { std::move( lhs ), std::move( rhs ) }, span };
        }
    }

    node unary()
    {
        if ( is( "!" ) || is( "-" ) )
        {
            const auto op_tok = _toks[ _pos++ ];
            if ( op_tok.text == "-" && peek().kind == tok::number )
            {
                const auto& t = _toks[ _pos++ ];
                return node{ node::kind::number, "-" + t.text, number( t, true ), {}, merge( op_tok.span, t.span ) };
            }
            auto arg = unary();
            auto span = merge( op_tok.span, arg.span );
            return node{ node::kind::unary, op_tok.text, 0, { std::move( arg ) }, span };
        }
        return primary();
    }

    node primary()
    {
        const auto& t = peek();
        if ( t.kind == tok::number )
        {
            ++_pos;
            return node{ node::kind::number, t.text, number( t, false ), {}, t.span };
        }
        if ( t.kind == tok::ident )
        {
            ++_pos;
            if ( t.text == "true" || t.text == "false" )
                return node{ node::kind::boolean, t.text, t.text == "true" ? 1 : 0, {}, t.span };
            if ( t.text == "next" && is( "(" ) )
            {
                ++_pos;
                const auto& var = expect_ident( "a state variable" );
                const auto& close = expect( ")" );
                return node{ node::kind::next, var.text, 0, {}, merge( t.span, close.span ) };
            }
            return node{ node::kind::ident, t.text, 0, {}, t.span };
        }
        if ( is( "(" ) )
        {
            ++_pos;
            auto inner = expression();
            expect( ")" );
            return inner;
        }
        fail( t.span, "expected an expression, found " + describe( t ) );
    }
};

// ---------------------------------------------------------------- sorts

struct scope
{
    bool state = true;
    bool inputs = true;
    bool next = false;
    const char* where = "an expression";
};

class resolver
{
    const model& _m;
    scope _scope;

    [[noreturn]] static void error( const node& n, const std::string& message ) { fail( n.span, message ); }

    [[nodiscard]] bool names_variable( const std::string& name ) const
    {
        return _m.find_state( name ).has_value() || _m.find_input( name ).has_value();
    }

    // An identifier that will be resolved as an enum constant.
    [[nodiscard]] bool bare_constant( const node& n ) const
    {
        return n.k == node::kind::ident && !names_variable( n.text );
    }

    expr enum_constant( const node& n, const std::optional< domain >& hint ) const
    {
        if ( hint && hint->is_enum() )
            if ( const auto v = hint->lookup( n.text ) )
                return expr::constant( *hint, *v );

        auto found = std::vector< domain >{};
        const auto consider = [ & ]( const domain& d ) {
            if ( d.is_enum() && d.lookup( n.text ) &&
                 std::find( found.begin(), found.end(), d ) == found.end() )
                found.push_back( d );
        };
        for ( const auto& s : _m.states() )
            consider( s.dom );
        for ( const auto& i : _m.inputs() )
            consider( i.dom );

        if ( found.empty() )
            error( n, "unknown name '" + n.text + "'" );
        if ( found.size() > 1 )
            error( n, "ambiguous enum constant '" + n.text + "'" );
        return expr::constant( found.front(), *found.front().lookup( n.text ) );
    }

    expr build( const node& n, const std::function< expr() >& f ) const
    {
        try
        {
            return f();
        }
        catch ( const sort_error& e )
        {
            error( n, e.what() );
        }
    }

public:
    resolver( const model& m, scope sc ) : _m{ m }, _scope{ sc } {}

    expr resolve( const node& n, const std::optional< domain >& hint = std::nullopt ) const
    {
        switch ( n.k )
        {
        case node::kind::number:
            return expr::integer( n.num );
        case node::kind::boolean:
            return expr::boolean( n.num != 0 );
        case node::kind::ident:
        {
            if ( const auto s = _m.find_state( n.text ) )
            {
                if ( !_scope.state )
                    error( n, "state variable '" + n.text + "' cannot appear in " + _scope.where );
                return expr::state_ref( *s, _m.states()[ *s ].dom );
            }
            if ( const auto i = _m.find_input( n.text ) )
            {
                if ( !_scope.inputs )
                    error( n, "input variable '" + n.text + "' cannot appear in " + _scope.where );
                return expr::input_ref( *i, _m.inputs()[ *i ].dom );
            }
            return enum_constant( n, hint );
        }
        case node::kind::next:
        {
            if ( !_scope.next )
                error( n, std::string{ "next() cannot appear in " } + _scope.where );
            const auto s = _m.find_state( n.text );
            if ( !s )
                error( n, "next() expects a state variable, got '" + n.text + "'" );
            return expr::next_ref( *s, _m.states()[ *s ].dom );
        }
        case node::kind::unary:
        {
            const auto arg = resolve( n.kids[ 0 ] );
            if ( n.text == "!" )
                return build( n, [ & ] { return expr::not_( arg ); } );
            return build( n, [ & ] { return expr::sub( expr::integer( 0 ), arg ); } );
        }
        case node::kind::binary:
            return binary( n );
        case node::kind::ternary:
        {
            const auto c = resolve( n.kids[ 0 ] );
            auto t = expr{};
            auto e = expr{};
            if ( bare_constant( n.kids[ 1 ] ) && !bare_constant( n.kids[ 2 ] ) )
            {
                e = resolve( n.kids[ 2 ], hint );
                t = resolve( n.kids[ 1 ], e.sort() );
            }
            else
            {
                t = resolve( n.kids[ 1 ], hint );
                e = resolve( n.kids[ 2 ], hint ? hint : std::optional< domain >{ t.sort() } );
            }
            return build( n, [ & ] { return expr::ite( c, t, e ); } );
        }
        }
        error( n, "malformed expression" );
    }

private:
    expr binary( const node& n ) const
    {
        const auto& op = n.text;
        auto a = expr{};
        auto b = expr{};
        if ( op == "==" || op == "!=" )
        {
            if ( bare_constant( n.kids[ 0 ] ) && !bare_constant( n.kids[ 1 ] ) )
            {
                b = resolve( n.kids[ 1 ] );
                a = resolve( n.kids[ 0 ], b.sort() );
            }
            else
            {
                a = resolve( n.kids[ 0 ] );
                b = resolve( n.kids[ 1 ], a.sort() );
            }
        }
        else
        {
            a = resolve( n.kids[ 0 ] );
            b = resolve( n.kids[ 1 ] );
        }

        return build( n, [ & ] {
            if ( op == "&&" )
                return expr::and_( a, b );
            if ( op == "||" )
                return expr::or_( a, b );
            if ( op == "->" )
                return expr::implies( a, b );
            if ( op == "==" )
                return expr::eq( a, b );
            if ( op == "!=" )
                return expr::ne( a, b );
            if ( op == "<" )
                return expr::lt( a, b );
            if ( op == "<=" )
                return expr::le( a, b );
            if ( op == ">" )
                return expr::lt( b, a );
            if ( op == ">=" )
                return expr::le( b, a );
            if ( op == "+" )
                return expr::add( a, b );
            return expr::sub( a, b );
        } );
    }
};

expr resolve_bool( const model& m, const node& n, scope sc )
{
    auto e = resolver{ m, sc }.resolve( n );
    if ( !e.sort().is_bool() )
        fail( n.span, std::string{ "expected a boolean expression in " } + sc.where + ", got " + e.sort().to_string() );
    return e;
}

// Small models are checked by enumeration; larger ones are left to the
// engine.
constexpr std::uint64_t enumeration_limit = 1u << 20;

bool small( const model& m )
{
    const auto s = m.state_space_size();
    const auto i = m.input_space_size();
    return s <= enumeration_limit && i <= enumeration_limit && s * i <= enumeration_limit;
}

// ---------------------------------------------------------------- models

struct declaration
{
    bool is_state;
    std::vector< token > names;
    domain dom;
    std::optional< node > init;
};

struct statement
{
    std::string keyword; // init, assume, invariant
    node body;
};

struct assignment
{
    token target;
    node body;
};

domain parse_domain( parser& p )
{
    const auto start = p.peek().span;
    if ( p.accept( "bool" ) )
        return domain::boolean();
    if ( p.accept( "{" ) )
    {
        auto names = std::vector< std::string >{};
        do
            names.push_back( p.expect_ident( "an enum constant" ).text );
        while ( p.accept( "," ) );
        const auto& close = p.expect( "}" );
        try
        {
            return domain::enumeration( std::move( names ) );
        }
        catch ( const sort_error& e )
        {
            fail( merge( start, close.span ), e.what() );
        }
    }

    const auto bound = [ & ] {
        const auto negative = p.accept( "-" );
        if ( p.peek().kind != tok::number )
            fail( p.peek().span, "expected a domain (bool, lo..hi or {A, B}), found " + parser::describe( p.peek() ) );
        const auto t = p.advance();
        return std::pair{ p.number( t, negative ), t.span };
    };
    const auto [ lo, lo_span ] = bound();
    p.expect( ".." );
    const auto [ hi, hi_span ] = bound();
    try
    {
        return domain::integer( lo, hi );
    }
    catch ( const sort_error& e )
    {
        fail( merge( start, hi_span ), e.what() );
    }
}

template < typename F >
void guarded( std::vector< diagnostic >& diags, F&& f )
{
    try
    {
        f();
    }
    catch ( const syntax_error& e )
    {
        diags.push_back( e.diag );
    }
}

} // namespace

parsed< model > parse_model( std::string_view text, const std::string& file )
{
    auto result = parsed< model >{};
    auto& diags = result.diagnostics;

    auto name = token{};
    auto decls = std::vector< declaration >{};
    auto stmts = std::vector< statement >{};
    auto assigns = std::vector< assignment >{};

    try
    {
        auto p = parser{ lex( text, file ) };
        p.expect( "model" );
        name = p.expect_ident( "a model name" );
        p.expect( "{" );
        while ( !p.accept( "}" ) )
        {
            if ( p.is( "state" ) || p.is( "input" ) )
            {
                auto d = declaration{};
                d.is_state = p.peek().text == "state";
                p.expect( p.peek().text );
                do
                    d.names.push_back( p.expect_ident( "a variable name" ) );
                while ( p.accept( "," ) );
                p.expect( ":" );
                d.dom = parse_domain( p );
                if ( d.is_state && p.accept( "init" ) )
                    d.init = p.expression();
                p.expect( ";" );
                decls.push_back( std::move( d ) );
            }
            else if ( p.is( "init" ) || p.is( "assume" ) || p.is( "invariant" ) )
            {
                const auto keyword = p.peek().text;
                p.expect( keyword );
                stmts.push_back( { keyword, p.expression() } );
                p.expect( ";" );
            }
            else if ( p.accept( "trans" ) )
            {
                p.expect( "{" );
                while ( !p.accept( "}" ) )
                {
                    auto target = p.expect_ident( "a state variable" );
                    p.expect( "'" );
                    p.expect( "=" );
                    assigns.push_back( { std::move( target ), p.expression() } );
                    p.expect( ";" );
                }
            }
            else
            {
                fail( p.peek().span, "expected a declaration, found " + parser::describe( p.peek() ) );
            }
        }
        if ( !p.at_end() )
            fail( p.peek().span, "unexpected " + parser::describe( p.peek() ) + " after the model" );
    }
    catch ( const syntax_error& e )
    {
        diags.push_back( e.diag );
        return result;
    }

    auto m = model{ name.text };
    for ( const auto& d : decls )
    {
        for ( const auto& n : d.names )
        {
            guarded( diags, [ & ] {
                auto init = std::optional< value_t >{};
                if ( d.init )
                {
                    const auto v = resolver{ m, scope{ false, false, false, "an init value" } }.resolve( *d.init, d.dom );
                    if ( v.kind() != op::constant )
                        fail( d.init->span, "init value must be a constant" );
                    if ( v.sort().kind() != d.dom.kind() || !d.dom.contains( v.value() ) ||
                         v.sort().names() != d.dom.names() )
                        fail( d.init->span, "init value of '" + n.text + "' is not in " + d.dom.to_string() );
                    init = v.value();
                }
                try
                {
                    if ( d.is_state )
                        m.add_state( n.text, d.dom, init );
                    else
                        m.add_input( n.text, d.dom );
                }
                catch ( const sort_error& e )
                {
                    fail( n.span, e.what() );
                }
            } );
        }
    }

    for ( const auto& s : stmts )
    {
        guarded( diags, [ & ] {
            if ( s.keyword == "assume" )
                m.add_input_assumption( resolve_bool( m, s.body, { false, true, false, "an input assumption" } ) );
            else if ( s.keyword == "invariant" )
                m.add_invariant( resolve_bool( m, s.body, { true, false, false, "a state invariant" } ) );
            else
                m.add_init_constraint( resolve_bool( m, s.body, { true, false, false, "an init constraint" } ) );
        } );
    }

    for ( const auto& a : assigns )
    {
        guarded( diags, [ & ] {
            const auto v = m.find_state( a.target.text );
            if ( !v )
                fail( a.target.span, "'" + a.target.text + "' is not a state variable" );
            const auto& dom = m.states()[ *v ].dom;
            const auto e = resolver{ m, scope{ true, true, false, "a transition" } }.resolve( a.body, dom );
            try
            {
                m.set_transition( *v, e );
            }
            catch ( const sort_error& err )
            {
                fail( a.body.span, err.what() );
            }
        } );
    }

    if ( diags.empty() && small( m ) && states_satisfying( m, m.init_predicate() ).empty() )
        diags.push_back( { severity::error, "no initial state satisfies the state invariant", name.span } );

    if ( diags.empty() )
        result.value = std::move( m );
    return result;
}

parsed< std::vector< property > > parse_properties( std::string_view text, const model& m, const std::string& file )
{
    auto result = parsed< std::vector< property > >{};
    auto& diags = result.diagnostics;
    auto props = std::vector< property >{};
    auto spans = std::vector< source_span >{};

    try
    {
        auto p = parser{ lex( text, file ) };
        while ( !p.at_end() )
        {
            p.expect( "property" );
            const auto name = p.expect_ident( "a property name" );
            auto prop = property{ name.text, expr{}, expr{} };
            auto seen = std::set< std::string >{};
            p.expect( "{" );
            while ( !p.accept( "}" ) )
            {
                const auto kw = p.peek();
                if ( !p.is( "assume" ) && !p.is( "assert" ) )
                    fail( kw.span, "expected 'assume' or 'assert', found " + parser::describe( kw ) );
                p.expect( kw.text );
                const auto body = p.expression();
                p.expect( ";" );
                if ( !seen.insert( kw.text ).second )
                {
                    diags.push_back( { severity::error, "duplicate '" + kw.text + "' in property " + name.text, kw.span } );
                    continue;
                }
                guarded( diags, [ & ] {
                    if ( kw.text == "assume" )
                        prop.assumption = resolve_bool( m, body, { true, true, false, "a property assumption" } );
                    else
                        prop.assertion = resolve_bool( m, body, { true, true, true, "a property assertion" } );
                } );
            }
            if ( std::any_of( props.begin(), props.end(), [ & ]( const property& q ) { return q.name == name.text; } ) )
                diags.push_back( { severity::error, "duplicate property '" + name.text + "'", name.span } );
            props.push_back( std::move( prop ) );
            spans.push_back( name.span );
        }
    }
    catch ( const syntax_error& e )
    {
        diags.push_back( e.diag );
        return result;
    }

    if ( diags.empty() && small( m ) )
    {
        const auto states = states_satisfying( m, expr{} );
        const auto inputs = valid_inputs( m );
        for ( std::size_t k = 0; k < props.size(); ++k )
        {
            auto found = false;
            for ( const auto& s : states )
            {
                for ( const auto& i : inputs )
                    if ( ( found = holds( props[ k ].assumption, s, i ) ) )
                        break;
                if ( found )
                    break;
            }
            if ( !found )
                diags.push_back( { severity::warning,
                                   "trigger of '" + props[ k ].name + "' is empty under the state invariant",
                                   spans[ k ] } );
        }
    }

    if ( std::none_of( diags.begin(), diags.end(), []( const diagnostic& d ) { return d.level == severity::error; } ) )
        result.value = std::move( props );
    return result;
}

parsed< expr > parse_state_set( std::string_view text, const model& m, const std::string& file )
{
    auto result = parsed< expr >{};
    try
    {
        auto p = parser{ lex( text, file ) };
        const auto body = p.expression();
        if ( !p.at_end() )
            fail( p.peek().span, "unexpected " + parser::describe( p.peek() ) );
        result.value = resolve_bool( m, body, { true, false, false, "a state set" } );
    }
    catch ( const syntax_error& e )
    {
        result.diagnostics.push_back( e.diag );
    }
    return result;
}

namespace
{

std::string read_file( const std::filesystem::path& path )
{
    auto in = std::ifstream{ path, std::ios::binary };
    if ( !in )
        throw load_error( "cannot open " + path.string() );
    auto ss = std::ostringstream{};
    ss << in.rdbuf();
    return ss.str();
}

template < typename T >
T unwrap( parsed< T >&& p )
{
    if ( !p.ok() )
        throw load_error( std::move( p.diagnostics ) );
    return std::move( *p.value );
}

} // namespace

model load_model( const std::filesystem::path& path )
{
    return unwrap( parse_model( read_file( path ), path.string() ) );
}

std::vector< property > load_properties( const std::filesystem::path& path, const model& m )
{
    return unwrap( parse_properties( read_file( path ), m, path.string() ) );
}

} // namespace chainforge::dsl
