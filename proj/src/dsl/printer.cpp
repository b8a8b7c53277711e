#include "chainforge/dsl/printer.hpp"

namespace chainforge::dsl
{

namespace
{

const char* symbol( op kind )
{
    switch ( kind )
    {
    case op::and_:
        return "&&";
    case op::or_:
        return "||";
    case op::implies:
        return "->";
    case op::eq:
        return "==";
    case op::ne:
        return "!=";
    case op::lt:
        return "<";
    case op::le:
        return "<=";
    case op::add:
        return "+";
    case op::sub:
        return "-";
    default:
        return "?";
    }
}

} // namespace

std::string print_expr( const model& m, const expr& e )
{
    const auto& a = e.args();
    switch ( e.kind() )
    {
    case op::constant:
        return e.sort().format( e.value() );
    case op::state_var:
        return m.states()[ e.var() ].name;
    case op::next_var:
        return "next(" + m.states()[ e.var() ].name + ")";
    case op::input_var:
        return m.inputs()[ e.var() ].name;
    case op::not_:
        return "!" + print_expr( m, a[ 0 ] );
    case op::ite:
        return "(" + print_expr( m, a[ 0 ] ) + " ? " + print_expr( m, a[ 1 ] ) + " : " + print_expr( m, a[ 2 ] ) + ")";
    default:
        return "(" + print_expr( m, a[ 0 ] ) + " " + symbol( e.kind() ) + " " + print_expr( m, a[ 1 ] ) + ")";
    }
}

std::string print_model( const model& m )
{
    auto out = "model " + m.name() + " {\n";
    for ( const auto& s : m.states() )
    {
        out += "  state " + s.name + " : " + s.dom.to_string();
        if ( s.init )
            out += " init " + s.dom.format( *s.init );
        out += ";\n";
    }
    for ( const auto& i : m.inputs() )
        out += "  input " + i.name + " : " + i.dom.to_string() + ";\n";
    for ( const auto& c : m.init_constraints() )
        out += "  init " + print_expr( m, c ) + ";\n";
    if ( !m.input_assumption().is_true() )
        out += "  assume " + print_expr( m, m.input_assumption() ) + ";\n";
    if ( !m.invariant().is_true() )
        out += "  invariant " + print_expr( m, m.invariant() ) + ";\n";

    auto trans = std::string{};
    for ( std::size_t v = 0; v < m.states().size(); ++v )
        if ( const auto& t = m.transition( v ) )
            trans += "    " + m.states()[ v ].name + "' = " + print_expr( m, *t ) + ";\n";
    if ( !trans.empty() )
        out += "  trans {\n" + trans + "  }\n";
    return out + "}\n";
}

std::string print_properties( const model& m, const std::vector< property >& props )
{
    auto out = std::string{};
    for ( const auto& p : props )
    {
        out += "property " + p.name + " {\n";
        out += "  assume " + print_expr( m, p.assumption ) + ";\n";
        out += "  assert " + print_expr( m, p.assertion ) + ";\n";
        out += "}\n";
    }
    return out;
}

} // namespace chainforge::dsl
