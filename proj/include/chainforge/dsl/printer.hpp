#pragma once

#include "chainforge/model/model.hpp"

#include <string>
#include <vector>

namespace chainforge::dsl
{

// Printing is fully parenthesised, so parsing the output yields the same
// expression trees.
[[nodiscard]] std::string print_expr( const model& m, const expr& e );
[[nodiscard]] std::string print_model( const model& m );
[[nodiscard]] std::string print_properties( const model& m, const std::vector< property >& props );

} // namespace chainforge::dsl
