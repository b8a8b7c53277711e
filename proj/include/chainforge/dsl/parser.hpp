#pragma once

#include "chainforge/dsl/diagnostic.hpp"
#include "chainforge/model/model.hpp"

#include <filesystem>
#include <string_view>

namespace chainforge::dsl
{

// Concrete syntax:
//
//   model NAME {
//     state a, b : DOMAIN [init VALUE];
//     input x, y : DOMAIN;
//     init EXPR;        // over state
//     assume EXPR;      // over inputs
//     invariant EXPR;   // over state
//     trans { a' = EXPR; ... }
//   }
//
//   property NAME { assume EXPR; assert EXPR; }
//
// DOMAIN is `bool`, `lo..hi` or `{A, B, ...}`. Expressions use C precedence
// for `?: || && == != < <= > >= + - !` plus right-associative `->` (binding
// between `?:` and `||`). `next(v)` is the post-state value of v and is only
// allowed in assertions. Comments run from `//` to the end of the line.
//
// Enum constants are resolved against the sort of the other operand of `==`,
// `!=` or `?:`, or against the assignment target; otherwise the name must
// belong to exactly one enum domain of the model.

[[nodiscard]] parsed< model > parse_model( std::string_view text, const std::string& file = "<model>" );

// Warns about properties whose trigger is empty under the state invariant,
// when the model is small enough to check by enumeration.
[[nodiscard]] parsed< std::vector< property > > parse_properties( std::string_view text, const model& m,
                                                                  const std::string& file = "<properties>" );

// Boolean expression over state variables only, e.g. for I and F.
[[nodiscard]] parsed< expr > parse_state_set( std::string_view text, const model& m,
                                              const std::string& file = "<state set>" );

// File helpers; throw load_error with the formatted diagnostics.
[[nodiscard]] model load_model( const std::filesystem::path& path );
[[nodiscard]] std::vector< property > load_properties( const std::filesystem::path& path, const model& m );

} // namespace chainforge::dsl
