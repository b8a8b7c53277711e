#pragma once

#include "chainforge/model/error.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace chainforge::dsl
{

struct source_span
{
    std::string file;
    std::size_t line = 1;
    std::size_t column = 1;     // 1-based, inclusive
    std::size_t end_column = 1; // exclusive, on the same line
    std::size_t offset = 0;     // byte offset of the first character
};

enum class severity
{
    error,
    warning
};

struct diagnostic
{
    severity level = severity::error;
    std::string message;
    source_span span;

    // `file:line:col: error: message`
    [[nodiscard]] std::string format() const;
};

template < typename T >
struct parsed
{
    std::optional< T > value; // empty iff there is at least one error
    std::vector< diagnostic > diagnostics;

    [[nodiscard]] bool ok() const { return value.has_value(); }
};

[[nodiscard]] std::string format_all( const std::vector< diagnostic >& diags );

// Thrown by the file-loading helpers; carries the diagnostics that caused it.
class load_error : public error
{
    std::vector< diagnostic > _diagnostics;

public:
    explicit load_error( std::vector< diagnostic > diags )
        : error( format_all( diags ) ), _diagnostics{ std::move( diags ) }
    {
    }
    load_error( const std::string& message ) : error( message ) {}

    [[nodiscard]] const std::vector< diagnostic >& diagnostics() const { return _diagnostics; }
};

} // namespace chainforge::dsl
