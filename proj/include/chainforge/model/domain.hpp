#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace chainforge
{

// All values are carried as integers: booleans as 0/1, integers as
// themselves and enum constants as their index in the domain.
using value_t = std::int64_t;

enum class domain_kind
{
    boolean,
    integer,
    enumeration
};

// A finite, nonempty value domain.
class domain
{
    domain_kind _kind = domain_kind::boolean;
    value_t _lo = 0;
    value_t _hi = 1;
    std::vector< std::string > _names;

    domain( domain_kind kind, value_t lo, value_t hi, std::vector< std::string > names );

public:
    domain() = default;

    [[nodiscard]] static domain boolean();
    // Throws sort_error when lo > hi.
    [[nodiscard]] static domain integer( value_t lo, value_t hi );
    // Throws sort_error on an empty list or duplicate names.
    [[nodiscard]] static domain enumeration( std::vector< std::string > names );

    [[nodiscard]] domain_kind kind() const { return _kind; }
    [[nodiscard]] bool is_bool() const { return _kind == domain_kind::boolean; }
    [[nodiscard]] bool is_int() const { return _kind == domain_kind::integer; }
    [[nodiscard]] bool is_enum() const { return _kind == domain_kind::enumeration; }

    // Smallest and largest carried value.
    [[nodiscard]] value_t lo() const { return _lo; }
    [[nodiscard]] value_t hi() const { return _hi; }
    [[nodiscard]] std::uint64_t size() const { return static_cast< std::uint64_t >( _hi - _lo ) + 1; }
    [[nodiscard]] bool contains( value_t v ) const { return v >= _lo && v <= _hi; }

    [[nodiscard]] const std::vector< std::string >& names() const { return _names; }
    [[nodiscard]] std::optional< value_t > lookup( const std::string& name ) const;

    [[nodiscard]] std::string format( value_t v ) const;
    // DSL spelling: `bool`, `lo..hi` or `{A,B}`.
    [[nodiscard]] std::string to_string() const;

    // Two domains are interchangeable when they carry the same values; enum
    // domains compare structurally by constant list.
    friend bool operator==( const domain&, const domain& ) = default;
};

// Smallest interval domain containing both integer domains.
[[nodiscard]] domain hull( const domain& a, const domain& b );

} // namespace chainforge
