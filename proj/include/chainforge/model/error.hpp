#pragma once

#include <stdexcept>
#include <string>

namespace chainforge
{

// Base of all errors raised by the library. Expected outcomes (no chain,
// unsat, uncovered property) are reported through result types instead.
class error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Ill-sorted expression, unknown name, or wrong operand kind.
class sort_error : public error
{
public:
    using error::error;
};

// Evaluation precondition failed (e.g. next-state value missing).
class semantic_error : public error
{
public:
    using error::error;
};

// The model contradicts its own annotations, e.g. a successor violating the
// declared state invariant.
class model_error : public error
{
public:
    using error::error;
};

class timeout_error : public error
{
public:
    timeout_error() : error( "time limit exceeded" ) {}
};

} // namespace chainforge
