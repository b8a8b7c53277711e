#pragma once

#include "chainforge/sat/cnf.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace chainforge::sat
{

enum class status
{
    sat,
    unsat,
    unknown // conflict budget or deadline reached
};

struct solver_stats
{
    std::uint64_t solves = 0;
    std::uint64_t conflicts = 0;
    std::uint64_t decisions = 0;
    std::uint64_t propagations = 0;
};

// Incremental SAT solver with assumptions. Clauses may be added between
// calls to solve().
class solver : public clause_sink
{
public:
    using clock = std::chrono::steady_clock;

    virtual status solve( std::span< const lit > assumptions = {} ) = 0;
    status solve( std::initializer_list< lit > assumptions )
    {
        return solve( std::span< const lit >( assumptions.begin(), assumptions.size() ) );
    }

    // After sat: value of a literal in the model.
    [[nodiscard]] virtual bool value( lit l ) const = 0;
    // After unsat: a subset of the assumptions that is unsatisfiable with the
    // clauses (empty if the clauses alone are).
    [[nodiscard]] virtual const std::vector< lit >& core() const = 0;

    // Negative budget means unlimited.
    virtual void set_conflict_budget( std::int64_t conflicts ) = 0;
    virtual void set_deadline( std::optional< clock::time_point > deadline ) = 0;

    [[nodiscard]] virtual const solver_stats& stats() const = 0;
    [[nodiscard]] virtual std::string name() const = 0;
};

// Embedded CDCL solver: two watched literals, first-UIP learning, VSIDS,
// phase saving, Luby restarts, learnt clause reduction.
[[nodiscard]] std::unique_ptr< solver > make_cdcl_solver();

// Runs `path FILE.cnf` on each call and reads a standard competition answer
// (`s SATISFIABLE` / `v ...` lines, or exit code 10/20). Cores are computed by
// deletion over the assumptions.
[[nodiscard]] std::unique_ptr< solver > make_external_solver( std::filesystem::path path );

// The default backend: CDCL, or the external one when the environment
// variable CHAINFORGE_SOLVER is `external:<path>`.
[[nodiscard]] std::unique_ptr< solver > make_solver();

// Deletion-based core shrinking, at most `2 * core.size()` solver calls.
// Returns a core that is still unsatisfiable with the solver's clauses.
[[nodiscard]] std::vector< lit > shrink_core( solver& s, std::vector< lit > core );

} // namespace chainforge::sat
