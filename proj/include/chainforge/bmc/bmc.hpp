#pragma once

#include "chainforge/model/interpreter.hpp"
#include "chainforge/sat/encoder.hpp"

#include <chrono>
#include <memory>
#include <optional>
#include <set>

namespace chainforge::bmc
{

// Resource limits shared by all queries of one run. Exhausting them raises
// timeout_error.
struct limits
{
    std::optional< std::chrono::steady_clock::time_point > deadline;
    std::int64_t conflict_budget = -1; // per solver call; negative is unlimited
};

struct context
{
    const model& m;
    limits lim;
    std::uint64_t solver_calls = 0;

    [[nodiscard]] std::unique_ptr< sat::solver > new_solver() const;
    // Counts the call and turns `unknown` into timeout_error.
    sat::status solve( sat::solver& s, std::span< const sat::lit > assumptions );
    void check_deadline() const;
};

// A vertex of the abstraction as seen by concretisation: the initial set,
// a property trigger, or the final set.
struct vertex_spec
{
    enum class kind
    {
        initial,
        property,
        final
    };

    kind k;
    std::string name;
    expr trigger;   // state predicate for initial/final, assumption for properties
    expr assertion; // properties only

    [[nodiscard]] static vertex_spec initial( const expr& states ) { return { kind::initial, "I", states, expr{} }; }
    [[nodiscard]] static vertex_spec final( const expr& states ) { return { kind::final, "F", states, expr{} }; }
    [[nodiscard]] static vertex_spec of( const property& p ) { return { kind::property, p.name, p.assumption, p.assertion }; }
};

// Execution fragment: states[0..n] and inputs[0..n]; the last input is the
// one at which a target trigger holds.
struct witness
{
    std::vector< state_vec > states;
    std::vector< input_vec > inputs;
};

// Transition relation unrolled over frames 0..n in one incremental solver.
// Step j (frame j-1 to j) is active only under its activation literal; the
// input assumption and state invariant hold on every frame.
class unrolling
{
    context& _ctx;
    std::unique_ptr< sat::solver > _solver;
    sat::encoder _enc;
    std::vector< sat::frame > _frames;
    std::vector< sat::frame > _with_next; // frame j with next = frame j+1
    std::vector< sat::lit > _act;         // _act[j] activates step j (index 0 unused)

public:
    explicit unrolling( context& ctx );

    [[nodiscard]] context& ctx() { return _ctx; }
    [[nodiscard]] const model& m() const { return _ctx.m; }
    [[nodiscard]] sat::solver& solver() { return *_solver; }
    [[nodiscard]] sat::encoder& enc() { return _enc; }

    // Makes frames 0..n exist.
    void extend( std::size_t n );
    [[nodiscard]] std::size_t frames() const { return _frames.size(); }

    [[nodiscard]] sat::lit step( std::size_t j );
    // Expression over (s_k, i_k), plus s_{k+1} for next() references.
    [[nodiscard]] sat::lit at( const expr& e, std::size_t k );
    [[nodiscard]] sat::lit state_is( std::size_t k, const state_vec& s );
    [[nodiscard]] sat::lit input_is( std::size_t k, const input_vec& i );

    // Source constraint of a vertex at frame k. For properties this includes
    // the assertion on the covering step and activates it.
    [[nodiscard]] sat::lit source( const vertex_spec& v, std::size_t k, bool with_assertion = true );
    // Target constraint of a vertex at frame k.
    [[nodiscard]] sat::lit target( const vertex_spec& v, std::size_t k );

    [[nodiscard]] state_vec state( std::size_t k ) const;
    [[nodiscard]] input_vec input( std::size_t k ) const;
    [[nodiscard]] witness decode( std::size_t n ) const;

    sat::status solve( std::span< const sat::lit > assumptions ) { return _ctx.solve( *_solver, assumptions ); }
    // Assumptions activating steps 1..n.
    [[nodiscard]] std::vector< sat::lit > steps( std::size_t n );
};

// Is there an execution of exactly k steps from a `from` state to a `to`
// state? Both predicates range over state and input of their frame.
[[nodiscard]] std::optional< witness > reach_check( context& ctx, const expr& from, const expr& to, std::size_t k );

// Ordered pair of vertex indices.
using vertex_pair = std::pair< std::size_t, std::size_t >;

// Incremental enumeration of weight-k edges:
// one solver is reused across growing k, and each satisfying trace removes
// every pending pair it witnesses.
class kreach
{
    unrolling _u;
    std::vector< vertex_spec > _vertices;

public:
    kreach( context& ctx, std::vector< vertex_spec > vertices );

    // Removes from `pending` and returns the pairs with a k-step connection.
    // Callers increase k one by one so the returned weights are minimal.
    [[nodiscard]] std::vector< vertex_pair > edges( std::set< vertex_pair >& pending, std::size_t k );

    [[nodiscard]] const std::vector< vertex_spec >& vertices() const { return _vertices; }
};

// Does (v, v') hold of a decoded trace between step 0 and step k? Checks the
// source's assertion on the covering step with the interpreter.
[[nodiscard]] bool witnesses( const model& m, const witness& w, const vertex_spec& from, const vertex_spec& to,
                              std::size_t k );

struct path_result
{
    enum class outcome
    {
        feasible,
        infeasible,
        assertion_violated // feasible only when assertions are ignored: a bug in the model
    };

    outcome result = outcome::infeasible;
    std::optional< test_chain > chain;      // feasible: the concrete chain
    std::vector< std::size_t > failed;      // infeasible: contiguous vertex indices, at least 3 when possible
    std::vector< property_violation > violations; // assertion_violated
    std::optional< witness > counterexample;      // assertion_violated
};

// Concretises a vertex path with per-edge step counts: vertex j is pinned at
// offset w_1 + ... + w_j. Set `check_assertions` to false to drop the
// properties' assertions from the formula.
[[nodiscard]] path_result check_path( context& ctx, const std::vector< vertex_spec >& path,
                                      const std::vector< std::size_t >& weights, bool check_assertions = true );

// Concrete chaining step for repair: an execution of exactly k steps that
// covers `from` at step 0 (starting in `sigma` when given) and reaches `to` at
// step k, avoiding end states in `exclude`.
[[nodiscard]] std::optional< witness > anchored_reach( context& ctx, const vertex_spec& from,
                                                       const std::optional< state_vec >& sigma,
                                                       const vertex_spec& to, std::size_t k,
                                                       const std::vector< state_vec >& exclude = {} );

// True when the trigger's state projection (under the invariant) is a single
// state.
[[nodiscard]] bool singleton_trigger( context& ctx, const expr& trigger );

// Copy of the model whose invariant is additionally restricted to the states
// reachable from the initial states; nullopt if more than `limit` states.
[[nodiscard]] std::optional< model > strengthen_invariant( const model& m, std::size_t limit );

} // namespace chainforge::bmc
