#pragma once

#include "chainforge/engine/engine.hpp"
#include "chainforge/model/interpreter.hpp"

#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace chainforge::cli
{

namespace exit_code
{
inline constexpr int ok = 0;
inline constexpr int other = 1;
inline constexpr int no_chain = 2;
inline constexpr int parse = 3;
inline constexpr int timeout = 4;
} // namespace exit_code

enum class format
{
    text,
    json,
    dot
};

// Model, properties and the two state sets of one generation run.
struct problem
{
    model m;
    std::vector< property > props;
    expr initial;
    expr final;
};

// I defaults to the model's init predicate and F to I. Throws dsl::load_error.
[[nodiscard]] problem load_problem( const std::filesystem::path& model_file, const std::filesystem::path& props_file,
                                    const std::string& init = {}, const std::string& final = {} );

[[nodiscard]] int exit_code_of( const engine::chain_result& r );

// Report schema, version 1:
//   { "schema": 1, "model": str, "status": str, "failure": null | {"kind", "reason"},
//     "summary": {"tcs", "len"}, "time_ms": num,
//     "chains": [ { "path": [str], "weights": [int], "length": int,
//                   "steps": [ {"step", "input": {var: val}, "state": {var: val}} ],
//                   "covers": {prop: step} } ],
//     "statistics": {...}, "violations": [ {"property", "step"} ] }
// Values are JSON booleans, integers, or enum names. Steps and covers come
// from replaying the chain, so a replay of the same inputs reproduces them.
[[nodiscard]] nlohmann::ordered_json to_json( const problem& p, const engine::chain_result& r,
                                              std::optional< double > time_ms = std::nullopt );
[[nodiscard]] std::string to_text( const problem& p, const engine::chain_result& r, double time_ms );
[[nodiscard]] std::string to_dot( const engine::chain_result& r );

// Input sequences of every chain in a report.
[[nodiscard]] std::vector< std::vector< input_vec > > inputs_of( const model& m, const nlohmann::ordered_json& report );

// Replays each chain of a report from its recorded initial state; same chain
// layout as to_json, without the abstract path. "ok" needs every chain to
// keep all assertions and end in F, and the chains together to cover every
// property.
[[nodiscard]] nlohmann::ordered_json replay_json( const problem& p, const nlohmann::ordered_json& report );

struct bench_row
{
    std::string name;
    std::string status;
    std::size_t tcs = 0;
    std::size_t len = 0;
    double time_ms = 0;
    std::optional< std::size_t > oracle_len;
    double random_coverage = 0;
    std::size_t random_len = 0;
    std::vector< std::string > problems; // violated expectations or errors
};

// Each `NAME.json` in the directory names a model, a property file and the
// expectations; see bench/README.md.
[[nodiscard]] std::vector< bench_row > run_bench( const std::filesystem::path& dir, const engine::config& cfg,
                                                  std::optional< double > timeout_s );
[[nodiscard]] std::string bench_table( const std::vector< bench_row >& rows );

// Whole command line, streams injected for tests.
int run( int argc, const char* const* argv, std::ostream& out, std::ostream& err );

} // namespace chainforge::cli
