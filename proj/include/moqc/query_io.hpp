#pragma once

#include "moqc/prism/prism.hpp"
#include "moqc/query_engine.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace moqc {

struct EvaluateSpec {
    /// Scheduler file, resolved against the query file's directory when relative.
    std::string scheduler_path;
};

struct OptimizeSpec {
    std::size_t objective = 0;
    Sense sense = Sense::Maximize;
};

struct QueryFile {
    std::vector<std::string> objectives;
    std::variant<ConvexQuerySpec, AchievabilitySpec, EvaluateSpec, OptimizeSpec> query;

    /// "convex", "achievability", "evaluate" or "optimize".
    std::string type() const;
};

/// Reads a query file. Bounds may be numbers, "inf" or "-inf", or a single string for
/// all coordinates. Throws SyntaxError on malformed JSON and InvalidArgument or
/// ShapeMismatch on bad contents.
QueryFile parse_query(std::string_view text);

/// Command-line overrides for epsilon (convex queries) and the iteration cap.
void apply_query_overrides(QueryFile& query, std::optional<double> epsilon, std::optional<std::size_t> max_iters);

nlohmann::json query_to_json(const QueryFile& query);
nlohmann::json config_to_json(const SolverConfig& config);

/// A built and preprocessed model. Not movable: the analysis keeps references into it.
struct PreparedModel {
    prism::BuildResult build;
    std::size_t reachable_states = 0;
    std::size_t num_mecs = 0;
    std::size_t mec_states = 0;
    std::unique_ptr<AnalysisModel> analysis;

    PreparedModel() = default;
    PreparedModel(const PreparedModel&) = delete;
    PreparedModel& operator=(const PreparedModel&) = delete;

    nlohmann::json summary() const;
};

/// Resolve, build, then preprocess: reachability, MECs and the finiteness check.
std::unique_ptr<PreparedModel> prepare_model(const prism::ModelSpec& spec, const prism::ConstantOverrides& overrides,
                                             const prism::ConstantOverrides& forced,
                                             const prism::BuildOptions& options);

struct QueryResult {
    std::string type;
    /// Optimal, Infeasible, IterationCapReached, Achievable, NotAchievable or Evaluated.
    std::string status;
    /// 0 for an answer, 2 for a negative answer (Infeasible, NotAchievable).
    int exit_code = 0;
    double value = 0.0;
    Vector point;
    double gap = 0.0;
    double lower_bound = 0.0;
    std::size_t iterations = 0;
    std::size_t oracle_calls = 0;
    bool decided = true;
    std::optional<AnyScheduler> scheduler;
    std::vector<TraceEntry> trace;
    double seconds = 0.0;
};

QueryResult run_query(const AnalysisModel& model, const QueryFile& query, const SolverConfig& config,
                      const std::filesystem::path& base_dir = {});

nlohmann::json result_to_json(const QueryResult& result);
nlohmann::json trace_to_json(const std::vector<TraceEntry>& trace);

/// 64-bit FNV-1a, printed in reports to identify the model source.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t value);

struct SensitivityRow {
    double level = 0.0;
    std::string parameter;
    int sign = 1;
    /// Empty when the run failed; `error` then says why.
    Vector values;
    double loss = 0.0;
    std::string status;
    std::string error;
};

/// For each level s and parameter p: rebuild with p * (1 +- s) clamped to
/// (1e-9, 1 - 1e-9) and rerun the query. Unknown parameters throw UnknownParameter
/// before any run; failures of individual runs are recorded in their rows. `forced`
/// replaces constants the model defines, as in prepare_model.
std::vector<SensitivityRow> sensitivity_run(const prism::ModelSpec& spec, const prism::ConstantOverrides& overrides,
                                            const prism::BuildOptions& options, const QueryFile& query,
                                            const std::vector<double>& levels,
                                            const std::vector<std::string>& parameters, const SolverConfig& config,
                                            const std::filesystem::path& base_dir = {},
                                            const prism::ConstantOverrides& forced = {});

/// Columns: level, parameter, sign, one per objective, loss, status.
std::string sensitivity_csv(const std::vector<SensitivityRow>& rows, const std::vector<std::string>& objectives);

} // namespace moqc
