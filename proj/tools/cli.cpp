#include "cli.hpp"

#include "moqc/error.hpp"
#include "moqc/prism/prism.hpp"
#include "moqc/query_io.hpp"
#include "moqc/ta/automaton.hpp"
#include "moqc/ta/conversion.hpp"
#include "moqc/ta/estimation.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace moqc::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct RunConfig {
    std::string command;
    std::string model;
    std::string query;
    std::vector<std::string> constants;
    /// Replace constants the model already defines.
    std::vector<std::string> forced;
    bool fix_deadlocks = false;
    std::optional<std::size_t> workers;
    std::optional<double> value_tol;
    std::optional<double> epsilon;
    std::optional<std::size_t> max_iters;
    std::string out;
    std::string scheduler_out;
    std::string trace_out;
    // convert-ta
    std::string ta;
    std::string params;
    std::string counts;
    double alpha = 0.0;
    std::string report;
    // sensitivity
    std::vector<double> levels;
    std::vector<std::string> parameters;
};

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
    out << text;
    if (!out) throw Error(ErrorKind::IoError, "write to '" + path + "' failed");
}

/// Writes to the file when a path is given, stdout otherwise.
void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
    } else {
        write_text(path, text);
    }
}

void require_file(const std::string& path, const char* flag) {
    if (path.empty()) throw Error(ErrorKind::InvalidArgument, std::string(flag) + " is required");
    if (!fs::is_regular_file(path)) throw Error(ErrorKind::IoError, std::string(flag) + ": no such file '" + path + "'");
}

prism::ConstantOverrides parse_constants(const std::vector<std::string>& items) {
    prism::ConstantOverrides out;
    for (const auto& item : items) {
        auto [name, value] = prism::parse_override(item);
        if (out.count(name)) throw Error(ErrorKind::ConstantRedefinition, "--const " + name + " given twice");
        out.emplace(std::move(name), value);
    }
    return out;
}

SolverConfig solver_config(const RunConfig& rc) {
    SolverConfig cfg;
    if (rc.workers) cfg.workers = *rc.workers;
    if (rc.value_tol) cfg.value_tol = *rc.value_tol;
    cfg.validate();
    return cfg;
}

json constants_json(const prism::ConstantOverrides& constants) {
    json out = json::object();
    for (const auto& [name, v] : constants) {
        switch (v.type) {
        case prism::ValueType::Int: out[name] = v.int_value; break;
        case prism::ValueType::Double: out[name] = v.double_value; break;
        case prism::ValueType::Bool: out[name] = v.bool_value; break;
        }
    }
    return out;
}

json build_report_json(const prism::BuildReport& r) {
    return json{{"states", r.num_states},
                {"choices", r.num_choices},
                {"transitions", r.num_transitions},
                {"deadlock_states", r.deadlock_states.size()},
                {"build_ms", r.build_time_ms}};
}

json base_report(const RunConfig& rc, const std::string& model_text, const prism::ConstantOverrides& constants,
                 const prism::ConstantOverrides& forced) {
    return json{{"tool", "moqc"},
                {"version", MOQC_VERSION},
                {"command", rc.command},
                {"model", {{"path", rc.model}, {"hash", hex64(fnv1a(model_text))}}},
                {"constants", constants_json(constants)},
                {"overrides", constants_json(forced)},
                {"fix_deadlocks", rc.fix_deadlocks}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int cmd_check(const RunConfig& rc) {
    require_file(rc.model, "--model");
    require_file(rc.query, "--query");
    const auto constants = parse_constants(rc.constants);
    const auto forced = parse_constants(rc.forced);
    const SolverConfig cfg = solver_config(rc);
    const std::string model_text = read_text(rc.model);
    const std::string query_text = read_text(rc.query);
    QueryFile query = parse_query(query_text);
    apply_query_overrides(query, rc.epsilon, rc.max_iters);

    std::cerr << "moqc: parsing " << rc.model << "\n";
    const auto spec = prism::parse_model(model_text);
    prism::BuildOptions options;
    options.fix_deadlocks = rc.fix_deadlocks;
    options.reward_structures = query.objectives;
    const auto model = prepare_model(spec, constants, forced, options);
    std::cerr << "moqc: built " << model->build.report.num_states << " states, " << model->build.report.num_choices
              << " choices, " << model->build.report.num_transitions << " transitions; " << model->num_mecs
              << " end components\n";
    std::cerr << "moqc: running " << query.type() << " query\n";
    const QueryResult result = run_query(*model->analysis, query, cfg, fs::path(rc.query).parent_path());
    std::cerr << "moqc: " << result.status << " after " << result.iterations << " iterations ("
              << result.seconds << " s)\n";
    if (result.status == "IterationCapReached")
        std::cerr << "moqc: warning: iteration cap reached with gap " << result.gap << "; the point is the best found\n";

    json report = base_report(rc, model_text, constants, forced);
    report["query"] = query_to_json(query);
    report["query"]["path"] = rc.query;
    report["query"]["hash"] = hex64(fnv1a(query_text));
    report["solver"] = config_to_json(cfg);
    report["preprocessing"] = model->summary();
    report["result"] = result_to_json(result);

    if (!rc.scheduler_out.empty()) {
        if (result.scheduler) {
            write_text(rc.scheduler_out, scheduler_to_json(*result.scheduler, model->build.mdp.num_states()));
            report["scheduler_file"] = rc.scheduler_out;
        } else {
            std::cerr << "moqc: no scheduler to export for status " << result.status << "\n";
        }
    }
    if (!rc.trace_out.empty()) {
        write_text(rc.trace_out, dump(trace_to_json(result.trace)));
        report["trace_file"] = rc.trace_out;
    }
    emit(rc.out, dump(report));
    return result.exit_code;
}

int cmd_stats(const RunConfig& rc) {
    require_file(rc.model, "--model");
    const auto constants = parse_constants(rc.constants);
    const auto forced = parse_constants(rc.forced);
    const std::string model_text = read_text(rc.model);
    prism::BuildOptions options;
    options.fix_deadlocks = rc.fix_deadlocks;
    const auto built = prism::build_mdp(prism::resolve_constants_forced(prism::parse_model(model_text), constants, forced), options);
    json report = base_report(rc, model_text, constants, forced);
    report["build"] = build_report_json(built.report);
    emit(rc.out, dump(report));
    return 0;
}

int cmd_sensitivity(const RunConfig& rc) {
    require_file(rc.model, "--model");
    require_file(rc.query, "--query");
    const auto constants = parse_constants(rc.constants);
    const auto forced = parse_constants(rc.forced);
    const SolverConfig cfg = solver_config(rc);
    QueryFile query = parse_query(read_text(rc.query));
    apply_query_overrides(query, rc.epsilon, rc.max_iters);
    const auto spec = prism::parse_model(read_text(rc.model));
    prism::BuildOptions options;
    options.fix_deadlocks = rc.fix_deadlocks;
    options.reward_structures = query.objectives;

    std::vector<double> levels = rc.levels;
    if (levels.empty())
        for (int i = 1; i <= 10; ++i) levels.push_back(0.015 * i);
    // Default: every probability supplied on the command line.
    std::vector<std::string> parameters = rc.parameters;
    if (parameters.empty())
        for (const auto& [name, v] : constants)
            if (v.type == prism::ValueType::Double && v.double_value > 0.0 && v.double_value < 1.0) parameters.push_back(name);
    if (parameters.empty()) throw Error(ErrorKind::InvalidArgument, "no parameters to perturb; pass --param");

    std::cerr << "moqc: " << levels.size() * parameters.size() * 2 << " perturbed runs\n";
    const auto rows = sensitivity_run(spec, constants, options, query, levels, parameters, cfg,
                                      fs::path(rc.query).parent_path(), forced);
    for (const auto& r : rows)
        if (!r.error.empty()) std::cerr << "moqc: " << r.parameter << " at " << r.level << ": " << r.error << "\n";
    emit(rc.out, sensitivity_csv(rows, query.objectives));
    return 0;
}

int cmd_convert_ta(const RunConfig& rc) {
    require_file(rc.ta, "--ta");
    if (!rc.params.empty()) require_file(rc.params, "--params");
    if (!rc.counts.empty()) require_file(rc.counts, "--counts");
    if (!(rc.alpha >= 0.0)) throw Error(ErrorKind::InvalidArgument, "--alpha must be >= 0");

    const std::string ta_text = read_text(rc.ta);
    const auto file = ta::parse_ta_file(ta_text);
    const auto product = ta::compose_all(file.automata);
    const auto classification = ta::classify_states(product);
    auto conv = ta::convert_to_mdp(product, classification);
    std::cerr << "moqc: " << product.states.size() << " automaton states, " << conv.params.names.size()
              << " parameters\n";
    if (!rc.params.empty())
        ta::apply_params_file(conv.params, read_text(rc.params), file.decls, fs::path(rc.params).parent_path());
    if (!rc.counts.empty()) ta::estimate_params(conv.params, ta::parse_counts_csv(read_text(rc.counts)), rc.alpha);
    const std::string prism_text = ta::emit_prism(conv.skeleton, conv.params, file.rewards);
    emit(rc.out, prism_text);

    if (!rc.report.empty()) {
        const auto& sk = conv.skeleton;
        json states = json::array();
        for (std::size_t i = 0; i < sk.state_names.size(); ++i) {
            json s{{"index", i}, {"name", sk.state_names[i]}};
            if (i < sk.original_states) s["kind"] = ta::to_string(classification.kinds.at(sk.state_names[i]));
            states.push_back(s);
        }
        json params = json::array();
        for (const auto& n : conv.params.names) {
            const auto& info = conv.params.info.at(n);
            params.push_back(json{{"name", n},
                                  {"state", info.state},
                                  {"action", info.action},
                                  {"guard", ta::to_string(info.guard)},
                                  {"value", conv.params.values.at(n)}});
        }
        json report{{"tool", "moqc"},
                    {"version", MOQC_VERSION},
                    {"command", rc.command},
                    {"ta", {{"path", rc.ta}, {"hash", hex64(fnv1a(ta_text))}, {"automata", file.automata.size()}}},
                    {"inputs", {{"params", rc.params}, {"counts", rc.counts}, {"alpha", rc.alpha}}},
                    {"automaton_states", product.states.size()},
                    {"mdp_states", sk.state_names.size()},
                    {"fresh_states", sk.fresh_states()},
                    {"states", states},
                    {"parameters", params},
                    {"prism_hash", hex64(fnv1a(prism_text))}};
        write_text(rc.report, dump(report));
    }
    return 0;
}

void add_model_flags(CLI::App& sub, RunConfig& rc) {
    sub.add_option("--model", rc.model, "PRISM model file")->required();
    sub.add_option("--const", rc.constants, "Constant override NAME=VALUE (repeatable)")->allow_extra_args(false);
    sub.add_option("--override", rc.forced, "Replace a constant defined in the model NAME=VALUE (repeatable)")
        ->allow_extra_args(false);
    sub.add_flag("--fix-deadlocks", rc.fix_deadlocks, "Add self-loops to deadlock states");
}

void add_solver_flags(CLI::App& sub, RunConfig& rc) {
    sub.add_option("--query", rc.query, "Query JSON file")->required();
    sub.add_option("--workers", rc.workers, "Worker threads for the solver")->check(CLI::PositiveNumber);
    sub.add_option("--value-tol", rc.value_tol, "Value iteration tolerance")->check(CLI::PositiveNumber);
    sub.add_option("--epsilon", rc.epsilon, "Gap tolerance of convex queries")->check(CLI::PositiveNumber);
    sub.add_option("--max-iters", rc.max_iters, "Iteration cap of the query loop")->check(CLI::PositiveNumber);
}

} // namespace

int run(int argc, char** argv) {
    CLI::App app{"Multi-objective model checker for MDPs"};
    app.set_version_flag("--version", MOQC_VERSION);
    app.require_subcommand(1);
    RunConfig rc;

    auto* check = app.add_subcommand("check", "Build a model and answer a query");
    add_model_flags(*check, rc);
    add_solver_flags(*check, rc);
    check->add_option("--export-scheduler", rc.scheduler_out, "Write the witness scheduler as JSON");
    check->add_option("--trace", rc.trace_out, "Write the per-iteration trace as JSON");
    check->add_option("--out", rc.out, "Report path (default stdout)");

    auto* convert = app.add_subcommand("convert-ta", "Convert timed automata to a PRISM MDP");
    convert->add_option("--ta", rc.ta, "Timed automata JSON file")->required();
    convert->add_option("--params", rc.params, "Explicit probabilities and delay distributions");
    convert->add_option("--counts", rc.counts, "CSV of observed (state, action, count)");
    convert->add_option("--alpha", rc.alpha, "Additive smoothing for counts")->check(CLI::NonNegativeNumber);
    convert->add_option("--out", rc.out, "PRISM output path (default stdout)");
    convert->add_option("--report", rc.report, "Conversion report path");

    auto* stats = app.add_subcommand("stats", "Build a model and print its size");
    add_model_flags(*stats, rc);
    stats->add_option("--out", rc.out, "Report path (default stdout)");

    auto* sens = app.add_subcommand("sensitivity", "Rerun a query with perturbed constants");
    add_model_flags(*sens, rc);
    add_solver_flags(*sens, rc);
    sens->add_option("--levels", rc.levels, "Relative perturbations (default 0.015..0.15)")->delimiter(',');
    sens->add_option("--param", rc.parameters, "Constant to perturb (repeatable; default all --const probabilities)")
        ->delimiter(',');
    sens->add_option("--out", rc.out, "CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    rc.command = app.get_subcommands().front()->get_name();
    try {
        if (rc.command == "check") return cmd_check(rc);
        if (rc.command == "convert-ta") return cmd_convert_ta(rc);
        if (rc.command == "stats") return cmd_stats(rc);
        return cmd_sensitivity(rc);
    } catch (const Error& e) {
        std::cerr << "moqc: error: " << e.what() << "\n";
        std::cerr << json{{"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "moqc: error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace moqc::cli
