#include "moqc/query_io.hpp"

#include "moqc/error.hpp"
#include "moqc/graph_analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace moqc {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::InvalidArgument, "query file: " + what); }

double bound_value(const json& j, const std::string& field) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    bad("'" + field + "' entries must be numbers, \"inf\" or \"-inf\"");
}

/// A bound vector: an array, or one string applying to every coordinate.
Vector bounds(const json& parent, const std::string& field, std::size_t m, double fallback) {
    if (!parent.contains(field)) return Vector::Constant(static_cast<Eigen::Index>(m), fallback);
    const json& j = parent.at(field);
    if (!j.is_array()) return Vector::Constant(static_cast<Eigen::Index>(m), bound_value(j, field));
    if (j.size() != m)
        throw Error(ErrorKind::ShapeMismatch, "query file: '" + field + "' needs " + std::to_string(m) + " entries");
    Vector v(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) v(static_cast<Eigen::Index>(i)) = bound_value(j[i], field);
    return v;
}

Vector numbers(const json& j, const std::string& field, std::size_t m) {
    if (!j.is_array() || j.size() != m)
        throw Error(ErrorKind::ShapeMismatch, "query file: '" + field + "' needs " + std::to_string(m) + " numbers");
    Vector v(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        if (!j[i].is_number()) bad("'" + field + "' entries must be numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

LossSpec parse_loss(const json& j, std::size_t m) {
    LossSpec loss;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "sq_dist_to_point") {
        loss.kind = LossKind::SqDistToPoint;
    } else if (kind == "weighted_sq_dist_to_point") {
        loss.kind = LossKind::WeightedSqDistToPoint;
    } else if (kind == "sq_dist_to_box") {
        loss.kind = LossKind::SqDistToBox;
    } else {
        bad("unknown loss kind '" + kind + "'");
    }
    if (loss.kind == LossKind::SqDistToBox) {
        loss.target_box = Box{bounds(j, "lower", m, -kInf), bounds(j, "upper", m, kInf)};
    } else {
        loss.target = numbers(j.at("target"), "target", m);
    }
    if (j.contains("weights")) loss.weights = numbers(j.at("weights"), "weights", m);
    if (loss.kind == LossKind::WeightedSqDistToPoint && loss.weights.size() == 0)
        bad("weighted_sq_dist_to_point needs 'weights'");
    return loss;
}

std::size_t positive_count(const json& j, const std::string& field, std::size_t fallback) {
    if (!j.contains(field)) return fallback;
    const json& v = j.at(field);
    if (!v.is_number_integer() || v.get<long long>() <= 0) bad("'" + field + "' must be a positive integer");
    return v.get<std::size_t>();
}

json bound_json(double x) {
    if (x == kInf) return "inf";
    if (x == -kInf) return "-inf";
    return x;
}

json vector_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(bound_json(v(i)));
    return out;
}

json loss_json(const LossSpec& loss) {
    json out;
    switch (loss.kind) {
    case LossKind::SqDistToPoint:
        out["kind"] = "sq_dist_to_point";
        break;
    case LossKind::WeightedSqDistToPoint:
        out["kind"] = "weighted_sq_dist_to_point";
        break;
    case LossKind::SqDistToBox:
        out["kind"] = "sq_dist_to_box";
        break;
    }
    if (loss.kind == LossKind::SqDistToBox) {
        out["lower"] = vector_json(loss.target_box.lower);
        out["upper"] = vector_json(loss.target_box.upper);
    } else {
        out["target"] = vector_json(loss.target);
    }
    if (loss.weights.size() > 0) out["weights"] = vector_json(loss.weights);
    return out;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

using Clock = std::chrono::steady_clock;

} // namespace

std::string QueryFile::type() const {
    switch (query.index()) {
    case 0:
        return "convex";
    case 1:
        return "achievability";
    case 2:
        return "evaluate";
    default:
        return "optimize";
    }
}

QueryFile parse_query(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SyntaxError, std::string("query file: ") + e.what());
    }
    try {
        QueryFile out;
        if (!j.is_object() || !j.contains("objectives") || !j.contains("query"))
            bad("expected an object with 'objectives' and 'query'");
        out.objectives = j.at("objectives").get<std::vector<std::string>>();
        if (out.objectives.empty()) bad("'objectives' is empty");
        const std::size_t m = out.objectives.size();
        const json& q = j.at("query");
        const auto type = q.at("type").get<std::string>();

        if (type == "convex") {
            ConvexQuerySpec spec;
            spec.objectives = out.objectives;
            spec.loss = parse_loss(q.at("loss"), m);
            spec.box = Box{bounds(q, "lower", m, -kInf), bounds(q, "upper", m, kInf)};
            if (q.contains("epsilon")) spec.epsilon = q.at("epsilon").get<double>();
            spec.max_outer_iters = positive_count(q, "max_iters", spec.max_outer_iters);
            if (q.contains("initial_direction")) spec.initial_direction = numbers(q.at("initial_direction"), "initial_direction", m);
            spec.validate(m);
            out.query = std::move(spec);
        } else if (type == "achievability") {
            AchievabilitySpec spec;
            spec.objectives = out.objectives;
            spec.thresholds = numbers(q.at("thresholds"), "thresholds", m);
            const auto dirs = q.at("directions").get<std::vector<std::string>>();
            for (const auto& d : dirs) {
                if (d == "<=") {
                    spec.directions.push_back(ThresholdDirection::AtMost);
                } else if (d == ">=") {
                    spec.directions.push_back(ThresholdDirection::AtLeast);
                } else {
                    bad("direction '" + d + "' must be \"<=\" or \">=\"");
                }
            }
            if (q.contains("delta")) spec.delta = q.at("delta").get<double>();
            spec.max_outer_iters = positive_count(q, "max_iters", spec.max_outer_iters);
            spec.validate(m);
            out.query = std::move(spec);
        } else if (type == "evaluate") {
            out.query = EvaluateSpec{q.at("scheduler").get<std::string>()};
        } else if (type == "optimize") {
            OptimizeSpec spec;
            const json& o = q.at("objective");
            if (o.is_string()) {
                const auto it = std::find(out.objectives.begin(), out.objectives.end(), o.get<std::string>());
                if (it == out.objectives.end()) bad("objective '" + o.get<std::string>() + "' is not listed");
                spec.objective = static_cast<std::size_t>(it - out.objectives.begin());
            } else {
                spec.objective = o.get<std::size_t>();
                if (spec.objective >= m) throw Error(ErrorKind::ShapeMismatch, "query file: objective index out of range");
            }
            const auto sense = q.value("sense", std::string("max"));
            if (sense == "max") {
                spec.sense = Sense::Maximize;
            } else if (sense == "min") {
                spec.sense = Sense::Minimize;
            } else {
                bad("sense must be \"min\" or \"max\"");
            }
            out.query = spec;
        } else {
            bad("unknown query type '" + type + "'");
        }
        return out;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SyntaxError, std::string("query file: ") + e.what());
    }
}

void apply_query_overrides(QueryFile& query, std::optional<double> epsilon, std::optional<std::size_t> max_iters) {
    if (auto* c = std::get_if<ConvexQuerySpec>(&query.query)) {
        if (epsilon) c->epsilon = *epsilon;
        if (max_iters) c->max_outer_iters = *max_iters;
        c->validate(query.objectives.size());
    } else if (auto* a = std::get_if<AchievabilitySpec>(&query.query)) {
        if (max_iters) a->max_outer_iters = *max_iters;
        a->validate(query.objectives.size());
    }
}

json query_to_json(const QueryFile& query) {
    json q;
    q["type"] = query.type();
    if (const auto* c = std::get_if<ConvexQuerySpec>(&query.query)) {
        q["loss"] = loss_json(c->loss);
        q["lower"] = vector_json(c->box.lower);
        q["upper"] = vector_json(c->box.upper);
        q["epsilon"] = c->epsilon;
        q["max_iters"] = c->max_outer_iters;
        if (c->initial_direction) q["initial_direction"] = vector_json(*c->initial_direction);
    } else if (const auto* a = std::get_if<AchievabilitySpec>(&query.query)) {
        q["thresholds"] = vector_json(a->thresholds);
        json dirs = json::array();
        for (auto d : a->directions) dirs.push_back(d == ThresholdDirection::AtMost ? "<=" : ">=");
        q["directions"] = dirs;
        q["delta"] = a->delta;
        q["max_iters"] = a->max_outer_iters;
    } else if (const auto* e = std::get_if<EvaluateSpec>(&query.query)) {
        q["scheduler"] = e->scheduler_path;
    } else {
        const auto& o = std::get<OptimizeSpec>(query.query);
        q["objective"] = o.objective;
        q["sense"] = o.sense == Sense::Maximize ? "max" : "min";
    }
    return json{{"objectives", query.objectives}, {"query", q}};
}

json config_to_json(const SolverConfig& config) {
    return json{{"value_tol", config.value_tol},
                {"max_value_iters", config.max_value_iters},
                {"policy_improvement_tol", config.policy_improvement_tol},
                {"max_policy_iters", config.max_policy_iters},
                {"workers", config.workers},
                {"dense_limit", config.dense_limit}};
}

json PreparedModel::summary() const {
    return json{{"states", build.report.num_states},
                {"choices", build.report.num_choices},
                {"transitions", build.report.num_transitions},
                {"deadlock_states_fixed", build.report.deadlock_states.size()},
                {"build_ms", build.report.build_time_ms},
                {"reachable_states", reachable_states},
                {"mecs", num_mecs},
                {"mec_states", mec_states},
                {"rewards_finite", true}};
}

std::unique_ptr<PreparedModel> prepare_model(const prism::ModelSpec& spec, const prism::ConstantOverrides& overrides,
                                             const prism::ConstantOverrides& forced,
                                             const prism::BuildOptions& options) {
    auto out = std::make_unique<PreparedModel>();
    out->build = prism::build_mdp(prism::resolve_constants_forced(spec, overrides, forced), options);
    // Forward exploration only produces reachable states, so this is a consistency count.
    out->reachable_states = reachable_restriction(out->build.mdp, out->build.rewards).mdp.num_states();
    out->analysis = std::make_unique<AnalysisModel>(out->build.mdp, out->build.rewards);
    out->num_mecs = out->analysis->mecs().mecs.size();
    for (const auto& mec : out->analysis->mecs().mecs) out->mec_states += mec.states.size();
    return out;
}

QueryResult run_query(const AnalysisModel& model, const QueryFile& query, const SolverConfig& config,
                      const std::filesystem::path& base_dir) {
    if (query.objectives.size() != model.num_objectives())
        throw Error(ErrorKind::ShapeMismatch, "query names " + std::to_string(query.objectives.size()) +
                                                  " objectives but the model has " +
                                                  std::to_string(model.num_objectives()));
    const auto started = Clock::now();
    QueryResult r;
    r.type = query.type();
    auto take_run = [&r](const QueryOutcome& o) {
        r.value = o.value;
        r.point = o.point;
        r.gap = o.gap;
        r.lower_bound = o.lower_bound;
        r.iterations = o.iterations;
        r.oracle_calls = o.oracle_calls;
        r.trace = o.trace;
        if (o.status != QueryStatus::Infeasible) r.scheduler = o.mixture;
    };

    if (const auto* c = std::get_if<ConvexQuerySpec>(&query.query)) {
        const QueryOutcome o = convex_query(model, *c, config);
        take_run(o);
        r.status = to_string(o.status);
        r.exit_code = o.status == QueryStatus::Infeasible ? 2 : 0;
    } else if (const auto* a = std::get_if<AchievabilitySpec>(&query.query)) {
        const AchievabilityOutcome o = achievability_query(model, *a, config);
        take_run(o.run);
        r.value = o.distance_sq;
        r.decided = o.decided;
        r.status = o.achievable ? "Achievable" : "NotAchievable";
        r.exit_code = o.achievable ? 0 : 2;
        if (!o.achievable) r.scheduler.reset();
    } else if (const auto* e = std::get_if<EvaluateSpec>(&query.query)) {
        std::filesystem::path path = e->scheduler_path;
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        const AnyScheduler sched = scheduler_from_json(read_text(path));
        r.point = evaluate_query(model.mdp(), model.rewards(), sched, config);
        r.status = "Evaluated";
    } else {
        const auto& o = std::get<OptimizeSpec>(query.query);
        SingleObjectiveOptimum best = optimize_single(model, o.objective, o.sense, config);
        r.value = best.value;
        r.point = best.point;
        r.oracle_calls = 1;
        r.scheduler = std::move(best.scheduler);
        r.status = "Optimal";
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - started).count();
    return r;
}

json result_to_json(const QueryResult& result) {
    json out{{"type", result.type},
             {"status", result.status},
             {"point", vector_json(result.point)},
             {"seconds", result.seconds}};
    if (result.type != "evaluate") out["value"] = result.value;
    if (result.type == "convex" || result.type == "achievability") {
        out["gap"] = result.gap;
        out["lower_bound"] = result.lower_bound;
        out["iterations"] = result.iterations;
        out["oracle_calls"] = result.oracle_calls;
    }
    if (result.type == "achievability") out["decided"] = result.decided;
    if (result.scheduler) {
        if (const auto* m = std::get_if<MixtureScheduler>(&*result.scheduler)) {
            json weights = json::array();
            for (const auto& c : m->components) weights.push_back(c.weight);
            out["mixture_weights"] = weights;
        }
    }
    return out;
}

json trace_to_json(const std::vector<TraceEntry>& trace) {
    json out = json::array();
    for (const auto& e : trace)
        out.push_back(json{{"iteration", e.iteration},
                           {"w", vector_json(e.w)},
                           {"r", vector_json(e.r)},
                           {"v_low", vector_json(e.v_low)},
                           {"v_bar", vector_json(e.v_bar)},
                           {"loss_low", e.loss_low},
                           {"loss_bar", e.loss_bar},
                           {"lower_bound", e.lower_bound},
                           {"recomputed_low", e.recomputed_low},
                           {"points", e.points},
                           {"halfspaces", e.halfspaces},
                           {"seconds", e.seconds}});
    return out;
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << value;
    return out.str();
}

std::vector<SensitivityRow> sensitivity_run(const prism::ModelSpec& spec, const prism::ConstantOverrides& overrides,
                                            const prism::BuildOptions& options, const QueryFile& query,
                                            const std::vector<double>& levels,
                                            const std::vector<std::string>& parameters, const SolverConfig& config,
                                            const std::filesystem::path& base_dir, const prism::ConstantOverrides& forced) {
    for (double s : levels)
        if (!(s >= 0.0) || !std::isfinite(s)) throw Error(ErrorKind::InvalidArgument, "perturbation levels must be finite and >= 0");
    for (const auto& p : parameters)
        if (!spec.find_constant(p))
            throw Error(ErrorKind::UnknownParameter, "'" + p + "' is not a constant of the model");

    const prism::ModelSpec base = prism::resolve_constants_forced(spec, overrides, forced);
    std::vector<SensitivityRow> rows;
    for (double s : levels) {
        for (const auto& p : parameters) {
            const auto& folded = base.find_constant(p)->value;
            const double nominal = folded->op == prism::ExprOp::IntLit ? static_cast<double>(folded->int_value)
                                                                       : folded->double_value;
            for (int sign : {-1, 1}) {
                SensitivityRow row;
                row.level = s;
                row.parameter = p;
                row.sign = sign;
                const double v = std::clamp(nominal * (1.0 + sign * s), 1e-9, 1.0 - 1e-9);
                try {
                    auto perturbed = forced;
                    perturbed[p] = prism::Value::of_double(v);
                    const auto model = prepare_model(spec, overrides, perturbed, options);
                    const QueryResult r = run_query(*model->analysis, query, config, base_dir);
                    row.values = r.point;
                    row.loss = r.value;
                    row.status = r.status;
                } catch (const Error& e) {
                    row.status = "Error";
                    row.error = e.what();
                }
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

std::string sensitivity_csv(const std::vector<SensitivityRow>& rows, const std::vector<std::string>& objectives) {
    std::ostringstream out;
    out << "level,parameter,sign";
    for (const auto& o : objectives) out << "," << o;
    out << ",loss,status\n";
    for (const auto& r : rows) {
        out << format_double(r.level) << "," << r.parameter << "," << (r.sign > 0 ? "+" : "-");
        for (std::size_t i = 0; i < objectives.size(); ++i) {
            out << ",";
            if (static_cast<std::size_t>(r.values.size()) == objectives.size())
                out << format_double(r.values(static_cast<Eigen::Index>(i)));
        }
        out << ",";
        if (r.error.empty()) out << format_double(r.loss);
        out << "," << r.status << "\n";
    }
    return out.str();
}

} // namespace moqc
