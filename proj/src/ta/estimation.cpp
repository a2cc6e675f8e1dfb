#include "moqc/ta/estimation.hpp"

#include "moqc/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace moqc::ta {

double guard_probability(const Guard& guard, const DelaySpec& dist) {
    const Guard* atom = &guard;
    bool negated = false;
    while (atom->kind == Guard::Kind::Not) {
        negated = !negated;
        atom = &atom->args.front();
    }
    if (atom->kind != Guard::Kind::ClockCmp || atom->op == CmpOp::Eq)
        throw Error(ErrorKind::UnsupportedGuardAtom,
                    "guard '" + to_string(guard) + "' is not a clock threshold (z < t, z <= t, z >= t or z > t)");
    const double t = atom->constant;
    const bool inclusive = atom->op == CmpOp::Le || atom->op == CmpOp::Gt;  // CDF at t includes t
    double cdf = 0.0;
    if (dist.kind == DelaySpec::Kind::Exponential) {
        if (!(dist.scale > 0.0)) throw Error(ErrorKind::InvalidArgument, "exponential scale must be positive");
        cdf = std::isinf(t) ? 1.0 : -std::expm1(-t / dist.scale);
    } else {
        if (dist.samples.empty()) throw Error(ErrorKind::EmptyCounts, "empirical distribution has no samples");
        const auto below = std::count_if(dist.samples.begin(), dist.samples.end(),
                                         [&](double x) { return inclusive ? x <= t : x < t; });
        cdf = static_cast<double>(below) / static_cast<double>(dist.samples.size());
    }
    const bool upper = atom->op == CmpOp::Lt || atom->op == CmpOp::Le;
    return upper != negated ? cdf : 1.0 - cdf;
}

std::vector<CountRow> parse_counts_csv(std::string_view text) {
    std::vector<CountRow> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            const auto a = cell.find_first_not_of(" \t"), b = cell.find_last_not_of(" \t");
            cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
        }
        if (cells.size() != 3)
            throw Error(ErrorKind::SyntaxError, "counts line " + std::to_string(lineno) + ": expected state,action,count");
        if (rows.empty() && lineno == 1 && cells[0] == "state" && cells[1] == "action") continue;
        CountRow r{cells[0], cells[1], 0.0};
        try {
            std::size_t used = 0;
            r.count = std::stod(cells[2], &used);
            if (used != cells[2].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw Error(ErrorKind::SyntaxError, "counts line " + std::to_string(lineno) + ": bad count '" + cells[2] + "'");
        }
        if (!(r.count >= 0.0) || std::isinf(r.count))
            throw Error(ErrorKind::InvalidArgument, "counts line " + std::to_string(lineno) + ": count must be >= 0");
        rows.push_back(std::move(r));
    }
    return rows;
}

void estimate_params(ParamTable& params, const std::vector<CountRow>& counts, double alpha) {
    if (!(alpha >= 0.0) || std::isinf(alpha)) throw Error(ErrorKind::InvalidArgument, "smoothing alpha must be >= 0");
    std::map<std::string, double> observed;
    for (const auto& r : counts) {
        const std::string name = "p__" + r.state + "__" + r.action;
        if (!params.info.count(name))
            throw Error(ErrorKind::UnknownParameter,
                        "counts name (" + r.state + ", " + r.action + "), which is not an edge of a branching state");
        observed[name] += r.count;
    }
    for (const auto& [state, members] : params.groups) {
        if (std::all_of(members.begin(), members.end(), [&](const std::string& n) { return params.assigned(n); })) continue;
        double total = 0.0;
        for (const auto& n : members) total += observed.count(n) ? observed.at(n) : 0.0;
        const double k = static_cast<double>(members.size());
        if (total + alpha * k <= 0.0)
            throw Error(ErrorKind::EmptyCounts, "no observations for branching state '" + state + "' and alpha = 0");
        std::vector<double> p;
        for (const auto& n : members) p.push_back(((observed.count(n) ? observed.at(n) : 0.0) + alpha) / (total + alpha * k));
        const std::size_t big = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
        double rest = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (i != big) rest += p[i];
        p[big] = 1.0 - rest;
        for (std::size_t i = 0; i < members.size(); ++i)
            if (!params.assigned(members[i])) params.set(members[i], p[i]);
    }
}

namespace {

std::vector<double> read_samples(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot read samples file '" + path.string() + "'");
    std::vector<double> out;
    std::string token;
    while (in >> token) {
        std::replace(token.begin(), token.end(), ',', ' ');
        std::istringstream parts(token);
        double x = 0.0;
        while (parts >> x) out.push_back(x);
        if (!parts.eof()) throw Error(ErrorKind::SyntaxError, "samples file '" + path.string() + "': bad number");
    }
    return out;
}

} // namespace

void apply_params_file(ParamTable& params, std::string_view text, const Declarations& decls,
                       const std::filesystem::path& base_dir) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SyntaxError, std::string("params file: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::SyntaxError, "params file: expected an object");
    try {
        for (const auto& [name, v] : j.items()) {
            if (!params.info.count(name))
                throw Error(ErrorKind::UnknownParameter, "params file: '" + name + "' is not a parameter of the converted model");
            if (v.is_number()) {
                params.set(name, v.get<double>());
                continue;
            }
            DelaySpec dist;
            const auto kind = v.at("dist").get<std::string>();
            if (kind == "exponential") {
                dist.kind = DelaySpec::Kind::Exponential;
                dist.scale = v.at("scale").get<double>();
            } else if (kind == "empirical") {
                dist.kind = DelaySpec::Kind::Empirical;
                const json& s = v.at("samples");
                if (s.is_string()) {
                    std::filesystem::path p = s.get<std::string>();
                    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
                    dist.samples = read_samples(p);
                } else {
                    dist.samples = s.get<std::vector<double>>();
                }
            } else {
                throw Error(ErrorKind::InvalidArgument, "params file: unknown distribution '" + kind + "'");
            }
            Guard guard = params.info.at(name).guard;
            if (v.contains("form")) {
                Declarations local = decls;
                if (!local.is_clock("z")) local.clocks.push_back("z");
                if (v.contains("threshold")) local.constants["t"] = v.at("threshold").get<double>();
                guard = parse_guard(v.at("form").get<std::string>(), local);
            } else if (v.contains("threshold")) {
                throw Error(ErrorKind::InvalidArgument, "params file: '" + name + "' gives a threshold without a form");
            }
            params.set(name, guard_probability(guard, dist));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SyntaxError, std::string("params file: ") + e.what());
    }
}

} // namespace moqc::ta
