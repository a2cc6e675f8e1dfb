#pragma once

#include "moqc/ta/conversion.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace moqc::ta {

struct DelaySpec {
    enum class Kind { Exponential, Empirical };
    Kind kind = Kind::Exponential;
    /// Exponential mean delay: CDF(t) = 1 - exp(-t / scale).
    double scale = 1.0;
    std::vector<double> samples;
};

/// Probability that a clock threshold guard holds when the clock is a delay drawn from
/// `dist`: z < t and z <= t give CDF(t), z >= t and z > t its complement. The empirical
/// CDF counts samples below t (at most t for <=). Other guards throw UnsupportedGuardAtom.
double guard_probability(const Guard& guard, const DelaySpec& dist);

struct CountRow {
    std::string state;
    std::string action;
    double count = 0.0;
};

/// CSV with columns state,action,count; a header line is optional.
std::vector<CountRow> parse_counts_csv(std::string_view text);

/// Fills every still-unassigned parameter from observed frequencies with additive
/// smoothing: p = (count + alpha) / (total + alpha * k) over the k alternatives of its
/// branching state. The largest estimate of a group absorbs rounding so the group sums
/// to exactly 1. Throws EmptyCounts when a group needs estimates but has total 0 and
/// alpha = 0, UnknownParameter for rows naming no branching edge.
void estimate_params(ParamTable& params, const std::vector<CountRow>& counts, double alpha);

/// Params file: {"p__s__a": 0.8, "p__s__b": {"dist": "exponential", "scale": 0.2,
/// "threshold": 0.1, "form": "z<t"}, ...}. "form" defaults to the edge's own guard;
/// "t" in it denotes "threshold". Empirical distributions give "samples" as an array
/// or a file path resolved against `base_dir`.
void apply_params_file(ParamTable& params, std::string_view text, const Declarations& decls,
                       const std::filesystem::path& base_dir = {});

} // namespace moqc::ta
