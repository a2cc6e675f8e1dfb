#pragma once

#include "moqc/mdp.hpp"

#include <cstddef>
#include <vector>

namespace moqc {

/// Axis-aligned box; entries may be infinite.
struct Box {
    Vector lower;
    Vector upper;

    static Box unbounded(std::size_t m);
    std::size_t dim() const { return static_cast<std::size_t>(lower.size()); }
    /// Throws ShapeMismatch / InvalidArgument on differing sizes, NaN or lower > upper.
    void validate() const;
    bool contains(const Vector& x, double tol) const;
    bool is_bounded() const;
    /// Coordinate-wise nearest point of the box.
    Vector clamp(const Vector& x) const;
};

/// w . x <= w . r, where r is the support point that produced the hyperplane.
struct Halfspace {
    Vector w;
    Vector r;
    double offset() const { return w.dot(r); }
};

struct HRep {
    std::vector<Halfspace> halfspaces;
};

/// Points with the schedulers that achieve them; indices are insertion order.
struct VRep {
    std::vector<Vector> points;
    std::vector<DeterministicScheduler> schedulers;
};

enum class LossKind { SqDistToPoint, WeightedSqDistToPoint, SqDistToBox };

/// Quadratic losses sum_i c_i (x_i - y_i)^2 where y is the target point, or the nearest
/// point of the target box.
struct LossSpec {
    LossKind kind = LossKind::SqDistToPoint;
    Vector target;   // point kinds
    Box target_box;  // box kind
    Vector weights;  // c_i >= 0; empty means all ones

    std::size_t dim() const;
    void validate(std::size_t m) const;
    Vector coefficient() const;
    /// Lower and upper ends of the target in each coordinate (equal for point kinds).
    Box target_region() const;
    double value(const Vector& x) const;
    Vector gradient(const Vector& x) const;
};

enum class Sense { Minimize, Maximize };
enum class LpStatus { Feasible, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Vector point;  // an optimal vertex when Feasible
    double value = 0.0;
};

/// Dense two-phase simplex with Bland's rule over {x in box | w.x <= w.r for all halfspaces}.
LpResult lp_solve(const HRep& halfspaces, const Box& box, const Vector& objective, Sense sense);

struct LossMinimum {
    Vector point;
    double value = 0.0;
    /// Certified lower bound on the minimum (value minus the final Frank-Wolfe gap).
    double lower_bound = 0.0;
    std::size_t lp_calls = 0;
};

/// Minimizes the loss over H(halfspaces) intersected with the box by fully corrective
/// Frank-Wolfe; stops once the duality gap is at most tol. The region must be
/// nonempty (RegionEmpty) and bounded (RegionUnbounded).
LossMinimum minimize_loss_over_hrep(const HRep& halfspaces, const Box& box, const LossSpec& loss, double tol);

struct Projection {
    Vector point;
    std::vector<double> weights;  // one per input point, on the simplex
};

/// Nearest point of conv(points) to anchor (Euclidean), by Wolfe's minimum-norm-point
/// algorithm on the translated points. Weights below 1e-12 are dropped.
Projection min_norm_point(const std::vector<Vector>& points, const Vector& anchor);

} // namespace moqc
