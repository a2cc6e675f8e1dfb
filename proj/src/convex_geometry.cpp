#include "moqc/convex_geometry.hpp"

#include "moqc/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>

namespace moqc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dim(std::size_t got, std::size_t want, const char* what) {
    if (got != want)
        throw Error(ErrorKind::ShapeMismatch,
                    std::string(what) + " has dimension " + std::to_string(got) + ", expected " + std::to_string(want));
}

} // namespace

Box Box::unbounded(std::size_t m) {
    const auto n = static_cast<Eigen::Index>(m);
    return {Vector::Constant(n, -kInf), Vector::Constant(n, kInf)};
}

void Box::validate() const {
    check_dim(static_cast<std::size_t>(upper.size()), dim(), "box upper bound");
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
        if (std::isnan(lower(i)) || std::isnan(upper(i)))
            throw Error(ErrorKind::InvalidArgument, "box bound is NaN");
        if (lower(i) > upper(i))
            throw Error(ErrorKind::InvalidArgument, "box lower bound exceeds upper bound in coordinate " +
                                                        std::to_string(i + 1));
    }
}

bool Box::contains(const Vector& x, double tol) const {
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x(i) < lower(i) - tol || x(i) > upper(i) + tol) return false;
    return true;
}

bool Box::is_bounded() const { return lower.allFinite() && upper.allFinite(); }

Vector Box::clamp(const Vector& x) const { return x.cwiseMax(lower).cwiseMin(upper); }

std::size_t LossSpec::dim() const {
    return kind == LossKind::SqDistToBox ? target_box.dim() : static_cast<std::size_t>(target.size());
}

void LossSpec::validate(std::size_t m) const {
    if (kind == LossKind::SqDistToBox) {
        target_box.validate();
        check_dim(target_box.dim(), m, "loss target box");
    } else {
        check_dim(static_cast<std::size_t>(target.size()), m, "loss target");
        if (!target.allFinite()) throw Error(ErrorKind::InvalidArgument, "loss target must be finite");
    }
    if (weights.size() != 0) {
        check_dim(static_cast<std::size_t>(weights.size()), m, "loss weights");
        if (!weights.allFinite() || (weights.array() < 0.0).any())
            throw Error(ErrorKind::InvalidArgument, "loss weights must be finite and nonnegative");
    }
}

Vector LossSpec::coefficient() const {
    const auto m = static_cast<Eigen::Index>(dim());
    return weights.size() == 0 ? Vector::Ones(m) : weights;
}

Box LossSpec::target_region() const { return kind == LossKind::SqDistToBox ? target_box : Box{target, target}; }

double LossSpec::value(const Vector& x) const {
    const Vector d = x - target_region().clamp(x);
    return coefficient().dot(d.cwiseProduct(d));
}

Vector LossSpec::gradient(const Vector& x) const {
    return 2.0 * coefficient().cwiseProduct(x - target_region().clamp(x));
}

// ---------------------------------------------------------------------------------
// Simplex

namespace {

/// Tableau in canonical form: every basic column is a unit vector. Row `rows` holds the
/// reduced costs of the current phase; column `cols` holds right-hand sides.
class Tableau {
public:
    using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    Tableau(Matrix a, std::vector<std::size_t> basis) : a_(std::move(a)), basis_(std::move(basis)) {
        rows_ = static_cast<std::size_t>(a_.rows()) - 1;
        cols_ = static_cast<std::size_t>(a_.cols()) - 1;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double rhs(std::size_t r) const { return a_(idx(r), idx(cols_)); }
    double at(std::size_t r, std::size_t c) const { return a_(idx(r), idx(c)); }
    std::size_t basic(std::size_t r) const { return basis_[r]; }

    /// Installs cost vector c (length cols) as the objective row, expressed in reduced form.
    void set_objective(const std::vector<double>& c) {
        auto obj = a_.row(idx(rows_));
        obj.setZero();
        for (std::size_t j = 0; j < cols_; ++j) obj(idx(j)) = c[j];
        for (std::size_t r = 0; r < rows_; ++r) {
            const double cb = c[basis_[r]];
            if (cb != 0.0) obj -= cb * a_.row(idx(r));
        }
    }

    /// Objective value of the current basic solution.
    double objective() const { return -a_(idx(rows_), idx(cols_)); }

    void pivot(std::size_t r, std::size_t c) {
        a_.row(idx(r)) /= a_(idx(r), idx(c));
        for (std::size_t i = 0; i <= rows_; ++i) {
            if (i == r) continue;
            const double f = a_(idx(i), idx(c));
            if (f != 0.0) a_.row(idx(i)) -= f * a_.row(idx(r));
        }
        basis_[r] = c;
    }

    enum class Outcome { Optimal, Unbounded };

    /// Minimizes the installed objective with Bland's rule over columns with allowed[j].
    Outcome run(const std::vector<char>& allowed) {
        const std::size_t cap = 10 * (rows_ + cols_) * (rows_ + cols_);
        for (std::size_t iter = 0; iter < cap; ++iter) {
            std::size_t enter = cols_;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (allowed[j] && at(rows_, j) < -kCostTol) {
                    enter = j;
                    break;
                }
            }
            if (enter == cols_) return Outcome::Optimal;
            // Minimum ratio; ties go to the lowest basic variable index.
            double best = kInf;
            for (std::size_t r = 0; r < rows_; ++r) {
                const double e = at(r, enter);
                if (e > kPivotTol) best = std::min(best, std::max(rhs(r), 0.0) / e);
            }
            std::size_t leave = rows_;
            for (std::size_t r = 0; r < rows_ && best < kInf; ++r) {
                const double e = at(r, enter);
                if (e <= kPivotTol || std::max(rhs(r), 0.0) / e > best + 1e-13) continue;
                if (leave == rows_ || basis_[r] < basis_[leave]) leave = r;
            }
            if (leave == rows_) return Outcome::Unbounded;
            pivot(leave, enter);
        }
        throw Error(ErrorKind::NumericalFailure, "simplex exceeded its pivot cap of " + std::to_string(cap));
    }

    static constexpr double kPivotTol = 1e-10;
    static constexpr double kCostTol = 1e-11;

private:
    static Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

    Matrix a_;
    std::vector<std::size_t> basis_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
};

/// x_i = base_i + sum_k map(i, k) * y_k with y >= 0.
struct VariableMap {
    Vector base;
    Eigen::MatrixXd map;
};

VariableMap map_variables(const Box& box) {
    const auto m = box.lower.size();
    Eigen::Index n = 0;
    for (Eigen::Index i = 0; i < m; ++i) n += std::isfinite(box.lower(i)) || std::isfinite(box.upper(i)) ? 1 : 2;
    VariableMap vm{Vector::Zero(m), Eigen::MatrixXd::Zero(m, n)};
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (std::isfinite(box.lower(i))) {
            vm.base(i) = box.lower(i);
            vm.map(i, k++) = 1.0;
        } else if (std::isfinite(box.upper(i))) {
            vm.base(i) = box.upper(i);
            vm.map(i, k++) = -1.0;
        } else {
            vm.map(i, k++) = 1.0;
            vm.map(i, k++) = -1.0;
        }
    }
    return vm;
}

} // namespace

LpResult lp_solve(const HRep& hrep, const Box& box, const Vector& objective, Sense sense) {
    box.validate();
    const std::size_t m = box.dim();
    if (m == 0) throw Error(ErrorKind::InvalidArgument, "linear program needs at least one dimension");
    check_dim(static_cast<std::size_t>(objective.size()), m, "objective");
    for (const auto& h : hrep.halfspaces) {
        check_dim(static_cast<std::size_t>(h.w.size()), m, "halfspace normal");
        check_dim(static_cast<std::size_t>(h.r.size()), m, "halfspace point");
    }

    const VariableMap vm = map_variables(box);
    const auto n = static_cast<std::size_t>(vm.map.cols());

    // Constraint rows  g . y <= h.
    std::vector<Vector> g;
    std::vector<double> h;
    for (const auto& hs : hrep.halfspaces) {
        g.push_back(vm.map.transpose() * hs.w);
        h.push_back(hs.offset() - hs.w.dot(vm.base));
    }
    {
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m); ++i) {
            const bool lo = std::isfinite(box.lower(i)), hi = std::isfinite(box.upper(i));
            if (lo && hi) {
                Vector row = Vector::Zero(static_cast<Eigen::Index>(n));
                row(k) = 1.0;
                g.push_back(row);
                h.push_back(box.upper(i) - box.lower(i));
            }
            k += lo || hi ? 1 : 2;
        }
    }

    const std::size_t rows = g.size();
    std::size_t artificials = 0;
    for (double v : h) artificials += v < 0.0 ? 1 : 0;
    const std::size_t cols = n + rows + artificials;
    Tableau::Matrix a = Tableau::Matrix::Zero(static_cast<Eigen::Index>(rows + 1), static_cast<Eigen::Index>(cols + 1));
    std::vector<std::size_t> basis(rows);
    std::size_t next_art = n + rows;
    double scale = 1.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double sign = h[r] < 0.0 ? -1.0 : 1.0;
        const auto ri = static_cast<Eigen::Index>(r);
        for (std::size_t j = 0; j < n; ++j) a(ri, static_cast<Eigen::Index>(j)) = sign * g[r](static_cast<Eigen::Index>(j));
        a(ri, static_cast<Eigen::Index>(n + r)) = sign;
        a(ri, static_cast<Eigen::Index>(cols)) = sign * h[r];
        scale = std::max(scale, std::abs(h[r]));
        if (sign > 0) {
            basis[r] = n + r;
        } else {
            a(ri, static_cast<Eigen::Index>(next_art)) = 1.0;
            basis[r] = next_art++;
        }
    }
    Tableau t(std::move(a), std::move(basis));

    std::vector<char> allowed(cols, 1);
    if (artificials > 0) {
        std::vector<double> c(cols, 0.0);
        for (std::size_t j = n + rows; j < cols; ++j) c[j] = 1.0;
        t.set_objective(c);
        t.run(allowed);
        if (t.objective() > 1e-9 * scale) return {LpStatus::Infeasible, {}, 0.0};
        // Drive zero-level artificials out of the basis where possible.
        for (std::size_t r = 0; r < rows; ++r) {
            if (t.basic(r) < n + rows) continue;
            for (std::size_t j = 0; j < n + rows; ++j) {
                if (std::abs(t.at(r, j)) > Tableau::kPivotTol) {
                    t.pivot(r, j);
                    break;
                }
            }
        }
        for (std::size_t j = n + rows; j < cols; ++j) allowed[j] = 0;
    }

    const double flip = sense == Sense::Maximize ? -1.0 : 1.0;
    const Vector cy = flip * (vm.map.transpose() * objective);
    std::vector<double> c(cols, 0.0);
    for (std::size_t j = 0; j < n; ++j) c[j] = cy(static_cast<Eigen::Index>(j));
    t.set_objective(c);
    if (t.run(allowed) == Tableau::Outcome::Unbounded) return {LpStatus::Unbounded, {}, 0.0};

    Vector y = Vector::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < rows; ++r)
        if (t.basic(r) < n) y(static_cast<Eigen::Index>(t.basic(r))) = std::max(t.rhs(r), 0.0);
    LpResult out;
    out.status = LpStatus::Feasible;
    out.point = vm.base + vm.map * y;
    out.value = objective.dot(out.point);
    return out;
}

// ---------------------------------------------------------------------------------
// Minimum norm point

Projection min_norm_point(const std::vector<Vector>& points, const Vector& anchor) {
    if (points.empty()) throw Error(ErrorKind::InvalidArgument, "min-norm point of an empty set");
    const std::size_t k = points.size();
    const auto m = anchor.size();
    std::vector<Vector> p;
    p.reserve(k);
    double scale = 1.0;
    for (const auto& r : points) {
        check_dim(static_cast<std::size_t>(r.size()), static_cast<std::size_t>(m), "point");
        p.push_back(r - anchor);
        scale = std::max(scale, p.back().squaredNorm());
    }

    std::size_t first = 0;
    for (std::size_t i = 1; i < k; ++i)
        if (p[i].squaredNorm() < p[first].squaredNorm()) first = i;
    std::vector<std::size_t> corral{first};
    std::vector<double> lambda{1.0};
    Vector x = p[first];

    auto combine = [&] {
        Vector v = Vector::Zero(m);
        for (std::size_t a = 0; a < corral.size(); ++a) v += lambda[a] * p[corral[a]];
        return v;
    };
    // Affine minimizer of the corral: x = p0 + D beta with D = [p_i - p0].
    auto affine_minimizer = [&] {
        const std::size_t s = corral.size();
        std::vector<double> alpha(s, 1.0);
        if (s == 1) return alpha;
        Eigen::MatrixXd d(m, static_cast<Eigen::Index>(s - 1));
        for (std::size_t a = 1; a < s; ++a) d.col(static_cast<Eigen::Index>(a - 1)) = p[corral[a]] - p[corral[0]];
        const Vector beta = d.completeOrthogonalDecomposition().solve(-p[corral[0]]);
        alpha[0] = 1.0 - beta.sum();
        for (std::size_t a = 1; a < s; ++a) alpha[a] = beta(static_cast<Eigen::Index>(a - 1));
        return alpha;
    };

    const std::size_t cap = 100 * (k + static_cast<std::size_t>(m)) + 100;
    for (std::size_t major = 0; major < cap; ++major) {
        std::size_t j = 0;
        double best = kInf;
        for (std::size_t i = 0; i < k; ++i) {
            const double v = p[i].dot(x);
            if (v < best) {
                best = v;
                j = i;
            }
        }
        if (x.squaredNorm() - best <= 1e-14 * scale) break;
        if (std::find(corral.begin(), corral.end(), j) != corral.end()) break;
        corral.push_back(j);
        lambda.push_back(0.0);

        for (std::size_t minor = 0; minor <= k; ++minor) {
            const std::vector<double> alpha = affine_minimizer();
            bool interior = true;
            for (double v : alpha) interior = interior && v > 1e-15;
            if (interior) {
                lambda = alpha;
                break;
            }
            double theta = 1.0;
            std::size_t drop = 0;
            for (std::size_t a = 0; a < alpha.size(); ++a) {
                if (alpha[a] > 1e-15) continue;
                const double th = lambda[a] / (lambda[a] - alpha[a]);
                if (th < theta) {
                    theta = th;
                    drop = a;
                }
            }
            for (std::size_t a = 0; a < alpha.size(); ++a) lambda[a] = theta * alpha[a] + (1.0 - theta) * lambda[a];
            lambda[drop] = 0.0;
            std::vector<std::size_t> keep_c;
            std::vector<double> keep_l;
            for (std::size_t a = 0; a < corral.size(); ++a) {
                if (lambda[a] > 1e-15) {
                    keep_c.push_back(corral[a]);
                    keep_l.push_back(lambda[a]);
                }
            }
            corral = std::move(keep_c);
            lambda = std::move(keep_l);
        }
        x = combine();
    }

    Projection out;
    out.weights.assign(k, 0.0);
    double total = 0.0;
    for (std::size_t a = 0; a < corral.size(); ++a) {
        if (lambda[a] < 1e-12) continue;
        out.weights[corral[a]] = lambda[a];
        total += lambda[a];
    }
    out.point = Vector::Zero(m);
    for (std::size_t i = 0; i < k; ++i) {
        out.weights[i] /= total;
        if (out.weights[i] > 0.0) out.point += out.weights[i] * points[i];
    }
    return out;
}

// ---------------------------------------------------------------------------------
// Frank-Wolfe

LossMinimum minimize_loss_over_hrep(const HRep& hrep, const Box& box, const LossSpec& loss, double tol) {
    const std::size_t m = box.dim();
    loss.validate(m);
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "Frank-Wolfe tolerance must be positive");
    const auto dm = static_cast<Eigen::Index>(m);
    LossMinimum out;

    auto lp = [&](const Vector& c) {
        ++out.lp_calls;
        LpResult r = lp_solve(hrep, box, c, Sense::Minimize);
        if (r.status == LpStatus::Infeasible) throw Error(ErrorKind::RegionEmpty, "feasible region is empty");
        if (r.status == LpStatus::Unbounded)
            throw Error(ErrorKind::RegionUnbounded, "feasible region is unbounded along a descent direction");
        return r.point;
    };

    // The loss is min over y in the target region T of sum c_i (x_i - y_i)^2. Optimal y
    // is clamp_T(x), so y can be confined to T intersected with the clamped bounding box
    // of the feasible region; that keeps the lifted problem compact.
    const Vector c = loss.coefficient();
    const Vector root_c = c.cwiseSqrt();
    Box target = loss.target_region();
    const Vector x0 = lp(Vector::Zero(dm));
    if (!target.is_bounded()) {
        for (Eigen::Index i = 0; i < dm; ++i) {
            if (std::isfinite(target.lower(i)) && std::isfinite(target.upper(i))) continue;
            Vector e = Vector::Zero(dm);
            e(i) = 1.0;
            const double lo = lp(e)(i), hi = lp(-e)(i);
            target.lower(i) = std::clamp(lo, target.lower(i), target.upper(i));
            target.upper(i) = std::clamp(hi, target.lower(i), target.upper(i));
        }
    }

    std::vector<Vector> ax{x0}, ay{target.clamp(x0)}, az{root_c.cwiseProduct(ax[0] - ay[0])};
    std::vector<double> lambda{1.0};
    Vector x = ax[0], y = ay[0];
    double lower = -kInf;

    for (std::size_t iter = 0;; ++iter) {
        const Vector d = x - y;
        const double f = c.dot(d.cwiseProduct(d));
        const Vector gx = 2.0 * c.cwiseProduct(d);
        const Vector sx = lp(gx);
        Vector sy(dm);
        for (Eigen::Index i = 0; i < dm; ++i) {
            // gradient in y is -gx
            if (gx(i) > 0.0) {
                sy(i) = target.upper(i);
            } else if (gx(i) < 0.0) {
                sy(i) = target.lower(i);
            } else {
                sy(i) = std::clamp(sx(i), target.lower(i), target.upper(i));
            }
        }
        const double gap = std::max(0.0, gx.dot(x - sx) - gx.dot(y - sy));
        lower = std::max(lower, f - gap);
        out.point = x;
        out.value = loss.value(x);
        out.lower_bound = std::min(lower, out.value);
        if (gap <= tol || iter >= 10000) break;

        bool duplicate = false;
        for (std::size_t a = 0; a < ax.size(); ++a)
            duplicate = duplicate || ((ax[a] - sx).lpNorm<Eigen::Infinity>() == 0.0 && (ay[a] - sy).lpNorm<Eigen::Infinity>() == 0.0);
        if (duplicate) break;  // no further progress possible in floating point
        ax.push_back(sx);
        ay.push_back(sy);
        az.push_back(root_c.cwiseProduct(sx - sy));

        const Projection proj = min_norm_point(az, Vector::Zero(dm));
        std::vector<Vector> nx, ny, nz;
        x = Vector::Zero(dm);
        y = Vector::Zero(dm);
        for (std::size_t a = 0; a < az.size(); ++a) {
            const double w = proj.weights[a];
            if (w <= 0.0) continue;
            x += w * ax[a];
            y += w * ay[a];
            nx.push_back(std::move(ax[a]));
            ny.push_back(std::move(ay[a]));
            nz.push_back(std::move(az[a]));
        }
        ax = std::move(nx);
        ay = std::move(ny);
        az = std::move(nz);
    }
    return out;
}

} // namespace moqc
