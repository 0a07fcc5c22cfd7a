#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pathctl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Strictly increasing time nodes 0 = t_0 < ... < t_{N-1} = T.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> times);

    static TimeGrid uniform(double horizon, std::size_t intervals);
    /// Nodes t_j = jT/2^level, j = 0..2^level.
    static TimeGrid dyadic(double horizon, int level);

    std::span<const double> times() const noexcept { return times_; }
    std::size_t size() const noexcept { return times_.size(); }
    double horizon() const noexcept { return times_.back(); }
    double operator[](std::size_t k) const noexcept { return times_[k]; }

    /// Index k of the segment [t_k, t_{k+1}] containing s (clamped to the
    /// last segment at s = T).
    std::size_t segment(double s) const noexcept;
    /// Index of a node equal to s, or size() if s is not a node.
    std::size_t find(double s) const noexcept;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    std::vector<double> times_;
};

/// Continuous path in R^d, piecewise linear between the grid nodes.
/// values is d x N with one column per grid node.
class Path {
public:
    Path(TimeGrid grid, Matrix values);

    static Path constant(const TimeGrid& grid, const Vector& value);

    template <typename F>
    static Path sample(const TimeGrid& grid, std::size_t dim, F&& f) {
        Matrix v(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(grid.size()));
        for (std::size_t k = 0; k < grid.size(); ++k) v.col(static_cast<Eigen::Index>(k)) = f(grid[k]);
        return Path(grid, std::move(v));
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    const Matrix& values() const noexcept { return values_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t size() const noexcept { return grid_.size(); }
    double horizon() const noexcept { return grid_.horizon(); }
    double time(std::size_t k) const noexcept { return grid_[k]; }
    auto node(std::size_t k) const { return values_.col(static_cast<Eigen::Index>(k)); }

    /// Linear interpolation; s is clamped to [0, T].
    Vector at(double s) const;

    /// Same path with s added to the grid (no-op when s is already a node).
    Path with_node(double s) const;
    /// Same path with all the given times added to the grid.
    Path with_nodes(std::span<const double> extra) const;

    /// Nodes k, ..., N-1 take the value v. Used to grow a path step by step
    /// while keeping it frozen after the last computed node.
    void hold_from(std::size_t k, const Vector& v);

private:
    TimeGrid grid_;
    Matrix values_;
};

/// A point (t, x) of [0,T] x C([0,T];R^d).
struct GaugePoint {
    double t;
    Path path;
};

/// Union of the grids of two paths over the same horizon.
TimeGrid merge(const TimeGrid& a, const TimeGrid& b);
/// Evaluate path on another grid spanning the same horizon.
Path resample(const Path& path, const TimeGrid& grid);
/// alpha * x + beta * y on the merged grid.
Path combine(double alpha, const Path& x, double beta, const Path& y);

/// ||x||_T. The squared norm is convex along each segment, so the node
/// maximum is the exact supremum.
double sup_norm(const Path& path);
/// ||x||_t = ||x(. ^ t)||_T.
double seminorm(const Path& path, double t);
/// x(. ^ t): t is inserted into the grid and later nodes take the value x(t).
Path stop(const Path& path, double t);
/// |t - t'| + ||x(. ^ t) - x'(. ^ t')||_T.
double d_infinity(const GaugePoint& a, const GaugePoint& b);
/// ||x(. ^ t) - x'(. ^ t')||_T.
double stopped_distance(const GaugePoint& a, const GaugePoint& b);

/// Polygonal through y_j at the dyadic nodes jT/2^n; y holds 2^n + 1 columns.
Path polygonal_from_nodes(int level, double horizon, const Matrix& nodes);

/// sup over |r - s| <= delta of |x(r ^ t) - x(s ^ t)|. Exact on piecewise
/// linear paths: the supremum of a convex function over the band is attained
/// at a vertex, i.e. a node paired with another node or with node +- delta.
double oscillation(const Path& path, double t, double delta);

/// CSV with header s,x1,...,xd and one row per node.
void write_csv(std::ostream& out, const Path& path);
Path read_csv(std::istream& in);
std::string to_csv(const Path& path);
Path path_from_csv(const std::string& text);

}  // namespace pathctl
