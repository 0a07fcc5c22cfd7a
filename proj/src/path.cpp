#include "pathctl/path.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pathctl {

namespace {

// Two times closer than this (relative to the horizon) name the same node.
double node_tolerance(double horizon) { return 1e-13 * std::max(1.0, horizon); }

void require_time(double t, double horizon, const char* what) {
    if (!(t >= -node_tolerance(horizon) && t <= horizon + node_tolerance(horizon)))
        throw std::domain_error(std::string(what) + ": time " + std::to_string(t) +
                                " outside [0, " + std::to_string(horizon) + "]");
}

}  // namespace

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.size() < 2) throw std::invalid_argument("TimeGrid: need at least two nodes");
    if (times_.front() != 0.0) throw std::invalid_argument("TimeGrid: first node must be 0");
    for (std::size_t k = 1; k < times_.size(); ++k) {
        if (!(times_[k] > times_[k - 1]) || !std::isfinite(times_[k]))
            throw std::invalid_argument("TimeGrid: nodes must be finite and strictly increasing");
    }
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t intervals) {
    if (!(horizon > 0.0) || intervals == 0) throw std::invalid_argument("TimeGrid::uniform: bad arguments");
    std::vector<double> t(intervals + 1);
    for (std::size_t k = 0; k <= intervals; ++k)
        t[k] = horizon * static_cast<double>(k) / static_cast<double>(intervals);
    t.back() = horizon;
    return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::dyadic(double horizon, int level) {
    if (level < 0 || level > 30) throw std::domain_error("TimeGrid::dyadic: level out of range");
    return uniform(horizon, std::size_t{1} << level);
}

std::size_t TimeGrid::segment(double s) const noexcept {
    auto it = std::upper_bound(times_.begin(), times_.end(), s);
    if (it == times_.begin()) return 0;
    const auto k = static_cast<std::size_t>(it - times_.begin()) - 1;
    return std::min(k, times_.size() - 2);
}

std::size_t TimeGrid::find(double s) const noexcept {
    const double tol = node_tolerance(horizon());
    auto it = std::lower_bound(times_.begin(), times_.end(), s - tol);
    if (it != times_.end() && std::abs(*it - s) <= tol) return static_cast<std::size_t>(it - times_.begin());
    return times_.size();
}

Path::Path(TimeGrid grid, Matrix values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.cols()) != grid_.size())
        throw std::invalid_argument("Path: values must have one column per grid node");
    if (values_.rows() < 1) throw std::invalid_argument("Path: dimension must be positive");
    if (!values_.allFinite()) throw std::invalid_argument("Path: values must be finite");
}

Path Path::constant(const TimeGrid& grid, const Vector& value) {
    Matrix v(value.size(), static_cast<Eigen::Index>(grid.size()));
    v.colwise() = value;
    return Path(grid, std::move(v));
}

Vector Path::at(double s) const {
    s = std::clamp(s, 0.0, horizon());
    const std::size_t k = grid_.segment(s);
    const double t0 = grid_[k], t1 = grid_[k + 1];
    const double lambda = (s - t0) / (t1 - t0);
    return node(k) + lambda * (node(k + 1) - node(k));
}

void Path::hold_from(std::size_t k, const Vector& v) {
    if (v.size() != values_.rows()) throw std::invalid_argument("Path::hold_from: dimension mismatch");
    if (!v.allFinite()) throw std::invalid_argument("Path: values must be finite");
    for (auto j = static_cast<Eigen::Index>(k); j < values_.cols(); ++j) values_.col(j) = v;
}

Path Path::with_node(double s) const {
    const double tol = node_tolerance(horizon());
    require_time(s, horizon(), "Path::with_node");
    if (grid_.find(s) != grid_.size() || s <= tol || s >= horizon() - tol) return *this;
    return with_nodes(std::span<const double>(&s, 1));
}

Path Path::with_nodes(std::span<const double> extra) const {
    std::vector<double> t(grid_.times().begin(), grid_.times().end());
    const double tol = node_tolerance(horizon());
    for (double s : extra) {
        require_time(s, horizon(), "Path::with_nodes");
        if (s > tol && s < horizon() - tol) t.push_back(s);
    }
    std::sort(t.begin(), t.end());
    std::vector<double> merged;
    merged.reserve(t.size());
    for (double s : t)
        if (merged.empty() || s - merged.back() > tol) merged.push_back(s);
    merged.back() = horizon();
    if (merged.size() == grid_.size()) return *this;
    return resample(*this, TimeGrid(std::move(merged)));
}

TimeGrid merge(const TimeGrid& a, const TimeGrid& b) {
    if (std::abs(a.horizon() - b.horizon()) > node_tolerance(a.horizon()))
        throw std::invalid_argument("merge: grids span different horizons");
    if (a == b) return a;
    std::vector<double> t;
    t.reserve(a.size() + b.size());
    std::merge(a.times().begin(), a.times().end(), b.times().begin(), b.times().end(), std::back_inserter(t));
    const double tol = node_tolerance(a.horizon());
    std::vector<double> out;
    out.reserve(t.size());
    for (double s : t)
        if (out.empty() || s - out.back() > tol) out.push_back(s);
    out.back() = a.horizon();
    return TimeGrid(std::move(out));
}

Path resample(const Path& path, const TimeGrid& grid) {
    if (grid == path.grid()) return path;
    Matrix v(static_cast<Eigen::Index>(path.dim()), static_cast<Eigen::Index>(grid.size()));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const std::size_t hit = path.grid().find(grid[k]);
        v.col(static_cast<Eigen::Index>(k)) = hit != path.size() ? Vector(path.node(hit)) : path.at(grid[k]);
    }
    return Path(grid, std::move(v));
}

Path combine(double alpha, const Path& x, double beta, const Path& y) {
    if (x.dim() != y.dim()) throw std::invalid_argument("combine: dimension mismatch");
    const TimeGrid g = merge(x.grid(), y.grid());
    const Path xr = resample(x, g), yr = resample(y, g);
    return Path(g, alpha * xr.values() + beta * yr.values());
}

double sup_norm(const Path& path) {
    return path.values().colwise().norm().maxCoeff();
}

double seminorm(const Path& path, double t) {
    require_time(t, path.horizon(), "seminorm");
    double best = path.at(t).norm();
    for (std::size_t k = 0; k < path.size() && path.time(k) <= t; ++k) best = std::max(best, path.node(k).norm());
    return best;
}

Path stop(const Path& path, double t) {
    require_time(t, path.horizon(), "stop");
    t = std::clamp(t, 0.0, path.horizon());
    Path out = path.with_node(t);
    const std::size_t k = out.grid().find(t);
    const std::size_t first = k == out.size() ? 0 : k;  // t = 0 within tolerance of node 0
    Matrix v = out.values();
    const Vector frozen = v.col(static_cast<Eigen::Index>(first));
    for (std::size_t j = first + 1; j < out.size(); ++j) v.col(static_cast<Eigen::Index>(j)) = frozen;
    return Path(out.grid(), std::move(v));
}

double stopped_distance(const GaugePoint& a, const GaugePoint& b) {
    return sup_norm(combine(1.0, stop(a.path, a.t), -1.0, stop(b.path, b.t)));
}

double d_infinity(const GaugePoint& a, const GaugePoint& b) {
    return std::abs(a.t - b.t) + stopped_distance(a, b);
}

Path polygonal_from_nodes(int level, double horizon, const Matrix& nodes) {
    if (level < 0 || level > 30) throw std::domain_error("polygonal_from_nodes: level out of range");
    const auto expected = (std::size_t{1} << level) + 1;
    if (static_cast<std::size_t>(nodes.cols()) != expected)
        throw std::domain_error("polygonal_from_nodes: expected " + std::to_string(expected) + " nodes, got " +
                                std::to_string(nodes.cols()));
    return Path(TimeGrid::dyadic(horizon, level), nodes);
}

double oscillation(const Path& path, double t, double delta) {
    if (!(delta > 0.0)) throw std::domain_error("oscillation: delta must be positive");
    const Path x = stop(path, t);
    const double T = x.horizon();
    const auto times = x.grid().times();
    double best = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = times[i];
        const Vector xr = x.node(i);
        for (std::size_t j = i + 1; j < x.size() && times[j] - r <= delta; ++j)
            best = std::max(best, (x.node(j) - xr).norm());
        for (double s : {r - delta, r + delta})
            if (s >= 0.0 && s <= T) best = std::max(best, (x.at(s) - xr).norm());
    }
    return best;
}

void write_csv(std::ostream& out, const Path& path) {
    out << 's';
    for (std::size_t i = 1; i <= path.dim(); ++i) out << ",x" << i;
    out << '\n';
    out.precision(17);
    for (std::size_t k = 0; k < path.size(); ++k) {
        out << path.time(k);
        for (std::size_t i = 0; i < path.dim(); ++i) out << ',' << path.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        out << '\n';
    }
}

Path read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("read_csv: empty input");
    std::size_t dim = 0;
    {
        std::stringstream header(line);
        std::string cell;
        std::getline(header, cell, ',');
        if (cell != "s") throw std::invalid_argument("read_csv: header must start with 's'");
        while (std::getline(header, cell, ',')) {
            if (cell != "x" + std::to_string(dim + 1)) throw std::invalid_argument("read_csv: bad header column " + cell);
            ++dim;
        }
    }
    if (dim == 0) throw std::invalid_argument("read_csv: no coordinate columns");
    std::vector<double> times;
    std::vector<double> flat;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(row, cell, ',')) {
            const double v = std::stod(cell);
            (col == 0 ? times : flat).push_back(v);
            ++col;
        }
        if (col != dim + 1) throw std::invalid_argument("read_csv: row with wrong number of columns");
    }
    Matrix v(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(times.size()));
    for (std::size_t k = 0; k < times.size(); ++k)
        for (std::size_t i = 0; i < dim; ++i) v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = flat[k * dim + i];
    return Path(TimeGrid(std::move(times)), std::move(v));
}

std::string to_csv(const Path& path) {
    std::ostringstream out;
    write_csv(out, path);
    return out.str();
}

Path path_from_csv(const std::string& text) {
    std::istringstream in(text);
    return read_csv(in);
}

}  // namespace pathctl
