#include "pathctl/lifted_hjb.hpp"

#include <boost/math/special_functions/lambert_w.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>

namespace pathctl {

namespace {

double tolerance(double horizon) { return 1e-13 * std::max(1.0, horizon); }

// max over sampled t of the operator norm of Phi(t), sqrt(sum phi_j(t)^2).
double stacking_norm_bound(const LiftedProblem& p) {
    double out = 0.0;
    constexpr int samples = 256;
    for (int i = 0; i <= samples; ++i) {
        const double t = p.horizon * i / samples;
        double s = 0.0;
        for (const auto& w : p.weights) s += w.value(t) * w.value(t);
        out = std::max(out, std::sqrt(s));
    }
    return out;
}

struct Coefficients {
    Vector b;
    Matrix a;  // eps^2 I + sigma_phi sigma_phi^T
    double f;
};

Coefficients coefficients(const LiftedProblem& p, double eps, double t, const Vector& y, double action) {
    const Matrix s = p.diffusion_phi(t, y, action);
    Matrix a = s * s.transpose();
    a.diagonal().array() += eps * eps;
    return {p.drift_phi(t, y, action), std::move(a), p.running_cost(t, y, action)};
}

double rate(const Coefficients& c, const Vector& h) {
    double r = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i) r += std::abs(c.b(i)) / h(i) + c.a(i, i) / (h(i) * h(i));
    return r;
}

// Row-wise diagonal dominance of the cross stencil.
bool dominant(const Matrix& a, const Vector& h) {
    for (Eigen::Index i = 0; i < h.size(); ++i) {
        double off = 0.0;
        for (Eigen::Index j = 0; j < h.size(); ++j)
            if (j != i) off += std::abs(a(i, j)) / (h(i) * h(j));
        if (a(i, i) / (h(i) * h(i)) < off - 1e-12 * (1.0 + off)) return false;
    }
    return true;
}

void check_problem(const LiftedProblem& p) {
    if (p.weights.empty()) throw std::invalid_argument("LiftedProblem: at least one weight is required");
    if (!p.drift || !p.diffusion || !p.terminal)
        throw std::invalid_argument("LiftedProblem: drift, diffusion and terminal are required");
    if (p.actions.empty()) throw std::invalid_argument("LiftedProblem: empty action set");
    if (!(p.horizon > 0.0) || !std::isfinite(p.horizon))
        throw std::invalid_argument("LiftedProblem: horizon must be positive");
}

}  // namespace

Matrix LiftedProblem::stacking(double t) const { return stacking_matrix(weights, t, dim); }

Vector LiftedProblem::drift_phi(double t, const Vector& y, double a) const {
    const Vector b = drift(t, y, a);
    if (b.size() != static_cast<Eigen::Index>(dim)) throw std::invalid_argument("lifted drift must return d values");
    return stacking(t) * b;
}

Matrix LiftedProblem::diffusion_phi(double t, const Vector& y, double a) const {
    const Matrix s = diffusion(t, y, a);
    if (s.rows() != static_cast<Eigen::Index>(dim) || s.cols() != static_cast<Eigen::Index>(noise_dim))
        throw std::invalid_argument("lifted diffusion must return a d x noise_dim matrix");
    return stacking(t) * s;
}

bool same_weights(std::span<const Weight> a, std::span<const Weight> b, double horizon) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].name != b[i].name || a[i].knots != b[i].knots || a[i].constant != b[i].constant) return false;
        for (double f : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            const double t = f * horizon;
            if (a[i].value(t) != b[i].value(t) || a[i].derivative(t) != b[i].derivative(t)) return false;
        }
    }
    return true;
}

LiftedProblem build_lifted(const Cylindrical<LiftedDrift>& drift, const Cylindrical<LiftedDiffusion>& diffusion,
                           const Cylindrical<LiftedRunning>& running, const Cylindrical<LiftedTerminal>& terminal,
                           std::size_t dim, std::size_t noise_dim, std::vector<double> actions, double horizon) {
    const auto& w = drift.weights;
    if (!same_weights(w, diffusion.weights, horizon) || !same_weights(w, terminal.weights, horizon) ||
        (running.core && !same_weights(w, running.weights, horizon)))
        throw std::invalid_argument("build_lifted: coefficients must share one weight list");
    LiftedProblem p;
    p.dim = dim;
    p.noise_dim = noise_dim;
    p.weights = w;
    p.drift = drift.core;
    p.diffusion = diffusion.core;
    p.running = running.core;
    p.terminal = terminal.core;
    p.actions = std::move(actions);
    p.horizon = horizon;
    p.drift_bound = drift.bound;
    p.diffusion_bound = diffusion.bound;
    p.running_bound = running.core ? running.bound : 0.0;
    check_problem(p);
    return p;
}

ControlProblem path_problem(const LiftedProblem& problem) {
    check_problem(problem);
    const auto lift = [w = problem.weights](double t, const Path& x) { return lifted_coordinates(w, x, t); };
    ControlProblem out;
    out.id = "lifted";
    out.sde.dim = problem.dim;
    out.sde.noise_dim = problem.noise_dim;
    out.sde.drift = [lift, b = problem.drift](double t, const Path& x, double a) { return b(t, lift(t, x), a); };
    out.sde.diffusion = [lift, s = problem.diffusion](double t, const Path& x, double a) {
        return s(t, lift(t, x), a);
    };
    out.sde.actions = problem.actions;
    out.sde.bound = std::max(problem.drift_bound, problem.diffusion_bound);
    if (problem.running) {
        out.running.name = "lifted running reward";
        out.running.dim = problem.dim;
        out.running.eval = [lift, f = problem.running](double t, const Path& x, double a) {
            return f(t, lift(t, x), a);
        };
    }
    out.terminal.eval = [lift, g = problem.terminal](const Path& x) { return g(lift(x.horizon(), x)); };
    out.horizon = problem.horizon;
    return out;
}

GridSolution::GridSolution(Vector lo, Vector hi, std::size_t points, std::vector<double> times, double epsilon)
    : lo_(std::move(lo)), hi_(std::move(hi)), points_(points), nodes_(1), times_(std::move(times)), epsilon_(epsilon) {
    if (lo_.size() != hi_.size() || lo_.size() == 0) throw std::invalid_argument("GridSolution: box shape mismatch");
    if (points_ < 3) throw std::invalid_argument("GridSolution: need at least 3 points per axis");
    if (times_.size() < 2) throw std::invalid_argument("GridSolution: need at least two time levels");
    h_ = (hi_ - lo_) / static_cast<double>(points_ - 1);
    if (!(h_.minCoeff() > 0.0)) throw std::invalid_argument("GridSolution: empty box");
    for (Eigen::Index i = 0; i < lo_.size(); ++i) nodes_ *= points_;
    values_.assign(times_.size(), std::vector<double>(nodes_, 0.0));
}

std::vector<std::size_t> GridSolution::multi_index(std::size_t flat) const {
    std::vector<std::size_t> idx(dim());
    for (auto& i : idx) {
        i = flat % points_;
        flat /= points_;
    }
    return idx;
}

std::size_t GridSolution::flat_index(std::span<const std::size_t> idx) const {
    std::size_t flat = 0;
    for (std::size_t i = idx.size(); i-- > 0;) flat = flat * points_ + idx[i];
    return flat;
}

Vector GridSolution::node(std::size_t flat) const {
    Vector y(lo_.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        y(i) = lo_(i) + h_(i) * static_cast<double>(flat % points_);
        flat /= points_;
    }
    return y;
}

double GridSolution::at(const std::vector<double>& u, std::span<const std::ptrdiff_t> idx) const {
    const auto n = static_cast<std::ptrdiff_t>(points_);
    // Extrapolate along the first out-of-range axis; recursion handles corners.
    for (std::size_t a = 0; a < idx.size(); ++a) {
        if (idx[a] >= 0 && idx[a] < n) continue;
        std::ptrdiff_t near[max_grid_dim], far[max_grid_dim];
        std::copy(idx.begin(), idx.end(), near);
        std::copy(idx.begin(), idx.end(), far);
        near[a] = idx[a] < 0 ? 0 : n - 1;
        far[a] = idx[a] < 0 ? 1 : n - 2;
        if (idx[a] < -1 || idx[a] > n) throw std::out_of_range("GridSolution::at: index more than one step outside");
        return 2.0 * at(u, {near, idx.size()}) - at(u, {far, idx.size()});
    }
    std::size_t flat = 0;
    for (std::size_t a = idx.size(); a-- > 0;) flat = flat * points_ + static_cast<std::size_t>(idx[a]);
    return u[flat];
}

Interpolated GridSolution::value(double t, const Vector& y) const {
    const double T = times_.back();
    const double tol = tolerance(T);
    if (!(t >= -tol && t <= T + tol)) throw std::domain_error("GridSolution::value: t outside [0, T]");
    if (y.size() != lo_.size()) throw std::invalid_argument("GridSolution::value: dimension mismatch");
    const std::size_t L = times_.size() - 1;
    const double dt = T / static_cast<double>(L);
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(0.0, std::floor(t / dt))), L - 1);
    const double wt = std::clamp((t - times_[n]) / (times_[n + 1] - times_[n]), 0.0, 1.0);

    const auto k = static_cast<std::size_t>(y.size());
    std::size_t cell[max_grid_dim];
    double w[max_grid_dim];
    bool outside = false;
    for (std::size_t i = 0; i < k; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const double s = (y(ii) - lo_(ii)) / h_(ii);
        const double edge = 1e-9;
        outside = outside || s < -edge || s > static_cast<double>(points_ - 1) + edge;
        cell[i] = static_cast<std::size_t>(std::clamp(std::floor(s), 0.0, static_cast<double>(points_ - 2)));
        w[i] = s - static_cast<double>(cell[i]);
    }
    double acc = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{1} << k); ++corner) {
        double weight = 1.0;
        std::size_t idx[max_grid_dim];
        for (std::size_t i = 0; i < k; ++i) {
            const bool up = (corner >> i) & 1u;
            idx[i] = cell[i] + (up ? 1 : 0);
            weight *= up ? w[i] : 1.0 - w[i];
        }
        const std::size_t flat = flat_index({idx, k});
        acc += weight * ((1.0 - wt) * values_[n][flat] + wt * values_[n + 1][flat]);
    }
    return {acc, outside};
}

Core GridSolution::core() const {
    auto self = std::make_shared<const GridSolution>(*this);
    const double T = times_.back();
    const double dt = T / static_cast<double>(times_.size() - 1);
    Core c;
    c.value = [self](double t, const Vector& y) { return self->value(t, y).value; };
    c.dt = [self, T, dt](double t, const Vector& y) {
        const double a = std::max(0.0, t - dt), b = std::min(T, t + dt);
        return (self->value(b, y).value - self->value(a, y).value) / (b - a);
    };
    c.dy = [self](double t, const Vector& y) {
        Vector g(y.size());
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            Vector p = y, m = y;
            const double h = self->spacing()(i);
            p(i) += h;
            m(i) -= h;
            g(i) = (self->value(t, p).value - self->value(t, m).value) / (2.0 * h);
        }
        return g;
    };
    c.dyy = [self](double t, const Vector& y) {
        const Eigen::Index k = y.size();
        const Vector& h = self->spacing();
        const auto v = [&](const Vector& z) { return self->value(t, z).value; };
        Matrix H(k, k);
        const double v0 = v(y);
        for (Eigen::Index i = 0; i < k; ++i) {
            Vector p = y, m = y;
            p(i) += h(i);
            m(i) -= h(i);
            H(i, i) = (v(p) - 2.0 * v0 + v(m)) / (h(i) * h(i));
            for (Eigen::Index j = 0; j < i; ++j) {
                Vector pp = y, pm = y, mp = y, mm = y;
                pp(i) += h(i), pp(j) += h(j);
                pm(i) += h(i), pm(j) -= h(j);
                mp(i) -= h(i), mp(j) += h(j);
                mm(i) -= h(i), mm(j) -= h(j);
                H(i, j) = H(j, i) = (v(pp) - v(pm) - v(mp) + v(mm)) / (4.0 * h(i) * h(j));
            }
        }
        return H;
    };
    return c;
}

std::pair<Vector, Vector> reachable_box(const LiftedProblem& problem, const GridConfig& cfg) {
    check_problem(problem);
    const auto k = static_cast<Eigen::Index>(problem.lifted_dim());
    if (cfg.centers.empty()) throw std::invalid_argument("reachable_box: no centers given");
    if (!std::isfinite(problem.drift_bound) || !std::isfinite(problem.diffusion_bound))
        throw std::invalid_argument("reachable_box: unbounded coefficients need an explicit box");
    const double T = problem.horizon;
    const double phi = stacking_norm_bound(problem);
    const double reach = (phi * problem.drift_bound + 3.0 * phi * problem.diffusion_bound * std::sqrt(T)) * T;
    // a unit floor keeps static problems on a usable box
    const double half = (1.0 + cfg.margin) * std::max(reach, 1.0);
    Vector lo = Vector::Constant(k, std::numeric_limits<double>::infinity());
    Vector hi = -lo;
    for (const auto& c : cfg.centers) {
        if (c.size() != k) throw std::invalid_argument("reachable_box: center dimension mismatch");
        lo = lo.cwiseMin(c);
        hi = hi.cwiseMax(c);
    }
    return {lo.array() - half, hi.array() + half};
}

GridSolution solve(const LiftedProblem& problem, double epsilon, const GridConfig& cfg) {
    check_problem(problem);
    const std::size_t k = problem.lifted_dim();
    if (k > max_grid_dim)
        throw std::invalid_argument("solve: lifted dimension " + std::to_string(k) + " exceeds the grid cap of " +
                                    std::to_string(max_grid_dim) + "; use Monte Carlo value estimates instead");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::domain_error("solve: epsilon must lie in (0, 1)");
    if (cfg.time_levels == 0) throw std::invalid_argument("solve: need at least one time level");
    if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0)) throw std::invalid_argument("solve: cfl fraction must lie in (0, 1]");

    Vector lo, hi;
    if (cfg.lo && cfg.hi) {
        lo = *cfg.lo;
        hi = *cfg.hi;
    } else {
        std::tie(lo, hi) = reachable_box(problem, cfg);
    }
    if (lo.size() != static_cast<Eigen::Index>(k)) throw std::invalid_argument("solve: box dimension mismatch");

    const double T = problem.horizon;
    const std::size_t L = cfg.time_levels;
    std::vector<double> times(L + 1);
    for (std::size_t n = 0; n <= L; ++n) times[n] = T * static_cast<double>(n) / static_cast<double>(L);
    times.back() = T;
    GridSolution sol(lo, hi, cfg.points, times, epsilon);
    const std::size_t N = sol.nodes();
    const Vector h = sol.spacing();

    std::vector<Vector> y(N);
    std::vector<std::vector<std::ptrdiff_t>> idx(N);
    for (std::size_t i = 0; i < N; ++i) {
        y[i] = sol.node(i);
        const auto m = sol.multi_index(i);
        idx[i].assign(m.begin(), m.end());
    }

    // Stability pre-pass over every stored level and the midpoints between them.
    std::vector<double> node_rate(N, 0.0);
    std::vector<char> node_dominant(N, 1);
    for (std::size_t s = 0; s <= 2 * L; ++s) {
        const double t = T * static_cast<double>(s) / static_cast<double>(2 * L);
        for_each_index(cfg.exec, N, [&](std::size_t i) {
            for (double a : problem.actions) {
                const Coefficients c = coefficients(problem, epsilon, t, y[i], a);
                node_rate[i] = std::max(node_rate[i], rate(c, h));
                if (!dominant(c.a, h)) node_dominant[i] = 0;
            }
        });
    }
    SolveReport& rep = sol.report;
    rep.max_rate = *std::max_element(node_rate.begin(), node_rate.end());
    rep.monotone = std::all_of(node_dominant.begin(), node_dominant.end(), [](char c) { return c != 0; });
    const double dt = T / static_cast<double>(L);
    rep.substeps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(dt * rep.max_rate / cfg.cfl - 1e-12)));
    rep.refined = rep.substeps > 1;
    const double step = dt / static_cast<double>(rep.substeps);
    rep.courant = step * rep.max_rate;

    std::vector<double>& terminal = sol.level(L);
    for_each_index(cfg.exec, N, [&](std::size_t i) { terminal[i] = problem.terminal(y[i]); });

    std::vector<double> u = terminal, next(N);
    for (std::size_t n = L; n-- > 0;) {
        for (std::size_t q = 0; q < rep.substeps; ++q) {
            // Coefficients at the known (later) time of the substep.
            const double t = times[n + 1] - step * static_cast<double>(q);
            for_each_index(cfg.exec, N, [&](std::size_t i) {
                std::ptrdiff_t at[max_grid_dim];
                const auto probe = [&](std::size_t a, std::ptrdiff_t da, std::size_t b, std::ptrdiff_t db) {
                    std::copy(idx[i].begin(), idx[i].end(), at);
                    at[a] += da;
                    at[b] += db;
                    return sol.at(u, {at, k});
                };
                const double u0 = u[i];
                double best = -std::numeric_limits<double>::infinity();
                for (double action : problem.actions) {
                    const Coefficients c = coefficients(problem, epsilon, t, y[i], action);
                    double acc = c.f;
                    for (std::size_t a = 0; a < k; ++a) {
                        const auto ai = static_cast<Eigen::Index>(a);
                        const double up = probe(a, 1, a, 0), down = probe(a, -1, a, 0);
                        acc += c.b(ai) > 0.0 ? c.b(ai) * (up - u0) / h(ai) : c.b(ai) * (u0 - down) / h(ai);
                        acc += 0.5 * c.a(ai, ai) * (up - 2.0 * u0 + down) / (h(ai) * h(ai));
                        for (std::size_t b = 0; b < a; ++b) {
                            const auto bi = static_cast<Eigen::Index>(b);
                            const double aij = c.a(ai, bi);
                            if (aij == 0.0) continue;
                            // Positive-coefficient seven-point cross stencil.
                            const double axis = probe(a, 1, b, 0) + probe(a, -1, b, 0) + probe(b, 1, a, 0) +
                                                probe(b, -1, a, 0);
                            const double diag = aij > 0.0 ? probe(a, 1, b, 1) + probe(a, -1, b, -1)
                                                          : probe(a, 1, b, -1) + probe(a, -1, b, 1);
                            const double sign = aij > 0.0 ? 1.0 : -1.0;
                            acc += aij * sign * (2.0 * u0 + diag - axis) / (2.0 * h(ai) * h(bi));
                        }
                    }
                    best = std::max(best, acc);
                }
                next[i] = u0 + step * best;
            });
            u.swap(next);
        }
        sol.level(n) = u;
    }
    return sol;
}

Interpolated reconstruct(const GridSolution& solution, const LiftedProblem& problem, const GaugePoint& p) {
    if (p.path.dim() != problem.dim) throw std::invalid_argument("reconstruct: path dimension mismatch");
    return solution.value(p.t, lifted_coordinates(problem.weights, p.path, p.t));
}

CylindricalFunctional as_cylindrical(const GridSolution& solution, const LiftedProblem& problem) {
    return CylindricalFunctional(solution.core(), problem.weights, problem.dim);
}

BoundsReport verify_bounds(const GridSolution& solution, const LiftedProblem& problem, double q,
                           double fit_fraction) {
    const std::size_t k = solution.dim();
    if (k != problem.lifted_dim()) throw std::invalid_argument("verify_bounds: problem does not match the grid");
    const auto& times = solution.times();
    const double T = times.back();
    const std::size_t L = times.size() - 1;
    const Vector& h = solution.spacing();
    const std::size_t N = solution.nodes();

    BoundsReport out;
    out.fit_from = fit_fraction * T;
    // Worst normalized negative second difference per level, and the largest
    // vertical derivative.
    std::vector<double> worst(L + 1, 0.0), slope(L + 1, 0.0);
    for (std::size_t n = 0; n <= L; ++n) {
        const Matrix phi = problem.stacking(times[n]);
        const auto& u = solution.level(n);
        for (std::size_t i = 0; i < N; ++i) {
            const auto m = solution.multi_index(i);
            const Vector y = solution.node(i);
            const double weight = std::pow(1.0 + y.norm(), 3.0 * q);
            Vector grad(static_cast<Eigen::Index>(k));
            for (std::size_t a = 0; a < k; ++a) {
                const auto ai = static_cast<Eigen::Index>(a);
                std::ptrdiff_t up[max_grid_dim], down[max_grid_dim];
                std::copy(m.begin(), m.end(), up);
                std::copy(m.begin(), m.end(), down);
                const bool lower = m[a] == 0, upper = m[a] + 1 == solution.points();
                up[a] += upper ? 0 : 1;
                down[a] -= lower ? 0 : 1;
                const double uu = solution.at(n, {up, k}), ud = solution.at(n, {down, k});
                grad(ai) = (uu - ud) / (h(ai) * static_cast<double>(up[a] - down[a]));
                if (lower || upper) continue;
                const double second = (uu - 2.0 * u[i] + ud) / (h(ai) * h(ai));
                // rounding in the difference itself is not curvature
                const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                                     (std::abs(uu) + 2.0 * std::abs(u[i]) + std::abs(ud)) / (h(ai) * h(ai));
                if (-second > noise) worst[n] = std::max(worst[n], -second / weight);
            }
            slope[n] = std::max(slope[n], (phi.transpose() * grad).norm());
        }
    }
    out.vertical_bound = *std::max_element(slope.begin(), slope.end());

    // Terminal data is an input, not part of the bound.
    const auto need = [&](double C, std::size_t n) { return C * std::exp(C * (T - times[n])); };
    for (std::size_t n = 0; n < L; ++n) {
        if (times[n] < out.fit_from || worst[n] <= 0.0) continue;
        const double tau = T - times[n];
        const double c = boost::math::lambert_w0(tau * worst[n]) / tau;
        out.semiconcavity_constant = std::max(out.semiconcavity_constant, c);
    }
    for (std::size_t n = 0; n < L; ++n)
        if (times[n] < out.fit_from && worst[n] > need(out.semiconcavity_constant, n) * (1.0 + 1e-12))
            out.semiconcavity_holds = false;
    return out;
}

double fit_exponential_constant(std::span<const double> eps, std::span<const double> errors, double horizon) {
    if (eps.size() != errors.size() || eps.empty())
        throw std::invalid_argument("fit_exponential_constant: need matching nonempty inputs");
    if (!(horizon > 0.0)) throw std::domain_error("fit_exponential_constant: horizon must be positive");
    double ratio = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0)) throw std::domain_error("fit_exponential_constant: epsilon must be positive");
        ratio = std::max(ratio, errors[i] / eps[i]);
    }
    // C e^{C T} = ratio  <=>  C = W(T ratio) / T
    return ratio > 0.0 ? boost::math::lambert_w0(horizon * ratio) / horizon : 0.0;
}

void write_csv(std::ostream& out, const GridSolution& solution) {
    out << "t";
    for (std::size_t i = 1; i <= solution.dim(); ++i) out << ",y" << i;
    out << ",value\n";
    out << std::setprecision(17);
    for (std::size_t n = 0; n < solution.times().size(); ++n)
        for (std::size_t i = 0; i < solution.nodes(); ++i) {
            out << solution.times()[n];
            const Vector y = solution.node(i);
            for (Eigen::Index j = 0; j < y.size(); ++j) out << ',' << y(j);
            out << ',' << solution.level(n)[i] << '\n';
        }
}

}  // namespace pathctl
