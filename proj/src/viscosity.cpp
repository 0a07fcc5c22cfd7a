#include "pathctl/viscosity.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace pathctl {

namespace {

double lhs(const ControlProblem& problem, const TestFunction& test, const GaugePoint& p) {
    if (!(p.t < problem.horizon)) throw std::domain_error("viscosity inequalities are posed for t < T");
    const PathDerivatives d = test.derivatives(p.t, p.path);
    return -d.horizontal + hamiltonian(problem, p.t, p.path, d.vertical1, d.vertical2).value;
}

}  // namespace

double subsolution_lhs(const ControlProblem& problem, double, const TestFunction& test, const GaugePoint& p) {
    return lhs(problem, test, p);
}

double supersolution_lhs(const ControlProblem& problem, double, const TestFunction& test, const GaugePoint& p,
                         Convention convention) {
    const double v = lhs(problem, test, p);
    return convention == Convention::natural ? v : -v;
}

TouchingReport touching_report(const PathFunctional& u, const TestFunction& test, const GaugePoint& p,
                               std::span<const GaugePoint> probes, Touching side, double tol, Execution exec) {
    for (const auto& q : probes)
        if (q.t < p.t) throw std::invalid_argument("touching_report: probes must not precede the touching time");
    const double sign = side == Touching::from_above ? 1.0 : -1.0;
    TouchingReport out;
    out.reference = u(p.t, p.path) - test(p.t, p.path);
    out.worst_violation = -std::numeric_limits<double>::infinity();
    out.worst_index = probes.size();
    std::vector<double> excess(probes.size());
    for_each_index(exec, probes.size(), [&](std::size_t i) {
        excess[i] = sign * ((u(probes[i].t, probes[i].path) - test(probes[i].t, probes[i].path)) - out.reference);
    });
    for (std::size_t i = 0; i < probes.size(); ++i)
        if (excess[i] > out.worst_violation) {
            out.worst_violation = excess[i];
            out.worst_index = i;
        }
    if (probes.empty()) out.worst_violation = 0.0;
    out.touching = out.worst_violation <= tol;
    return out;
}

std::vector<ResidualSample> interior_samples(const GridSolution& solution, std::size_t margin, std::size_t stride,
                                             double t_max) {
    if (stride == 0) throw std::invalid_argument("interior_samples: stride must be positive");
    std::vector<ResidualSample> out;
    const auto& times = solution.times();
    for (std::size_t n = 0; n < times.size(); ++n) {
        if (times[n] > t_max) break;
        for (std::size_t i = 0; i < solution.nodes(); ++i) {
            const auto idx = solution.multi_index(i);
            const bool inside = std::all_of(idx.begin(), idx.end(), [&](std::size_t j) {
                return j >= margin && j + margin < solution.points() && (j - margin) % stride == 0;
            });
            if (inside) out.push_back({times[n], solution.node(i)});
        }
    }
    return out;
}

ResidualTable classical_residual(const GridSolution& solution, const LiftedProblem& problem,
                                 std::span<const ResidualSample> samples, Execution exec) {
    if (solution.dim() != problem.lifted_dim())
        throw std::invalid_argument("classical_residual: problem does not match the grid");
    const CylindricalFunctional u = as_cylindrical(solution, problem);
    const Core& core = u.core();
    const double eps2 = solution.epsilon() * solution.epsilon();
    const double T = problem.horizon;
    const double dt = T / static_cast<double>(solution.times().size() - 1);
    const Vector& h = solution.spacing();

    ResidualTable out;
    out.rows.resize(samples.size());
    for_each_index(exec, samples.size(), [&](std::size_t k) {
        const double t = samples[k].t;
        const Vector& y = samples[k].y;
        const PathDerivatives d = u.derivatives_at(t, y);
        const Matrix hess = core.dyy(t, y);
        double best = -std::numeric_limits<double>::infinity();
        Vector drift;
        for (double a : problem.actions) {
            const Matrix s = problem.diffusion(t, y, a);
            const double v = problem.drift(t, y, a).dot(d.vertical1) +
                             0.5 * (s * s.transpose() * d.vertical2).trace() + problem.running_cost(t, y, a);
            if (v > best) {
                best = v;
                drift = problem.drift_phi(t, y, a);
            }
        }
        ResidualRow& row = out.rows[k];
        row.t = t;
        row.y = y;
        row.eps_term = 0.5 * eps2 * hess.trace();
        row.residual = d.horizontal + best + row.eps_term;
        row.lhs = -d.horizontal - best;

        // Taylor remainders: sup of |u_tt| and |D_ii u| over the stencil.
        const auto utt = [&](double c) {
            const double lo = std::max(0.0, c - dt), hi = std::min(T, c + dt), mid = 0.5 * (lo + hi);
            const double step = 0.5 * (hi - lo);
            return std::abs(core.value(hi, y) - 2.0 * core.value(mid, y) + core.value(lo, y)) / (step * step);
        };
        double time_part = utt(t);
        if (t - dt >= 0.0) time_part = std::max(time_part, utt(t - dt));
        if (t + dt <= T) time_part = std::max(time_part, utt(t + dt));
        row.tolerance = 0.5 * dt * time_part;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            double second = std::abs(hess(i, i));
            for (double side : {-1.0, 1.0}) {
                Vector z = y;
                z(i) += side * h(i);
                second = std::max(second, std::abs(core.dyy(t, z)(i, i)));
            }
            row.tolerance += 0.5 * std::abs(drift(i)) * h(i) * second;
        }
    });
    for (const auto& r : out.rows) out.max_residual = std::max(out.max_residual, std::abs(r.residual));
    return out;
}

void write_csv(std::ostream& out, const ResidualTable& table) {
    out << "t";
    const Eigen::Index k = table.rows.empty() ? 0 : table.rows.front().y.size();
    for (Eigen::Index i = 1; i <= k; ++i) out << ",y" << i;
    out << ",residual\n" << std::setprecision(17);
    for (const auto& r : table.rows) {
        out << r.t;
        for (Eigen::Index i = 0; i < r.y.size(); ++i) out << ',' << r.y(i);
        out << ',' << r.residual << '\n';
    }
}

}  // namespace pathctl
