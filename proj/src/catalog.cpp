#include "pathctl/catalog.hpp"

#include <algorithm>
#include <cmath>

namespace pathctl {

namespace {

double final_state(const Path& x) { return x.at(x.horizon())(0); }

}  // namespace

ControlProblem reachability_problem(double horizon) {
    ControlProblem p;
    p.id = "reachability";
    p.sde.drift = [](double, const Path&, double a) { return Vector::Constant(1, a); };
    p.sde.diffusion = [](double, const Path&, double) { return Matrix::Zero(1, 1); };
    p.sde.actions = {-1.0, 1.0};
    p.sde.bound = 1.0;
    p.terminal = {[](const Path& x) { return -std::min(std::abs(final_state(x)), 1.0); }, 1.0, 1.0};
    p.horizon = horizon;
    return p;
}

double reachability_value(double t, double xt, double horizon) {
    return -std::min(std::max(std::abs(xt) - (horizon - t), 0.0), 1.0);
}

ControlProblem brownian_problem(double horizon) {
    ControlProblem p;
    p.id = "brownian";
    p.sde.drift = [](double, const Path&, double) { return Vector::Zero(1); };
    p.sde.diffusion = [](double, const Path&, double) { return Matrix::Identity(1, 1); };
    p.sde.actions = {0.0};
    p.sde.bound = 1.0;
    p.terminal = {[](const Path& x) { return final_state(x) * final_state(x); }, 0.0};
    p.horizon = horizon;
    return p;
}

double brownian_value(double t, double xt, double horizon) { return xt * xt + (horizon - t); }

ControlProblem constant_coefficient_problem(double mu, double sigma, double horizon) {
    ControlProblem p;
    p.id = "constant-coefficient";
    p.sde.drift = [mu](double, const Path&, double a) { return Vector::Constant(1, a * mu); };
    p.sde.diffusion = [sigma](double, const Path&, double) { return Matrix::Constant(1, 1, sigma); };
    p.sde.actions = {-1.0, 0.0, 1.0};
    p.sde.bound = std::max(std::abs(mu), std::abs(sigma));
    p.terminal = {[](const Path& x) { return final_state(x); }, 1.0};
    p.horizon = horizon;
    return p;
}

double constant_coefficient_value(double t, double xt, double mu, double horizon) {
    return xt + std::abs(mu) * (horizon - t);
}

LiftedProblem markovian_lifted_problem(double horizon) {
    const std::vector<Weight> w{Weight::one()};
    return build_lifted({w, [](double, const Vector&, double a) { return Vector::Constant(1, a); }, 1.0},
                        {w, [](double, const Vector&, double) { return Matrix::Zero(1, 1); }, 0.0}, {w, {}, 0.0},
                        {w, [](const Vector& y) { return -std::min(std::abs(y(0)), 1.0); }, 1.0}, 1, 1, {-1.0, 1.0},
                        horizon);
}

std::vector<CatalogEntry> list_builtin_problems() {
    return {
        {"reachability", "d=1, A={-1,1}, b=a, sigma=0, f=0, g=-min(|x(T)|,1)", "closed-form",
         "v(t,x) = -min(max(|x(t)|-(T-t),0),1)"},
        {"brownian", "d=1, uncontrolled, b=0, sigma=1, f=0, g=x(T)^2", "closed-form", "v(t,x) = x(t)^2 + (T-t)"},
        {"constant-coefficient", "d=1, A={-1,0,1}, b=a*mu, sigma constant, f=0, g=x(T)", "closed-form",
         "v(t,x) = x(t) + |mu|(T-t)"},
        {"markovian-lifted", "reachability lifted with the single weight phi=1 (y = x(t)), solved on a grid",
         "closed-form", "v_eps -> -min(max(|y|-(T-t),0),1) as eps -> 0"},
        {"tracking", "d=1, A={-1,0,1}, b=a, sigma=0.3, f=-x(t)^2, g=-|x(T)|", "MC", ""},
    };
}

}  // namespace pathctl
