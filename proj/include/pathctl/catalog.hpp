#pragma once

#include "pathctl/control.hpp"
#include "pathctl/lifted_hjb.hpp"

#include <string>
#include <vector>

namespace pathctl {

/// Steer x(t) toward 0: d = 1, A = {-1, 1}, b = a, sigma = 0, f = 0,
/// g = -min(|x(T)|, 1).
ControlProblem reachability_problem(double horizon = 1.0);
/// -min(max(|x(t)| - (T - t), 0), 1).
double reachability_value(double t, double xt, double horizon);

/// Uncontrolled Brownian motion with g = x(T)^2: v = x(t)^2 + (T - t).
ControlProblem brownian_problem(double horizon = 1.0);
double brownian_value(double t, double xt, double horizon);

/// dX = a mu dt + sigma dW with A = {-1, 0, 1} and g = x(T): v = x(t) + mu (T - t).
ControlProblem constant_coefficient_problem(double mu = 0.5, double sigma = 0.3, double horizon = 1.0);
double constant_coefficient_value(double t, double xt, double mu, double horizon);

/// The reachability problem lifted with the single weight phi = 1, so y = x(t).
LiftedProblem markovian_lifted_problem(double horizon = 1.0);

struct CatalogEntry {
    std::string name;
    std::string description;
    std::string oracle;  // closed-form | MC | none
    std::string closed_form;
};

/// Bundled test problems in a fixed order.
std::vector<CatalogEntry> list_builtin_problems();

}  // namespace pathctl
