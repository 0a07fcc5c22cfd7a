#include "scenario.hpp"

#include "expression.hpp"
#include "pathctl/catalog.hpp"
#include "pathctl/control.hpp"
#include "pathctl/gauge.hpp"
#include "pathctl/lifted_hjb.hpp"
#include "pathctl/mollification.hpp"
#include "pathctl/rng.hpp"
#include "pathctl/sde.hpp"
#include "pathctl/viscosity.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

#ifndef PATHCTL_VERSION
#define PATHCTL_VERSION "0.0.0"
#endif

namespace pathctl::cli {

namespace {

namespace fs = std::filesystem;

ConfigError error_at(const YAML::Mark& mark, const std::string& what) {
    if (mark.is_null()) return ConfigError(what, 0, 0);
    return ConfigError(what, static_cast<std::size_t>(mark.line) + 1, static_cast<std::size_t>(mark.column) + 1);
}

template <typename T>
T convert(const YAML::Node& node, const std::string& key, const char* type) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw error_at(node.Mark(), "field '" + key + "' must be " + type);
    }
}

template <typename T>
constexpr const char* type_name() {
    if constexpr (std::is_same_v<T, double>) return "a number";
    else if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_same_v<T, std::string>) return "a string";
    else return "a non-negative integer";
}

/// A mapping whose keys must all be consumed; leftovers are reported as
/// unknown so typos do not silently fall back to defaults.
class Fields {
public:
    Fields(YAML::Node node, std::string where) : node_(std::move(node)), where_(std::move(where)) {
        if (!node_.IsMap()) throw error_at(node_.Mark(), where_ + " must be a mapping");
    }

    const YAML::Mark mark() const { return node_.Mark(); }
    const std::string& where() const { return where_; }

    bool has(const std::string& key) {
        used_.insert(key);
        const YAML::Node n = std::as_const(node_)[key];
        return n.IsDefined() && !n.IsNull();
    }

    YAML::Node get(const std::string& key) {
        if (!has(key)) throw error_at(node_.Mark(), "missing field '" + key + "' in " + where_);
        return std::as_const(node_)[key];
    }

    template <typename T>
    T req(const std::string& key) {
        return convert<T>(get(key), key, type_name<T>());
    }

    template <typename T>
    T opt(const std::string& key, T fallback) {
        return has(key) ? req<T>(key) : fallback;
    }

    /// Positive number.
    double positive(const std::string& key, double fallback) {
        const double v = opt<double>(key, fallback);
        if (!(v > 0.0) || !std::isfinite(v)) throw error_at(mark_of(key), "field '" + key + "' must be positive");
        return v;
    }

    std::size_t count(const std::string& key, std::size_t fallback, std::size_t min = 1) {
        const auto v = opt<std::size_t>(key, fallback);
        if (v < min) throw error_at(mark_of(key), "field '" + key + "' must be at least " + std::to_string(min));
        return v;
    }

    /// A scalar or a sequence of scalars.
    template <typename T>
    std::vector<T> list(const std::string& key, std::vector<T> fallback) {
        if (!has(key)) return fallback;
        const YAML::Node n = get(key);
        std::vector<T> out;
        if (n.IsSequence()) {
            for (const auto& e : n) out.push_back(convert<T>(e, key, type_name<T>()));
        } else {
            out.push_back(convert<T>(n, key, type_name<T>()));
        }
        if (out.empty()) throw error_at(n.Mark(), "field '" + key + "' must not be empty");
        return out;
    }

    YAML::Mark mark_of(const std::string& key) const {
        const YAML::Node n = std::as_const(node_)[key];
        return n.IsDefined() ? n.Mark() : node_.Mark();
    }

    void finish() const {
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!used_.count(key)) throw error_at(kv.first.Mark(), "unknown field '" + key + "' in " + where_);
        }
    }

private:
    YAML::Node node_;
    std::string where_;
    std::set<std::string> used_;
};

Expression parse_expression(const YAML::Node& node, const std::string& key, std::size_t coordinates) {
    if (!node.IsScalar()) throw error_at(node.Mark(), "field '" + key + "' must be a formula");
    const auto text = node.as<std::string>();
    try {
        return Expression::parse(text, coordinates);
    } catch (const ExpressionError& e) {
        // quoted scalars start one column before their text
        const std::size_t quote = node.Tag() == "!" ? 1 : 0;
        const YAML::Mark m = node.Mark();
        throw ConfigError("in formula '" + text + "': " + e.what(), static_cast<std::size_t>(m.line) + 1,
                          static_cast<std::size_t>(m.column) + quote + e.column());
    }
}

// ---- problems --------------------------------------------------------------

/// Coefficients as formulas in t, a and the lifted coordinates y.
struct Formulas {
    std::size_t dim = 1;
    std::size_t noise_dim = 1;
    std::vector<Weight> weights{Weight::one()};
    std::vector<double> actions;
    std::vector<Expression> drift;                   // d entries
    std::vector<std::vector<Expression>> diffusion;  // d rows of noise_dim
    std::optional<Expression> running;
    std::optional<Expression> terminal;
    double drift_bound = std::numeric_limits<double>::infinity();
    double diffusion_bound = std::numeric_limits<double>::infinity();
    double running_bound = 0.0;
    double terminal_bound = std::numeric_limits<double>::infinity();
};

struct Problem {
    std::string name;
    LiftedProblem lifted;
    ControlProblem path;
    /// v(t, x) as a function of t and x(t); set only for closed-form builtins.
    std::function<double(double, double)> closed_form;
};

std::string num(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

LiftedProblem assemble(const Formulas& f, double horizon) {
    const auto d = f.dim, q = f.noise_dim;
    Cylindrical<LiftedDrift> b{f.weights,
                               [e = f.drift, d](double t, const Vector& y, double a) {
                                   Vector v(static_cast<Eigen::Index>(d));
                                   for (std::size_t i = 0; i < d; ++i) v(static_cast<Eigen::Index>(i)) = e[i](t, y, a);
                                   return v;
                               },
                               f.drift_bound};
    Cylindrical<LiftedDiffusion> s{f.weights,
                                   [e = f.diffusion, d, q](double t, const Vector& y, double a) {
                                       Matrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(q));
                                       for (std::size_t i = 0; i < d; ++i)
                                           for (std::size_t j = 0; j < q; ++j)
                                               m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                                                   e[i][j](t, y, a);
                                       return m;
                                   },
                                   f.diffusion_bound};
    Cylindrical<LiftedRunning> r{f.weights, {}, f.running_bound};
    if (f.running) r.core = [e = *f.running](double t, const Vector& y, double a) { return e(t, y, a); };
    Cylindrical<LiftedTerminal> g{f.weights, [e = *f.terminal, horizon](const Vector& y) { return e(horizon, y, 0.0); },
                                  f.terminal_bound};
    return build_lifted(b, s, r, g, d, q, f.actions, horizon);
}

Formulas builtin_formulas(const std::string& drift, const std::string& diffusion, const std::string& running,
                          const std::string& terminal, std::vector<double> actions) {
    Formulas f;
    f.actions = std::move(actions);
    f.drift.push_back(Expression::parse(drift, 1));
    f.diffusion.push_back({Expression::parse(diffusion, 1)});
    if (!running.empty()) f.running = Expression::parse(running, 1);
    f.terminal = Expression::parse(terminal, 1);
    return f;
}

Weight parse_weight(const YAML::Node& node) {
    const auto text = convert<std::string>(node, "weights", "a string");
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    if (colon == std::string::npos) {
        if (kind == "one") return Weight::one();
        if (kind == "identity") return Weight::identity();
    } else {
        char* end = nullptr;
        const std::string arg = text.substr(colon + 1);
        const double v = std::strtod(arg.c_str(), &end);
        if (!arg.empty() && *end == '\0') {
            if (kind == "exp") return Weight::exponential(v);
            if (kind == "cos") return Weight::cosine(v);
            if (kind == "const") return Weight::constant_value(v);
        }
    }
    throw error_at(node.Mark(), "unknown weight '" + text + "' (one, identity, exp:<rate>, cos:<freq>, const:<c>)");
}

Formulas inline_formulas(Fields& f) {
    Formulas out;
    out.dim = f.count("dim", 1);
    out.noise_dim = f.count("noise_dim", out.dim);
    if (f.has("weights")) {
        out.weights.clear();
        const YAML::Node w = f.get("weights");
        if (!w.IsSequence() || w.size() == 0)
            throw error_at(w.Mark(), "field 'weights' must be a non-empty list");
        for (const auto& e : w) out.weights.push_back(parse_weight(e));
    }
    const std::size_t k = out.dim * out.weights.size();
    out.actions = f.list<double>("actions", {});
    if (out.actions.empty()) throw error_at(f.mark(), "missing field 'actions' in " + f.where());

    const YAML::Node b = f.get("drift");
    if (b.IsSequence()) {
        for (const auto& e : b) out.drift.push_back(parse_expression(e, "drift", k));
    } else {
        out.drift.push_back(parse_expression(b, "drift", k));
    }
    if (out.drift.size() != out.dim)
        throw error_at(b.Mark(), "field 'drift' needs " + std::to_string(out.dim) + " formulas");

    const YAML::Node s = f.get("diffusion");
    const auto bad_shape = [&] {
        return error_at(s.Mark(), "field 'diffusion' needs " + std::to_string(out.dim) + " rows of " +
                                      std::to_string(out.noise_dim) + " formulas");
    };
    if (s.IsScalar()) {
        if (out.dim != 1 || out.noise_dim != 1) throw bad_shape();
        out.diffusion.push_back({parse_expression(s, "diffusion", k)});
    } else if (s.IsSequence()) {
        for (const auto& row : s) {
            std::vector<Expression> r;
            if (row.IsSequence()) {
                for (const auto& e : row) r.push_back(parse_expression(e, "diffusion", k));
            } else {
                r.push_back(parse_expression(row, "diffusion", k));
            }
            if (r.size() != out.noise_dim) throw bad_shape();
            out.diffusion.push_back(std::move(r));
        }
        if (out.diffusion.size() != out.dim) throw bad_shape();
    } else {
        throw bad_shape();
    }
    if (f.has("running")) out.running = parse_expression(f.get("running"), "running", k);
    out.terminal = parse_expression(f.get("terminal"), "terminal", k);

    if (f.has("bounds")) {
        Fields bounds(f.get("bounds"), "bounds");
        out.drift_bound = bounds.positive("drift", out.drift_bound);
        out.diffusion_bound = bounds.opt<double>("diffusion", out.diffusion_bound);
        out.running_bound = bounds.opt<double>("running", out.running_bound);
        out.terminal_bound = bounds.positive("terminal", out.terminal_bound);
        bounds.finish();
    }
    return out;
}

Problem parse_problem(const YAML::Node& node, double horizon) {
    Problem p;
    Formulas formulas;
    const auto builtin = [&](const std::string& name, Fields* params) {
        const YAML::Mark mark = params ? params->mark() : node.Mark();
        p.name = name;
        if (name == "reachability" || name == "markovian-lifted") {
            formulas = builtin_formulas("a", "0", "", "-min(abs(y1), 1)", {-1.0, 1.0});
            formulas.drift_bound = 1.0;
            formulas.diffusion_bound = 0.0;
            formulas.terminal_bound = 1.0;
            p.closed_form = [horizon](double t, double x) { return reachability_value(t, x, horizon); };
        } else if (name == "brownian") {
            formulas = builtin_formulas("0", "1", "", "y1^2", {0.0});
            formulas.drift_bound = 0.0;
            formulas.diffusion_bound = 1.0;
            p.closed_form = [horizon](double t, double x) { return brownian_value(t, x, horizon); };
        } else if (name == "constant-coefficient") {
            const double mu = params ? params->opt<double>("mu", 0.5) : 0.5;
            const double sigma = params ? params->opt<double>("sigma", 0.3) : 0.3;
            formulas = builtin_formulas("a * " + num(mu), num(sigma), "", "y1", {-1.0, 0.0, 1.0});
            formulas.drift_bound = std::max(std::abs(mu), 1e-300);
            formulas.diffusion_bound = std::abs(sigma);
            p.closed_form = [mu, horizon](double t, double x) { return constant_coefficient_value(t, x, mu, horizon); };
        } else if (name == "tracking") {
            formulas = builtin_formulas("a", "0.3", "-y1^2", "-abs(y1)", {-1.0, 0.0, 1.0});
            formulas.drift_bound = 1.0;
            formulas.diffusion_bound = 0.3;
        } else {
            std::string names;
            for (const auto& e : list_builtin_problems()) names += (names.empty() ? "" : ", ") + e.name;
            throw error_at(mark, "unknown problem '" + name + "' (builtin: " + names + ")");
        }
    };
    if (node.IsScalar()) {
        builtin(node.as<std::string>(), nullptr);
    } else {
        Fields f(node, "problem");
        if (f.has("builtin")) {
            builtin(f.req<std::string>("builtin"), &f);
        } else {
            p.name = "inline";
            formulas = inline_formulas(f);
        }
        f.finish();
    }
    try {
        p.lifted = assemble(formulas, horizon);
        p.path = path_problem(p.lifted);
    } catch (const std::invalid_argument& e) {
        throw error_at(node.Mark(), std::string("ill-formed problem: ") + e.what());
    }
    p.path.id = p.name;
    return p;
}

/// Initial states: a scalar (one state, every component equal), a list of
/// scalars (one state each) or a list of d-vectors.
std::vector<Vector> parse_states(Fields& f, const std::string& key, std::size_t dim, double fallback) {
    if (!f.has(key)) return {Vector::Constant(static_cast<Eigen::Index>(dim), fallback)};
    const YAML::Node n = f.get(key);
    const auto state = [&](const YAML::Node& e) -> Vector {
        if (e.IsScalar()) return Vector::Constant(static_cast<Eigen::Index>(dim), convert<double>(e, key, "a number"));
        if (!e.IsSequence() || e.size() != dim)
            throw error_at(e.Mark(), "field '" + key + "' entries must have " + std::to_string(dim) + " components");
        Vector v(static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < dim; ++i) v(static_cast<Eigen::Index>(i)) = convert<double>(e[i], key, "a number");
        return v;
    };
    if (n.IsScalar()) return {state(n)};
    if (!n.IsSequence() || n.size() == 0) throw error_at(n.Mark(), "field '" + key + "' must be a state or a list");
    std::vector<Vector> out;
    for (const auto& e : n) out.push_back(state(e));
    return out;
}

std::optional<Vector> parse_vector(Fields& f, const std::string& key, std::size_t size) {
    if (!f.has(key)) return std::nullopt;
    const auto v = f.list<double>(key, {});
    if (v.size() == 1) return Vector::Constant(static_cast<Eigen::Index>(size), v[0]);
    if (v.size() != size)
        throw error_at(f.mark_of(key), "field '" + key + "' needs 1 or " + std::to_string(size) + " numbers");
    return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(size)));
}

Path constant_path(const Vector& x0, double horizon) { return Path::constant(TimeGrid::uniform(horizon, 16), x0); }

// ---- outputs ---------------------------------------------------------------

class Csv {
public:
    explicit Csv(const std::string& header) {
        s_ << std::setprecision(17) << header << '\n';
    }

    template <typename... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        (cell(first, cells), ...);
        s_ << '\n';
    }

    std::string str() const { return s_.str(); }

private:
    void sep(bool& first) {
        if (!first) s_ << ',';
        first = false;
    }
    void cell(bool& first, double v) { sep(first), s_ << v + 0.0; }  // no -0
    void cell(bool& first, std::size_t v) { sep(first), s_ << v; }
    void cell(bool& first, int v) { sep(first), s_ << v; }
    void cell(bool& first, bool v) { sep(first), s_ << (v ? 1 : 0); }
    void cell(bool& first, const std::string& v) { sep(first), s_ << v; }
    void cell(bool& first, const Vector& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) cell(first, v(i));
    }

    std::ostringstream s_;
};

std::string coordinate_header(const std::string& prefix, std::size_t n) {
    std::string h;
    for (std::size_t i = 1; i <= n; ++i) h += (i > 1 ? "," : "") + prefix + std::to_string(i);
    return h;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

/// Least-squares slope of log(ys) against log(xs); NaN if any y is zero.
double log_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(ys[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        const double a = std::log(xs[i]), b = std::log(ys[i]);
        sx += a, sy += b, sxx += a * a, sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Sequential Gaussian and uniform draws on one stream of a counter RNG.
class Draws {
public:
    Draws(std::uint64_t seed, std::uint64_t stream) : rng_(seed), stream_(stream) {}
    double normal() { return rng_.normal(stream_, 0, counter_++); }
    double uniform() { return rng_.uniform(stream_, 1, counter_++); }

    Path walk(std::size_t dim, double horizon, std::size_t intervals) {
        Matrix v(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(intervals + 1));
        for (Eigen::Index i = 0; i < v.rows(); ++i) v(i, 0) = 0.5 * normal();
        const double scale = std::sqrt(horizon / static_cast<double>(intervals));
        for (Eigen::Index k = 1; k < v.cols(); ++k)
            for (Eigen::Index i = 0; i < v.rows(); ++i) v(i, k) = v(i, k - 1) + scale * normal();
        return Path(TimeGrid::uniform(horizon, intervals), std::move(v));
    }

private:
    CounterRng rng_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

// ---- scenarios -------------------------------------------------------------

struct Context {
    std::uint64_t seed;
    fs::path out;
    std::string name;
    Execution exec;

    fs::path file(const std::string& suffix) const { return out / (name + suffix); }
};

struct Outcome {
    std::vector<std::string> failures;  // "criterion: detail"

    void check(bool ok, const std::string& criterion, const std::string& detail) {
        if (!ok) failures.push_back(criterion + ": " + detail);
    }
};

using Runner = std::function<Outcome(const Context&)>;

SimConfig sim_config(Fields& f) {
    SimConfig c;
    c.steps_per_unit = f.positive("steps_per_unit", 64.0);
    c.trajectories = f.count("trajectories", 64);
    c.noise_substeps = f.count("noise_substeps", 1);
    return c;
}

Runner parse_simulate(Fields& f) {
    const double T = f.positive("horizon", 1.0);
    const Problem p = parse_problem(f.get("problem"), T);
    const auto x0 = parse_states(f, "x0", p.lifted.dim, 0.0);
    const double t = f.opt<double>("t", 0.0);
    const auto action = f.opt<std::size_t>("action", 0);
    if (action >= p.lifted.actions.size()) throw error_at(f.mark_of("action"), "field 'action' is not an action index");
    const SimConfig base = sim_config(f);
    return [=](const Context& ctx) {
        SimConfig c = base;
        c.seed = ctx.seed;
        c.exec = ctx.exec;
        const auto batch = simulate(p.path.sde, t, constant_path(x0.front(), T),
                                    PiecewiseConstantControl::constant(t, T, action), c);
        std::ostringstream s;
        write_csv(s, batch);
        write_file(ctx.file(".csv"), s.str());
        return Outcome{};
    };
}

ValueConfig value_config(Fields& f) {
    ValueConfig c;
    c.sim = sim_config(f);
    const auto search = f.opt<std::string>("search", "exhaustive");
    if (search == "exhaustive")
        c.search = Search::exhaustive;
    else if (search == "greedy")
        c.search = Search::greedy;
    else
        throw error_at(f.mark_of("search"), "field 'search' must be exhaustive or greedy");
    return c;
}

Runner parse_value(Fields& f) {
    const double T = f.positive("horizon", 1.0);
    const Problem p = parse_problem(f.get("problem"), T);
    const auto states = parse_states(f, "x0", p.lifted.dim, 0.0);
    const auto times = f.list<double>("t", {0.0});
    const auto m = f.count("m", 4);
    const ValueConfig base = value_config(f);
    const std::optional<double> tol =
        f.has("tolerance") ? std::optional<double>(f.req<double>("tolerance")) : std::nullopt;
    if (tol && (!p.closed_form || p.lifted.dim != 1))
        throw error_at(f.mark_of("tolerance"), "field 'tolerance' needs a problem with a closed form");
    return [=](const Context& ctx) {
        ValueConfig c = base;
        c.sim.seed = ctx.seed;
        c.sim.exec = c.candidates = ctx.exec;
        Outcome o;
        Csv csv("t," + coordinate_header("x", p.lifted.dim) + ",value,std_error,closed_form,error");
        for (double t : times)
            for (const auto& x : states) {
                const auto v = value(p.path, t, constant_path(x, T), m, c);
                if (p.closed_form && p.lifted.dim == 1) {
                    const double cf = p.closed_form(t, x(0));
                    const double err = std::abs(v.mean - cf);
                    csv.row(t, x, v.mean, v.std_error, cf, err);
                    if (tol)
                        o.check(err <= *tol + 3.0 * v.std_error, "value matches closed form",
                                "t=" + num(t) + " x=" + num(x(0)) + " |v - v_exact| = " + num(err) + " > " +
                                    num(*tol + 3.0 * v.std_error));
                } else {
                    csv.row(t, x, v.mean, v.std_error, std::string(), std::string());
                }
            }
        write_file(ctx.file(".csv"), csv.str());
        return o;
    };
}

Runner parse_dpp(Fields& f) {
    const double T = f.positive("horizon", 1.0);
    const Problem p = parse_problem(f.get("problem"), T);
    const Vector x0 = parse_states(f, "x0", p.lifted.dim, 0.0).front();
    const double t = f.opt<double>("t", 0.0);
    const auto s_values = f.list<double>("s", {0.5 * T});
    const auto m = f.count("m", 4);
    const double tol = f.opt<double>("tolerance", 0.02);
    const ValueConfig base = value_config(f);
    return [=](const Context& ctx) {
        ValueConfig c = base;
        c.sim.seed = ctx.seed;
        c.sim.exec = c.candidates = ctx.exec;
        Outcome o;
        Csv csv("s,value,recursion,residual,std_error");
        for (double s : s_values) {
            const auto r = dpp_residual(p.path, t, s, constant_path(x0, T), m, c);
            csv.row(s, r.value, r.recursion, r.residual, r.std_error);
            o.check(r.residual <= tol + 3.0 * r.std_error, "dynamic programming residual",
                    "s=" + num(s) + " residual " + num(r.residual) + " > " + num(tol + 3.0 * r.std_error));
        }
        write_file(ctx.file(".csv"), csv.str());
        return o;
    };
}

Runner parse_mollify(Fields& f) {
    const double T = f.positive("horizon", 1.0);
    const auto dim = f.count("dim", 1);
    const Expression h_expr = parse_expression(f.get("coefficient"), "coefficient", dim);
    const double K = f.positive("lipschitz", 1.0);
    const auto levels = f.list<std::size_t>("n", {0, 1, 2, 3, 4});
    const auto samples = f.count("samples", 100);
    const auto mc = f.count("mc_samples", 64, 2);
    const auto nodes = static_cast<unsigned>(f.count("quadrature_nodes", 32));
    const double action = f.opt<double>("action", 0.0);
    const auto intervals = f.count("path_intervals", 10);
    const bool monotone = f.opt<bool>("check_monotone", true);
    CoefficientSpec h;
    h.name = h_expr.text();
    h.dim = dim;
    h.eval = [h_expr](double t, const Path& x, double a) { return h_expr(t, x.at(t), a); };
    h.lipschitz = K;
    return [=](const Context& ctx) {
        Outcome o;
        Draws draws(ctx.seed, 0x4d4f4c4cULL);
        std::vector<GaugePoint> points;
        std::vector<Path> partners;
        for (std::size_t i = 0; i < samples; ++i) {
            const double t = T * draws.uniform();
            Path x = draws.walk(dim, T, intervals);
            const double w = 0.3 * draws.uniform();
            partners.push_back(combine(1.0, x, w, draws.walk(dim, T, intervals)));
            points.push_back({t, std::move(x)});
        }
        Csv csv("n,sample,t,value,std_error,exact,bound,lipschitz_ratio_excess");
        std::vector<double> worst;
        for (std::size_t n : levels) {
            const MollifiedCoefficient hn(h, {static_cast<int>(n), mc, nodes, ctx.seed, ctx.exec}, T);
            std::size_t violations = 0, lip_violations = 0;
            double max_err = 0.0;
            for (std::size_t i = 0; i < samples; ++i) {
                const auto& [t, x] = points[i];
                const auto a = hn.samples(t, hn.lift(t, x), action);
                const auto b = hn.samples(t, hn.lift(t, partners[i]), action);
                const Estimate e = summarize(a);
                std::vector<double> diff(a.size());
                for (std::size_t k = 0; k < a.size(); ++k) diff[k] = a[k] - b[k];
                const Estimate de = summarize(diff);
                const double exact = h(t, x, action);
                const double bound = error_bound_rhs(h, static_cast<int>(n), {t, x});
                const double err = std::abs(e.mean - exact);
                const double lip_excess =
                    std::abs(de.mean) - (2.0 * K * seminorm(combine(1.0, x, -1.0, partners[i]), t) + 3.0 * de.std_error);
                csv.row(n, i, t, e.mean, e.std_error, exact, bound, lip_excess);
                max_err = std::max(max_err, err);
                violations += err > bound + 3.0 * e.std_error;
                lip_violations += lip_excess > 0.0;
            }
            o.check(violations == 0, "mollification error bound",
                    "n=" + std::to_string(n) + ": " + std::to_string(violations) + " samples exceed the bound");
            o.check(lip_violations == 0, "mollified Lipschitz constant 2K",
                    "n=" + std::to_string(n) + ": " + std::to_string(lip_violations) + " pairs exceed 2K");
            worst.push_back(max_err);
        }
        if (monotone)
            for (std::size_t k = 0; k + 1 < worst.size(); ++k)
                o.check(worst[k + 1] <= worst[k], "mollification error decreases in n",
                        "max error " + num(worst[k + 1]) + " at n=" + std::to_string(levels[k + 1]) + " exceeds " +
                            num(worst[k]) + " at n=" + std::to_string(levels[k]));
        write_file(ctx.file(".csv"), csv.str());
        return o;
    };
}

struct GridParams {
    GridConfig grid;
    std::vector<Vector> probes;
};

GridConfig grid_config(Fields& f, const LiftedProblem& p) {
    GridConfig g;
    g.points = f.count("points", 201, 3);
    g.time_levels = f.count("time_levels", 200);
    g.margin = f.opt<double>("margin", g.margin);
    g.cfl = f.positive("cfl", g.cfl);
    g.lo = parse_vector(f, "lo", p.lifted_dim());
    g.hi = parse_vector(f, "hi", p.lifted_dim());
    if (g.lo.has_value() != g.hi.has_value()) throw error_at(f.mark(), "fields 'lo' and 'hi' go together");
    return g;
}

Vector lift0(const LiftedProblem& p, const Vector& x0) {
    return lifted_coordinates(p.weights, constant_path(x0, p.horizon), 0.0);
}

Runner parse_hjb(Fields& f) {
    const double T = f.positive("horizon", 1.0);
    const Problem p = parse_problem(f.get("problem"), T);
    const auto eps = f.list<double>("epsilon", {0.4, 0.2, 0.1, 0.05});
    for (double e : eps)
        if (!(e > 0.0 && e < 1.0)) throw error_at(f.mark_of("epsilon"), "every epsilon must lie in (0, 1)");
    const auto states = parse_states(f, "x0", p.lifted.dim, 0.0);
    GridConfig g = grid_config(f, p.lifted);
    if (p.lifted.lifted_dim() > max_grid_dim)
        throw error_at(f.mark(), "lifted dimension " + std::to_string(p.lifted.lifted_dim()) + " exceeds " +
                                     std::to_string(max_grid_dim));
    for (const auto& x : states) g.centers.push_back(lift0(p.lifted, x));
    const bool with_cf = p.closed_form && p.lifted.dim == 1;
    const std::optional<double> slope_min =
        f.has("slope_min") ? std::optional<double>(f.req<double>("slope_min")) : std::nullopt;
    if (slope_min && !with_cf) throw error_at(f.mark_of("slope_min"), "field 'slope_min' needs a closed form");
    const bool write_grid = f.opt<bool>("write_grid", false);
    struct Mc {
        std::size_t m;
        ValueConfig cfg;
        double tolerance;
    };
    std::optional<Mc> mc;
    if (f.has("mc")) {
        Fields mf(f.get("mc"), "mc");
        Mc c{mf.count("m", 8), value_config(mf), mf.opt<double>("tolerance", 0.03)};
        mf.finish();
        mc = c;
    }
    return [=](const Context& ctx) {
        Outcome o;
        GridConfig cfg = g;
        cfg.exec = ctx.exec;
        std::vector<ValueEstimate> mc_values;
        if (mc) {
            ValueConfig vc = mc->cfg;
            vc.sim.seed = ctx.seed;
            vc.sim.exec = vc.candidates = ctx.exec;
            for (const auto& x : states) mc_values.push_back(value(p.path, 0.0, constant_path(x, T), mc->m, vc));
        }
        std::vector<double> errors, values;
        nlohmann::ordered_json diag;
        diag["epsilon"] = eps;
        std::vector<std::size_t> substeps;
        std::vector<double> courant;
        std::vector<bool> monotone;
        for (std::size_t k = 0; k < eps.size(); ++k) {
            const GridSolution sol = solve(p.lifted, eps[k], cfg);
            substeps.push_back(sol.report.substeps);
            courant.push_back(sol.report.courant);
            monotone.push_back(sol.report.monotone);
            double worst = 0.0;
            for (std::size_t i = 0; i < states.size(); ++i) {
                const auto r = reconstruct(sol, p.lifted, {0.0, constant_path(states[i], T)});
                values.push_back(r.value);
                const double cf = with_cf ? p.closed_form(0.0, states[i](0)) : std::nan("");
                worst = std::max(worst, std::abs(r.value - cf));
            }
            errors.push_back(worst);
            if (write_grid && k + 1 == eps.size()) {
                std::ostringstream s;
                write_csv(s, sol);
                write_file(ctx.file("_grid.csv"), s.str());
            }
        }
        Csv table("epsilon," + coordinate_header("x", p.lifted.dim) +
                  ",value,closed_form,error,mc_value,mc_std_error");
        const double fitted = with_cf ? fit_exponential_constant(eps, errors, T) : 0.0;
        for (std::size_t k = 0; k < eps.size(); ++k)
            for (std::size_t i = 0; i < states.size(); ++i) {
                const double v = values[k * states.size() + i];
                const std::string cf = with_cf ? num(p.closed_form(0.0, states[i](0))) : std::string();
                const std::string err = with_cf ? num(std::abs(v - p.closed_form(0.0, states[i](0)))) : std::string();
                if (mc) {
                    const auto& e = mc_values[i];
                    table.row(eps[k], states[i], v, cf, err, e.mean, e.std_error);
                    const double allowed =
                        eps[k] * fitted * std::exp(fitted * T) + mc->tolerance + 3.0 * e.std_error;
                    o.check(std::abs(v - e.mean) <= allowed, "lifted solve agrees with Monte Carlo",
                            "epsilon=" + num(eps[k]) + " |v_eps - v_mc| = " + num(std::abs(v - e.mean)) + " > " +
                                num(allowed));
                } else {
                    table.row(eps[k], states[i], v, cf, err, std::string(), std::string());
                }
            }
        const double slope = with_cf ? log_slope(eps, errors) : std::nan("");
        if (slope_min)
            o.check(slope >= *slope_min, "epsilon convergence slope",
                    "log-log slope " + num(slope) + " < " + num(*slope_min));
        diag["max_error"] = errors;
        diag["slope"] = std::isfinite(slope) ? nlohmann::ordered_json(slope) : nlohmann::ordered_json();
        diag["fitted_constant"] = fitted;
        diag["substeps"] = substeps;
        diag["courant"] = courant;
        diag["monotone"] = monotone;
        write_file(ctx.file(".csv"), table.str());
        write_file(ctx.file(".json"), diag.dump(2) + "\n");
        return o;
    };
}

Runner parse_gauge_vp(Fields& f) {
    const auto instances = f.count("instances", 100);
    const auto clusters = f.count("clusters", 10);
    const auto per_cluster = f.count("per_cluster", 20);
    const double delta = f.positive("delta", 0.1);
    const auto intervals = f.count("path_intervals", 6);
    const auto max_iterations = f.count("max_iterations", 64);
    if (delta >= 1.0) throw error_at(f.mark_of("delta"), "field 'delta' must lie in (0, 1)");
    return [=](const Context& ctx) {
        Outcome o;
        Csv csv("instance,dim,candidates,start,bar,iterations,converged,localization,improvement,strict_maximum,"
                "time_order,strict_gap");
        for (std::size_t rep = 0; rep < instances; ++rep) {
            // clusters of nearby points so that the perturbed maximization can move
            Draws draws(ctx.seed, 0x47415547ULL + rep);
            const std::size_t d = 1 + rep % 2;
            const double spread = rep % 2 ? 0.3 : 0.01;
            std::vector<GaugePoint> c;
            for (std::size_t k = 0; k < clusters; ++k) {
                const double t0 = draws.uniform();
                const Path base = draws.walk(d, 1.0, intervals);
                for (std::size_t i = 0; i < per_cluster; ++i) {
                    const double t = std::clamp(t0 + spread * (2.0 * draws.uniform() - 1.0), 0.0, 1.0);
                    c.push_back({t, combine(1.0, base, spread, draws.walk(d, 1.0, intervals))});
                }
            }
            const double w = draws.uniform();
            std::vector<double> G(c.size());
            for (std::size_t i = 0; i < c.size(); ++i)
                G[i] = std::sin(3.0 * c[i].t) * c[i].path.at(c[i].t)(0) + w * c[i].t +
                       0.05 * (2.0 * draws.uniform() - 1.0);
            const auto r = borwein_preiss(G, c, delta, max_iterations, -1, ctx.exec);
            const auto v = verify_variational(r, G, c, delta);
            csv.row(rep, d, c.size(), r.start, r.bar, r.trace.size(), r.converged, v.localization, v.improvement,
                    v.strict_maximum, v.time_order, v.strict_gap);
            o.check(v.all(), "variational principle items", "instance " + std::to_string(rep) + " fails");
        }
        write_file(ctx.file(".csv"), csv.str());
        return o;
    };
}

Runner parse_ito(Fields& f) {
    const double T = f.positive("horizon", 1.0);
    const auto trajectories = f.count("trajectories", 100);
    const auto levels = f.list<std::size_t>("levels", {6, 7, 8, 9, 10});
    const double x0 = f.opt<double>("x0", 0.0);
    const std::optional<double> slope_min =
        f.has("slope_min") ? std::optional<double>(f.req<double>("slope_min")) : std::nullopt;
    for (std::size_t k : levels)
        if (k == 0 || k > 20) throw error_at(f.mark_of("levels"), "levels must lie in 1..20");
    const std::size_t finest = *std::max_element(levels.begin(), levels.end());
    return [=](const Context& ctx) {
        Outcome o;
        // u(t, x) = x(t)^2, a cylindrical functional with the single weight one
        const CylindricalFunctional u(
            Core{[](double, const Vector& y) { return y(0) * y(0); }, [](double, const Vector&) { return 0.0; },
                 [](double, const Vector& y) { return Vector::Constant(1, 2.0 * y(0)); },
                 [](double, const Vector&) { return Matrix::Constant(1, 1, 2.0); }},
            {Weight::one()}, 1);
        const auto sde = brownian_problem(T).sde;
        Csv csv("dt,rms_residual");
        std::vector<double> dts, rms;
        for (std::size_t k : levels) {
            // every level sums the same finest increments, so all levels see one Brownian path
            SimConfig c;
            c.steps_per_unit = std::ldexp(1.0, static_cast<int>(k)) / T;
            c.trajectories = trajectories;
            c.seed = ctx.seed;
            c.noise_substeps = std::size_t{1} << (finest - k);
            c.exec = ctx.exec;
            const auto batch = simulate(sde, 0.0, constant_path(Vector::Constant(1, x0), T),
                                        PiecewiseConstantControl::constant(0.0, T, 0), c);
            double acc = 0.0;
            for (const auto& x : batch.trajectories) acc += std::pow(ito_residual(u, x, 0.0), 2);
            dts.push_back(T * std::ldexp(1.0, -static_cast<int>(k)));
            rms.push_back(std::sqrt(acc / static_cast<double>(trajectories)));
            csv.row(dts.back(), rms.back());
        }
        if (slope_min) {
            const double s = log_slope(dts, rms);
            o.check(s >= *slope_min, "Ito residual decay", "log-log slope " + num(s) + " < " + num(*slope_min));
        }
        write_file(ctx.file(".csv"), csv.str());
        return o;
    };
}

Runner parse_viscosity(Fields& f) {
    const double T = f.positive("horizon", 1.0);
    const Problem p = parse_problem(f.get("problem"), T);
    const double eps = f.positive("epsilon", 0.4);
    const auto refinements = f.list<std::size_t>("refinements", {1, 2, 4});
    const auto base_points = f.count("base_points", 100, 2);
    const auto base_levels = f.count("base_levels", 100);
    const auto k = p.lifted.lifted_dim();
    if (k > max_grid_dim) throw error_at(f.mark(), "lifted dimension exceeds " + std::to_string(max_grid_dim));
    const Vector lo = parse_vector(f, "lo", k).value_or(Vector::Constant(static_cast<Eigen::Index>(k), -2.0));
    const Vector hi = parse_vector(f, "hi", k).value_or(Vector::Constant(static_cast<Eigen::Index>(k), 2.0));
    const auto margin = f.count("sample_margin", 2, 1);
    const auto stride = f.count("sample_stride", 10);
    const double t_max = f.opt<double>("t_max", 0.5 * T);
    const std::optional<double> order_min =
        f.has("order_min") ? std::optional<double>(f.req<double>("order_min")) : std::nullopt;
    for (std::size_t r : refinements)
        if (r == 0 || r % refinements.front() != 0)
            throw error_at(f.mark_of("refinements"), "refinements must be positive multiples of the first");
    return [=](const Context& ctx) {
        Outcome o;
        Csv csv("refinement,t," + coordinate_header("y", k) + ",residual,lhs,eps_term,tolerance");
        Csv orders("from,to,max_residual_from,max_residual_to,order");
        std::vector<ResidualSample> samples;
        std::vector<double> maxima;
        for (std::size_t r : refinements) {
            GridConfig g;
            g.points = base_points * r + 1;
            g.time_levels = base_levels * r;
            g.lo = lo;
            g.hi = hi;
            g.exec = ctx.exec;
            const GridSolution sol = solve(p.lifted, eps, g);
            // coarse-grid nodes are nodes of every refinement
            if (samples.empty()) samples = interior_samples(sol, margin, stride, t_max);
            const auto table = classical_residual(sol, p.lifted, samples, ctx.exec);
            std::size_t sign_failures = 0;
            for (const auto& row : table.rows) {
                csv.row(r, row.t, row.y, row.residual, row.lhs, row.eps_term, row.tolerance);
                // lhs - eps_term = -residual: sub- and supersolution signs up to the scheme tolerance
                sign_failures += row.lhs - row.eps_term > row.tolerance;
                sign_failures += row.lhs - row.eps_term < -row.tolerance;
            }
            o.check(sign_failures == 0, "sub/supersolution signs",
                    "refinement " + std::to_string(r) + ": " + std::to_string(sign_failures) +
                        " samples outside the scheme tolerance");
            maxima.push_back(table.max_residual);
        }
        double last_order = std::nan("");
        for (std::size_t i = 0; i + 1 < refinements.size(); ++i) {
            last_order = std::log(maxima[i] / maxima[i + 1]) /
                         std::log(static_cast<double>(refinements[i + 1]) / static_cast<double>(refinements[i]));
            orders.row(refinements[i], refinements[i + 1], maxima[i], maxima[i + 1], last_order);
        }
        if (order_min)
            o.check(last_order >= *order_min, "classical residual order",
                    "order " + num(last_order) + " < " + num(*order_min));
        write_file(ctx.file(".csv"), csv.str());
        write_file(ctx.file("_orders.csv"), orders.str());
        return o;
    };
}

Runner parse_bounds(Fields& f) {
    const double T = f.positive("horizon", 1.0);
    const Problem p = parse_problem(f.get("problem"), T);
    const double eps = f.positive("epsilon", 0.2);
    const double q = f.opt<double>("q", 0.0);
    const double fit_fraction = f.opt<double>("fit_fraction", 0.75);
    const auto states = parse_states(f, "x0", p.lifted.dim, 0.0);
    GridConfig g = grid_config(f, p.lifted);
    for (const auto& x : states) g.centers.push_back(lift0(p.lifted, x));
    const std::optional<double> vertical_max =
        f.has("vertical_max") ? std::optional<double>(f.req<double>("vertical_max")) : std::nullopt;
    return [=](const Context& ctx) {
        Outcome o;
        GridConfig cfg = g;
        cfg.exec = ctx.exec;
        const GridSolution sol = solve(p.lifted, eps, cfg);
        const auto b = verify_bounds(sol, p.lifted, q, fit_fraction);
        Csv csv("epsilon,fit_from,semiconcavity_constant,semiconcavity_holds,vertical_bound");
        csv.row(eps, b.fit_from, b.semiconcavity_constant, b.semiconcavity_holds, b.vertical_bound);
        o.check(b.semiconcavity_holds, "semiconcavity bound", "fitted envelope fails on the remaining levels");
        if (vertical_max)
            o.check(b.vertical_bound <= *vertical_max, "vertical derivative bound",
                    num(b.vertical_bound) + " > " + num(*vertical_max));
        write_file(ctx.file(".csv"), csv.str());
        return o;
    };
}

struct Scenario {
    std::string name;
    std::string kind;
    YAML::Mark mark;
    Runner run;
};

bool filename_safe(const std::string& s) {
    if (s.empty() || s.front() == '.' || s.size() > 128) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    });
}

Scenario parse_scenario(const YAML::Node& node, std::set<std::string>& names) {
    Fields f(node, "scenario");
    Scenario s;
    s.mark = f.mark();
    s.name = f.req<std::string>("name");
    if (!filename_safe(s.name))
        throw error_at(f.mark_of("name"), "scenario name '" + s.name + "' must use letters, digits, '_', '-', '.'");
    if (!names.insert(s.name).second) throw error_at(f.mark_of("name"), "duplicate scenario name '" + s.name + "'");
    s.kind = f.req<std::string>("kind");
    static const std::map<std::string, Runner (*)(Fields&)> kinds{
        {"simulate", parse_simulate}, {"value", parse_value},   {"dpp", parse_dpp},
        {"mollify", parse_mollify},   {"hjb", parse_hjb},       {"gauge-vp", parse_gauge_vp},
        {"ito", parse_ito},           {"viscosity", parse_viscosity}, {"bounds", parse_bounds}};
    const auto it = kinds.find(s.kind);
    if (it == kinds.end()) {
        std::string list;
        for (const auto& [k, _] : kinds) list += (list.empty() ? "" : ", ") + k;
        throw error_at(f.mark_of("kind"), "unknown kind '" + s.kind + "' (" + list + ")");
    }
    s.run = it->second(f);
    f.finish();
    return s;
}

std::optional<std::uint64_t> parse_u64(const std::string& text) {
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    if (errno == ERANGE || *end != '\0') return std::nullopt;
    return static_cast<std::uint64_t>(v);
}

void report(std::ostream& err, const std::string& source, const ConfigError& e) {
    err << source;
    if (e.line() > 0) err << ':' << e.line() << ':' << e.column();
    err << ": error: " << e.what() << '\n';
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << h;
    return s.str();
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const std::optional<std::string>& env,
                           const std::optional<std::uint64_t>& config) {
    if (flag) return *flag;
    if (env) {
        const auto v = parse_u64(*env);
        if (!v) throw ConfigError("PATHCTL_SEED must be an unsigned 64-bit integer, got '" + *env + "'", 0, 0);
        return *v;
    }
    return config.value_or(0);
}

int run_config(const std::string& text, const std::string& source, const RunOptions& options, std::ostream& log,
               std::ostream& err) {
    std::vector<Scenario> scenarios;
    std::uint64_t seed = 0;
    fs::path out_dir;
    Execution exec = Execution::parallel;
    try {
        YAML::Node root;
        try {
            root = YAML::Load(text);
        } catch (const YAML::Exception& e) {
            throw error_at(e.mark, e.msg);
        }
        std::optional<std::uint64_t> config_seed;
        std::string output = "pathctl-out";
        if (root.IsDefined() && !root.IsNull()) {
            Fields top(root, "config");
            if (top.has("seed")) config_seed = top.req<std::uint64_t>("seed");
            output = top.opt<std::string>("output", output);
            exec = top.opt<bool>("parallel", true) ? Execution::parallel : Execution::serial;
            std::set<std::string> names;
            if (top.has("scenarios")) {
                const YAML::Node list = top.get("scenarios");
                if (!list.IsSequence()) throw error_at(list.Mark(), "field 'scenarios' must be a list");
                for (const auto& s : list) scenarios.push_back(parse_scenario(s, names));
            }
            top.finish();
        }
        std::optional<std::string> env;
        if (options.seed_env) {
            env = *options.seed_env;
        } else if (const char* e = std::getenv("PATHCTL_SEED")) {
            env = std::string(e);
        }
        seed = resolve_seed(options.seed, env, config_seed);
        out_dir = options.out.value_or(output);
    } catch (const ConfigError& e) {
        report(err, source, e);
        return exit_config;
    }

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        err << source << ": error: cannot create output directory " << out_dir.string() << ": " << ec.message()
            << '\n';
        return exit_config;
    }

    nlohmann::ordered_json manifest;
    manifest["tool_version"] = PATHCTL_VERSION;
    manifest["config_hash"] = fnv1a_hex(text);
    manifest["seed"] = seed;
    manifest["scenarios"] = nlohmann::ordered_json::array();
    bool failed = false;
    for (const auto& s : scenarios) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = s.run({seed, out_dir, s.name, exec});
        } catch (const ConfigError& e) {
            report(err, source, e);
            return exit_config;
        } catch (const std::exception& e) {
            // the library rejected the inputs of this scenario
            report(err, source, error_at(s.mark, "scenario '" + s.name + "': " + e.what()));
            return exit_config;
        }
        const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        const bool pass = outcome.failures.empty();
        failed = failed || !pass;
        for (const auto& why : outcome.failures) err << "FAIL " << s.name << ": " << why << '\n';
        log << (pass ? "pass " : "FAIL ") << s.name << " (" << s.kind << ")";
        if (options.timings) log << ' ' << static_cast<long long>(std::llround(ms)) << " ms";
        log << '\n';
        manifest["scenarios"].push_back({{"name", s.name},
                                         {"kind", s.kind},
                                         {"wall_ms", options.timings ? std::llround(ms) : 0LL},
                                         {"status", pass ? "pass" : "fail"}});
    }
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
    write_file(out_dir / "config.yaml", text);
    return failed ? exit_assertion : exit_ok;
}

int run_file(const std::string& path, const RunOptions& options, std::ostream& log, std::ostream& err) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        err << path << ": error: cannot read config file\n";
        return exit_config;
    }
    std::ostringstream s;
    s << in.rdbuf();
    return run_config(s.str(), path, options, log, err);
}

void print_catalog(std::ostream& out) {
    for (const auto& e : list_builtin_problems()) {
        out << e.name << "\n  " << e.description << "\n  oracle: " << e.oracle;
        if (!e.closed_form.empty()) out << "\n  closed form: " << e.closed_form;
        out << '\n';
    }
}

}  // namespace pathctl::cli
