#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "expression.hpp"
#include "pathctl/catalog.hpp"
#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <unistd.h>

using namespace pathctl;
using namespace pathctl::cli;
namespace fs = std::filesystem;

namespace {

double eval(const std::string& text, double t = 0.0, Vector y = Vector::Zero(3), double a = 0.0) {
    return Expression::parse(text, 3)(t, y, a);
}

std::size_t error_column(const std::string& text, std::size_t coordinates = 3) {
    try {
        Expression::parse(text, coordinates);
    } catch (const ExpressionError& e) {
        return e.column();
    }
    return 0;
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("pathctl_cli_" + tag + "_" + std::to_string(::getpid()))) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct Result {
    int code;
    std::string log, err;
};

Result run(const std::string& yaml, const fs::path& out, RunOptions options = {}) {
    options.out = out.string();
    options.timings = false;
    if (!options.seed_env) options.seed_env = std::optional<std::string>{};
    std::ostringstream log, err;
    const int code = run_config(yaml, "test.yaml", options, log, err);
    return {code, log.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("expression arithmetic and precedence") {
    CHECK(eval("1 + 2 * 3") == 7.0);
    CHECK(eval("(1 + 2) * 3") == 9.0);
    CHECK(eval("2 ^ 3 ^ 2") == 512.0);
    CHECK(eval("-2 ^ 2") == -4.0);
    CHECK(eval("8 / 4 / 2") == 1.0);
    CHECK(eval("7 - 2 - 1") == 4.0);
    CHECK(eval("1e-3 * 1000") == 1.0);
    CHECK(eval("pi") == std::numbers::pi);
    CHECK(eval("--3") == 3.0);
}

TEST_CASE("expression variables and functions") {
    Vector y(3);
    y << 0.5, -2.0, 4.0;
    CHECK(eval("t + a", 0.25, y, 2.0) == 2.25);
    CHECK(eval("y1 * y2 + y3", 0.0, y) == 3.0);
    CHECK(eval("min(y1, y2, y3)", 0.0, y) == -2.0);
    CHECK(eval("max(y1, y2)", 0.0, y) == 0.5);
    CHECK(eval("abs(y2)", 0.0, y) == 2.0);
    CHECK(eval("sqrt(y3)", 0.0, y) == 2.0);
    CHECK(eval("sin(y1) + cos(y1)", 0.0, y) == doctest::Approx(std::sin(0.5) + std::cos(0.5)));
    CHECK(eval("exp(log(y3))", 0.0, y) == doctest::Approx(4.0));
    CHECK(eval("tanh(y1)", 0.0, y) == doctest::Approx(std::tanh(0.5)));
    CHECK(eval("-min(abs(y1), 1)", 0.0, y) == -0.5);
    CHECK(Expression::parse(" y2 ", 3).text() == " y2 ");
}

TEST_CASE("expression errors carry the column") {
    CHECK(error_column("1 +") == 4);
    CHECK(error_column("sin(y1") == 7);
    CHECK(error_column("2 * foo(1)") == 5);
    CHECK(error_column("y4 + 1") == 1);
    CHECK(error_column("y0") == 1);
    CHECK(error_column("y1", 0) == 1);
    CHECK(error_column("min(1)") == 1);
    CHECK(error_column("sin(1, 2)") == 1);
    CHECK(error_column("1 2") == 3);
    CHECK(error_column("(1 + 2") == 7);
    CHECK(error_column("") == 1);
    CHECK(error_column("3 $ 4") == 3);
    CHECK(error_column("sin 1") == 5);
    CHECK(error_column("1 + 2") == 0);
}

TEST_CASE("config hash and seed precedence") {
    // published FNV-1a 64-bit test vectors
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("foobar") == "85944171f73967e8");

    CHECK(resolve_seed(5, std::string("7"), 9) == 5);
    CHECK(resolve_seed(std::nullopt, std::string("7"), 9) == 7);
    CHECK(resolve_seed(std::nullopt, std::nullopt, 9) == 9);
    CHECK(resolve_seed(std::nullopt, std::nullopt, std::nullopt) == 0);
    CHECK(resolve_seed(std::nullopt, std::string("18446744073709551615"), 0) == 18446744073709551615ULL);
    CHECK_THROWS_AS(resolve_seed(std::nullopt, std::string("12x"), 0), ConfigError);
    CHECK_THROWS_AS(resolve_seed(std::nullopt, std::string("-1"), 0), ConfigError);
    CHECK_THROWS_AS(resolve_seed(std::nullopt, std::string("18446744073709551616"), 0), ConfigError);
}

TEST_CASE("catalog") {
    const auto a = list_builtin_problems();
    const auto b = list_builtin_problems();
    REQUIRE(a.size() >= 4);
    const std::set<std::string> oracles{"closed-form", "MC", "none"};
    std::set<std::string> names;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(oracles.count(a[i].oracle) == 1);
        CHECK(a[i].name == b[i].name);
        CHECK(names.insert(a[i].name).second);
        if (a[i].oracle == "closed-form") CHECK(!a[i].closed_form.empty());
    }
    for (const char* required : {"reachability", "brownian", "constant-coefficient", "markovian-lifted"})
        CHECK(names.count(required) == 1);
    std::ostringstream x, y;
    print_catalog(x);
    print_catalog(y);
    CHECK(x.str() == y.str());
    CHECK(x.str().find("oracle: closed-form") != std::string::npos);
}

TEST_CASE("empty scenario list") {
    TempDir dir("empty");
    const auto r = run("scenarios: []\n", dir.path);
    CHECK(r.code == 0);
    CHECK(r.err.empty());
    const std::string manifest = slurp(dir.path / "manifest.json");
    CHECK(manifest.find("\"scenarios\": []") != std::string::npos);
    CHECK(manifest.find("\"seed\": 0") != std::string::npos);
    CHECK(manifest.find("\"tool_version\"") < manifest.find("\"config_hash\""));
    CHECK(manifest.find("\"config_hash\": \"" + fnv1a_hex("scenarios: []\n") + "\"") != std::string::npos);
    CHECK(run("", dir.path).code == 0);
}

TEST_CASE("config errors exit 2 with a position") {
    TempDir dir("errors");
    const auto bad_formula = run(R"(scenarios:
  - name: s
    kind: hjb
    problem:
      actions: [-1, 1]
      drift: "a +* 2"
      diffusion: "0"
      terminal: "y1"
)",
                                 dir.path);
    CHECK(bad_formula.code == 2);
    // opening quote at column 14, text from 15, '*' is the fourth character
    CHECK(bad_formula.err.find("test.yaml:6:18:") != std::string::npos);

    const auto plain = run("scenarios:\n  - {name: s, kind: mollify, coefficient: sin(y2)}\n", dir.path);
    CHECK(plain.code == 2);
    CHECK(plain.err.find("out of range") != std::string::npos);

    const auto missing = run("scenarios:\n  - name: s\n    kind: value\n", dir.path);
    CHECK(missing.code == 2);
    CHECK(missing.err.find("missing field 'problem'") != std::string::npos);
    CHECK(missing.err.find("test.yaml:2:") != std::string::npos);

    const auto syntax = run("scenarios: [\n  - name: s\n", dir.path);
    CHECK(syntax.code == 2);
    CHECK(syntax.err.find("test.yaml:") != std::string::npos);

    CHECK(run("scenarios:\n  - {name: s, kind: nope}\n", dir.path).code == 2);
    CHECK(run("scenarios:\n  - {name: s, kind: ito, levls: [6]}\n", dir.path).code == 2);
    CHECK(run("scenarios:\n  - {name: s, kind: ito}\n  - {name: s, kind: ito}\n", dir.path).code == 2);
    CHECK(run("scenarios:\n  - {name: ../x, kind: ito}\n", dir.path).code == 2);
    CHECK(run("scenarios:\n  - {name: s, kind: value, problem: unknown}\n", dir.path).code == 2);
    CHECK(run("scenarios:\n  - {name: s, kind: ito, trajectories: many}\n", dir.path).code == 2);
    CHECK(run("seed: -4\nscenarios: []\n", dir.path).code == 2);
    CHECK(run("colour: red\nscenarios: []\n", dir.path).code == 2);
    // parsing finishes before anything runs
    CHECK(!fs::exists(dir.path / "manifest.json"));
}

TEST_CASE("value scenario reproduces the reachability closed form") {
    TempDir dir("value");
    const auto r = run(R"(scenarios:
  - name: reach
    kind: value
    problem: reachability
    horizon: 1.0
    t: [0.0, 0.5]
    x0: [0.5, 1.25, -1.75]
    m: 8
    trajectories: 1
    tolerance: 0.02
)",
                       dir.path);
    CHECK(r.code == 0);
    const auto rows = read_csv(dir.path / "reach.csv");
    REQUIRE(rows.size() == 7);
    CHECK(rows[0] == std::vector<std::string>{"t", "x1", "value", "std_error", "closed_form", "error"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double t = std::stod(rows[i][0]), x = std::stod(rows[i][1]), v = std::stod(rows[i][2]);
        // steer toward 0 at unit speed for the remaining time, reward capped at -1
        const double exact = -std::min(std::max(std::abs(x) - (1.0 - t), 0.0), 1.0);
        CHECK(std::abs(v - exact) <= 0.02);
        CHECK(std::stod(rows[i][4]) == doctest::Approx(exact).epsilon(1e-15));
    }
}

TEST_CASE("failed assertions exit 1 and name the criterion") {
    TempDir dir("fail");
    const auto r = run(R"(scenarios:
  - name: ok
    kind: value
    problem: reachability
    x0: 0.5
    m: 2
    trajectories: 1
  - name: strict
    kind: ito
    levels: [4, 5]
    trajectories: 8
    slope_min: 5
)",
                       dir.path);
    CHECK(r.code == 1);
    CHECK(r.err.find("FAIL strict: Ito residual decay") != std::string::npos);
    const std::string manifest = slurp(dir.path / "manifest.json");
    CHECK(manifest.find("\"status\": \"pass\"") != std::string::npos);
    CHECK(manifest.find("\"status\": \"fail\"") != std::string::npos);
}

TEST_CASE("library rejections exit 2") {
    TempDir dir("reject");
    // four lifted coordinates exceed the grid solver
    const auto r = run(R"(scenarios:
  - name: big
    kind: hjb
    problem:
      dim: 2
      weights: [one, identity]
      actions: [0]
      drift: ["0", "0"]
      diffusion: [["0", "0"], ["0", "0"]]
      terminal: "y1"
)",
                       dir.path);
    CHECK(r.code == 2);
}

TEST_CASE("re-runs are byte-identical and the seed matters") {
    const std::string yaml = R"(seed: 11
scenarios:
  - name: sim
    kind: simulate
    problem: {builtin: constant-coefficient, mu: 0.25, sigma: 0.5}
    x0: 0.1
    trajectories: 3
    steps_per_unit: 16
  - name: vp
    kind: gauge-vp
    instances: 4
  - name: hjb
    kind: hjb
    problem: markovian-lifted
    epsilon: [0.4, 0.2]
    x0: 0.5
    points: 41
    time_levels: 20
    write_grid: true
)";
    TempDir a("rerun_a"), b("rerun_b"), c("rerun_c");
    REQUIRE(run(yaml, a.path).code == 0);
    REQUIRE(run(yaml, b.path).code == 0);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a.path)) {
        CHECK(slurp(e.path()) == slurp(b.path / e.path().filename()));
        ++files;
    }
    CHECK(files == 7);  // 3 scenario CSVs, hjb json and grid, manifest, config copy
    CHECK(slurp(a.path / "config.yaml") == yaml);

    RunOptions other;
    other.seed = 12;
    REQUIRE(run(yaml, c.path, other).code == 0);
    CHECK(slurp(c.path / "sim.csv") != slurp(a.path / "sim.csv"));
    CHECK(slurp(c.path / "manifest.json").find("\"seed\": 12") != std::string::npos);

    RunOptions env;
    env.seed_env = std::optional<std::string>("12");
    TempDir d("rerun_d");
    REQUIRE(run(yaml, d.path, env).code == 0);
    CHECK(slurp(d.path / "sim.csv") == slurp(c.path / "sim.csv"));
}

TEST_CASE("serial and parallel runs write the same files") {
    const std::string body = R"(scenarios:
  - name: moll
    kind: mollify
    coefficient: sin(y1)
    samples: 10
    mc_samples: 16
    n: [0, 2]
  - name: visc
    kind: viscosity
    problem: markovian-lifted
    base_points: 20
    base_levels: 20
    refinements: [1, 2]
    sample_stride: 2
)";
    TempDir a("serial"), b("parallel");
    const auto ra = run("parallel: false\n" + body, a.path);
    const auto rb = run("parallel: true\n" + body, b.path);
    CHECK(ra.code == rb.code);
    for (const char* f : {"moll.csv", "visc.csv", "visc_orders.csv"}) CHECK(slurp(a.path / f) == slurp(b.path / f));
}
