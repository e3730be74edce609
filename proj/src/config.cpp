#include "optswitch/config.hpp"

#include "optswitch/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace optswitch {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"problem", {"discount", "cost_open", "cost_close", "lower", "lower_kind", "upper", "upper_kind"}},
        {"regime0",
         {"family", "drift", "speed", "level", "vol", "reward_constant", "reward_linear", "reward_power_coef",
          "reward_power_exp"}},
        {"regime1",
         {"family", "drift", "speed", "level", "vol", "reward_constant", "reward_linear", "reward_power_coef",
          "reward_power_exp"}},
        {"solver", {"method", "coupling", "tolerance", "max_iterations", "initial_beta1", "scan_points"}},
        {"oracle", {"grid_nodes", "grid_lower", "grid_upper", "grid_tolerance", "paths", "dt", "seed", "probes"}},
        {"output", {"directory", "curve_lower", "curve_upper", "curve_points", "curve_spacing"}},
    };
    return s;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Line of `key` inside `[section]` (1-based), or 0 when absent
int find_line(const std::string& text, const std::string& section, const std::string& key) {
    std::istringstream in(text);
    std::string line, current;
    for (int n = 1; std::getline(in, line); ++n) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == ';' || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            current = trim(t.substr(1, t.size() - 2));
            if (key.empty() && current == section) return n;
            continue;
        }
        const auto eq = t.find('=');
        if (current == section && eq != std::string::npos && trim(t.substr(0, eq)) == key) return n;
    }
    return 0;
}

class Reader {
public:
    Reader(const pt::ptree& tree, const std::string& text) : tree_(tree), text_(text) {}

    [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const {
        std::ostringstream os;
        os << what;
        if (const int line = find_line(text_, section, key)) os << " (line " << line << ")";
        throw Error(ErrorCode::ConfigError, key.empty() ? section : section + "." + key, os.str());
    }

    std::optional<std::string> raw(const std::string& section, const std::string& key) const {
        const auto sec = tree_.get_child_optional(section);
        if (!sec) return std::nullopt;
        const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
        if (!v) return std::nullopt;
        return trim(*v);
    }

    std::string required(const std::string& section, const std::string& key) const {
        auto v = raw(section, key);
        if (!v) fail(section, key, "missing required key '" + key + "' in [" + section + "]");
        return *v;
    }

    double to_double(const std::string& section, const std::string& key, const std::string& s) const {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) fail(section, key, "not a number: '" + s + "'");
        return v;
    }

    template <class Int>
    Int to_int(const std::string& section, const std::string& key, const std::string& s) const {
        Int v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) fail(section, key, "not an integer: '" + s + "'");
        return v;
    }

    double number(const std::string& section, const std::string& key) const {
        return to_double(section, key, required(section, key));
    }
    void number(const std::string& section, const std::string& key, double& out) const {
        if (auto v = raw(section, key)) out = to_double(section, key, *v);
    }
    void number(const std::string& section, const std::string& key, std::optional<double>& out) const {
        if (auto v = raw(section, key)) out = to_double(section, key, *v);
    }
    template <class Int>
    void integer(const std::string& section, const std::string& key, Int& out) const {
        if (auto v = raw(section, key)) out = to_int<Int>(section, key, *v);
    }
    void choice(const std::string& section, const std::string& key, std::string& out,
                std::initializer_list<const char*> allowed) const {
        auto v = raw(section, key);
        if (!v) return;
        for (const char* a : allowed)
            if (*v == a) {
                out = *v;
                return;
            }
        std::string list;
        for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
        fail(section, key, "invalid value '" + *v + "' (expected one of: " + list + ")");
    }

private:
    const pt::ptree& tree_;
    const std::string& text_;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

RegimeConfig read_regime(const Reader& r, const std::string& section) {
    RegimeConfig c;
    c.family = r.required(section, "family");
    if (c.family != "gbm" && c.family != "ou")
        r.fail(section, "family", "invalid value '" + c.family + "' (expected one of: gbm, ou)");
    c.vol = r.number(section, "vol");
    if (c.family == "gbm") {
        c.drift = r.number(section, "drift");
        for (const char* k : {"speed", "level"})
            if (r.raw(section, k)) r.fail(section, k, std::string("key '") + k + "' does not apply to family gbm");
    } else {
        c.speed = r.number(section, "speed");
        c.level = r.number(section, "level");
        if (r.raw(section, "drift")) r.fail(section, "drift", "key 'drift' does not apply to family ou");
    }
    r.number(section, "reward_constant", c.reward_constant);
    r.number(section, "reward_linear", c.reward_linear);
    r.number(section, "reward_power_coef", c.reward_power_coef);
    r.number(section, "reward_power_exp", c.reward_power_exp);
    return c;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        std::ostringstream os;
        os << e.message() << " (line " << e.line() << ")";
        throw Error(ErrorCode::ConfigError, "syntax", os.str());
    }
    const Reader r(tree, text);

    for (const auto& [section, body] : tree) {
        const auto it = schema().find(section);
        if (body.empty()) r.fail(section, "", "key '" + section + "' outside of any section");
        if (it == schema().end()) r.fail(section, "", "unknown section [" + section + "]");
        for (const auto& kv : body)
            if (!it->second.count(kv.first)) r.fail(section, kv.first, "unknown key '" + kv.first + "'");
    }

    RunConfig c;
    if (!tree.get_child_optional("problem")) r.fail("problem", "", "missing section [problem]");
    for (int i = 0; i < 2; ++i) {
        const std::string s = "regime" + std::to_string(i);
        if (!tree.get_child_optional(s)) r.fail(s, "", "missing section [" + s + "]");
        c.problem.regimes[i] = read_regime(r, s);
    }
    c.problem.discount = r.number("problem", "discount");
    c.problem.cost_open = r.number("problem", "cost_open");
    c.problem.cost_close = r.number("problem", "cost_close");
    r.number("problem", "lower", c.problem.lower);
    r.number("problem", "upper", c.problem.upper);
    r.choice("problem", "lower_kind", c.problem.lower_kind, {"natural", "absorbing"});
    r.choice("problem", "upper_kind", c.problem.upper_kind, {"natural", "absorbing"});

    r.choice("solver", "method", c.solver.method, {"fixed_point", "simultaneous"});
    r.choice("solver", "coupling", c.solver.coupling, {"slope_only", "anchored"});
    r.number("solver", "tolerance", c.solver.tolerance);
    r.integer("solver", "max_iterations", c.solver.max_iterations);
    r.number("solver", "initial_beta1", c.solver.initial_beta1);
    r.integer("solver", "scan_points", c.solver.scan_points);

    r.integer("oracle", "grid_nodes", c.oracle.grid_nodes);
    r.number("oracle", "grid_lower", c.oracle.grid_lower);
    r.number("oracle", "grid_upper", c.oracle.grid_upper);
    r.number("oracle", "grid_tolerance", c.oracle.grid_tolerance);
    r.integer("oracle", "paths", c.oracle.paths);
    r.number("oracle", "dt", c.oracle.dt);
    r.integer("oracle", "seed", c.oracle.seed);
    if (auto v = r.raw("oracle", "probes")) {
        std::istringstream in(*v);
        std::string item;
        while (std::getline(in, item, ','))
            if (!trim(item).empty()) c.oracle.probes.push_back(r.to_double("oracle", "probes", trim(item)));
    }

    if (auto v = r.raw("output", "directory")) c.output.directory = *v;
    r.number("output", "curve_lower", c.output.curve_lower);
    r.number("output", "curve_upper", c.output.curve_upper);
    r.integer("output", "curve_points", c.output.curve_points);
    r.choice("output", "curve_spacing", c.output.curve_spacing, {"uniform", "log"});
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "path", "cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream os;
    os << "[problem]\n"
       << "discount = " << fmt(c.problem.discount) << "\n"
       << "cost_open = " << fmt(c.problem.cost_open) << "\n"
       << "cost_close = " << fmt(c.problem.cost_close) << "\n"
       << "lower = " << fmt(c.problem.lower) << "\n"
       << "lower_kind = " << c.problem.lower_kind << "\n"
       << "upper = " << fmt(c.problem.upper) << "\n"
       << "upper_kind = " << c.problem.upper_kind << "\n";
    for (int i = 0; i < 2; ++i) {
        const RegimeConfig& r = c.problem.regimes[i];
        os << "\n[regime" << i << "]\n"
           << "family = " << r.family << "\n";
        if (r.family == "gbm") {
            os << "drift = " << fmt(r.drift) << "\n";
        } else {
            os << "speed = " << fmt(r.speed) << "\n"
               << "level = " << fmt(r.level) << "\n";
        }
        os << "vol = " << fmt(r.vol) << "\n"
           << "reward_constant = " << fmt(r.reward_constant) << "\n"
           << "reward_linear = " << fmt(r.reward_linear) << "\n"
           << "reward_power_coef = " << fmt(r.reward_power_coef) << "\n"
           << "reward_power_exp = " << fmt(r.reward_power_exp) << "\n";
    }
    os << "\n[solver]\n"
       << "method = " << c.solver.method << "\n"
       << "coupling = " << c.solver.coupling << "\n"
       << "tolerance = " << fmt(c.solver.tolerance) << "\n"
       << "max_iterations = " << c.solver.max_iterations << "\n";
    if (c.solver.initial_beta1) os << "initial_beta1 = " << fmt(*c.solver.initial_beta1) << "\n";
    os << "scan_points = " << c.solver.scan_points << "\n";
    os << "\n[oracle]\n"
       << "grid_nodes = " << c.oracle.grid_nodes << "\n";
    if (c.oracle.grid_lower) os << "grid_lower = " << fmt(*c.oracle.grid_lower) << "\n";
    if (c.oracle.grid_upper) os << "grid_upper = " << fmt(*c.oracle.grid_upper) << "\n";
    os << "grid_tolerance = " << fmt(c.oracle.grid_tolerance) << "\n"
       << "paths = " << c.oracle.paths << "\n"
       << "dt = " << fmt(c.oracle.dt) << "\n"
       << "seed = " << c.oracle.seed << "\n";
    if (!c.oracle.probes.empty()) {
        os << "probes = ";
        for (std::size_t k = 0; k < c.oracle.probes.size(); ++k) os << (k ? ", " : "") << fmt(c.oracle.probes[k]);
        os << "\n";
    }
    os << "\n[output]\n"
       << "directory = " << c.output.directory << "\n"
       << "curve_lower = " << fmt(c.output.curve_lower) << "\n"
       << "curve_upper = " << fmt(c.output.curve_upper) << "\n"
       << "curve_points = " << c.output.curve_points << "\n"
       << "curve_spacing = " << c.output.curve_spacing << "\n";
    return os.str();
}

SwitchingProblem to_problem(const ProblemConfig& c) {
    SwitchingProblem p;
    for (int i = 0; i < 2; ++i) {
        const RegimeConfig& r = c.regimes[i];
        if (r.family == "gbm")
            p.regimes[i].family = GeometricBM{r.drift, r.vol};
        else
            p.regimes[i].family = OrnsteinUhlenbeck{r.speed, r.level, r.vol};
        p.reward[i] = Reward{r.reward_constant, r.reward_linear, r.reward_power_coef, r.reward_power_exp, {}};
    }
    p.cost_open.constant = c.cost_open;
    p.cost_close.constant = c.cost_close;
    p.discount = c.discount;
    p.lower = {c.lower, c.lower_kind == "absorbing" ? BoundaryKind::Absorbing : BoundaryKind::Natural};
    p.upper = {c.upper, c.upper_kind == "absorbing" ? BoundaryKind::Absorbing : BoundaryKind::Natural};
    return p;
}

SolveOptions to_solve_options(const SolverConfig& c) {
    SolveOptions o;
    o.tolerance = c.tolerance;
    o.max_iterations = c.max_iterations;
    o.initial_beta1 = c.initial_beta1;
    o.coupling = c.coupling == "anchored" ? Coupling::Anchored : Coupling::SlopeOnly;
    o.scan_points = c.scan_points;
    return o;
}

GridOptions to_grid_options(const OracleConfig& c) {
    GridOptions g;
    g.nodes = c.grid_nodes;
    g.lower = c.grid_lower;
    g.upper = c.grid_upper;
    return g;
}

}  // namespace optswitch
