#include "ac_control/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <variant>

#include "ac_control/io.hpp"

namespace ac {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

bool parse_double(std::string_view s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    const char* first = t.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
    return ec == std::errc() && ptr == t.data() + t.size();
}

}  // namespace

Field FieldSpec::evaluate(const Grid& grid) const {
    Field f(grid.node_count());
    const double L = grid.half_length();
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double x = grid.node(j);
        double v = 0.0;
        switch (kind) {
            case Kind::constant: v = a; break;
            case Kind::sine: v = a * std::sin(std::numbers::pi * b * x / L); break;
            case Kind::tanh: v = std::tanh((x - b) / a); break;
        }
        f[j] = clamped ? std::clamp(v, -1.0, 1.0) : v;
    }
    return f;
}

std::string FieldSpec::to_string() const {
    std::string inner;
    switch (kind) {
        case Kind::constant: inner = "constant(" + format_number(a) + ")"; break;
        case Kind::sine: inner = "sine(" + format_number(a) + ", " + format_number(b) + ")"; break;
        case Kind::tanh:
            inner = "tanh(" + format_number(a) + (b != 0.0 ? ", " + format_number(b) : std::string()) + ")";
            break;
    }
    return clamped ? "clamp(" + inner + ")" : inner;
}

FieldSpec parse_field_spec(std::string_view text) {
    std::string s = trim(text);
    FieldSpec spec;
    auto unwrap = [](std::string& body, std::string_view name) {
        if (body.size() > name.size() + 1 && body.compare(0, name.size(), name) == 0 && body[name.size()] == '(' &&
            body.back() == ')') {
            body = trim(std::string_view(body).substr(name.size() + 1, body.size() - name.size() - 2));
            return true;
        }
        return false;
    };
    if (unwrap(s, "clamp")) spec.clamped = true;

    std::vector<double> args;
    auto read_args = [&](std::string_view name) {
        if (!unwrap(s, name)) return false;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            double v = 0.0;
            if (!parse_double(item, v)) throw ConfigError("field spec: bad number '" + trim(item) + "'");
            args.push_back(v);
        }
        return true;
    };
    if (read_args("constant")) {
        if (args.size() != 1) throw ConfigError("field spec: constant(c) takes one argument");
        spec.kind = FieldSpec::Kind::constant;
        spec.a = args[0];
    } else if (read_args("sine")) {
        if (args.size() != 2) throw ConfigError("field spec: sine(a, k) takes two arguments");
        spec.kind = FieldSpec::Kind::sine;
        spec.a = args[0];
        spec.b = args[1];
    } else if (read_args("tanh")) {
        if (args.empty() || args.size() > 2) throw ConfigError("field spec: tanh(s [, x0]) takes one or two arguments");
        if (!(args[0] > 0.0)) throw ConfigError("field spec: tanh width must be positive");
        spec.kind = FieldSpec::Kind::tanh;
        spec.a = args[0];
        spec.b = args.size() == 2 ? args[1] : 0.0;
    } else {
        throw ConfigError("field spec: expected constant(c), sine(a, k), tanh(s [, x0]) or clamp(...), got '" +
                          std::string(text) + "'");
    }
    for (double v : args) {
        if (!std::isfinite(v)) throw ConfigError("field spec: arguments must be finite");
    }
    return spec;
}

namespace {

using NumberList = std::vector<double>;
using Value = std::variant<bool, long long, double, std::string, NumberList>;

enum class Type { boolean, integer, number, text, number_list };

std::string_view type_name(Type t) {
    switch (t) {
        case Type::boolean: return "a boolean";
        case Type::integer: return "an integer";
        case Type::number: return "a number";
        case Type::text: return "a string";
        case Type::number_list: return "an array of numbers";
    }
    return "?";
}

std::string_view value_name(const Value& v) {
    switch (v.index()) {
        case 0: return "boolean";
        case 1: return "integer";
        case 2: return "float";
        case 3: return "string";
        default: return "array";
    }
}

struct KeySpec {
    std::string_view section;
    std::string_view key;
    Type type;
    std::function<void(RunConfig&, const Value&)> set;
};

double as_number(const Value& v) {
    if (const auto* i = std::get_if<long long>(&v)) return static_cast<double>(*i);
    return std::get<double>(v);
}

long as_integer(const Value& v) { return static_cast<long>(std::get<long long>(v)); }
const std::string& as_text(const Value& v) { return std::get<std::string>(v); }

bool type_matches(Type t, const Value& v) {
    switch (t) {
        case Type::boolean: return std::holds_alternative<bool>(v);
        case Type::integer: return std::holds_alternative<long long>(v);
        case Type::number: return std::holds_alternative<long long>(v) || std::holds_alternative<double>(v);
        case Type::text: return std::holds_alternative<std::string>(v);
        case Type::number_list: return std::holds_alternative<NumberList>(v);
    }
    return false;
}

const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = {
        {"grid", "L", Type::number, [](RunConfig& c, const Value& v) { c.half_length = as_number(v); }},
        {"grid", "J", Type::integer, [](RunConfig& c, const Value& v) { c.cells = as_integer(v); }},
        {"time", "T", Type::number, [](RunConfig& c, const Value& v) { c.horizon = as_number(v); }},
        {"time", "n", Type::integer, [](RunConfig& c, const Value& v) { c.steps = as_integer(v); }},
        {"physics", "nu", Type::number, [](RunConfig& c, const Value& v) { c.physics.nu = as_number(v); }},
        {"physics", "M_u", Type::number, [](RunConfig& c, const Value& v) { c.physics.control_weight = as_number(v); }},
        {"physics", "M_w", Type::number, [](RunConfig& c, const Value& v) { c.physics.tracking_weight = as_number(v); }},
        {"regularization", "f_kind", Type::text,
         [](RunConfig& c, const Value& v) { c.flux_kind = parse_flux_kind(as_text(v)); }},
        {"regularization", "epsilon", Type::number, [](RunConfig& c, const Value& v) { c.epsilon = as_number(v); }},
        {"regularization", "k_kind", Type::text,
         [](RunConfig& c, const Value& v) { c.constraint_kind = parse_constraint_kind(as_text(v)); }},
        {"regularization", "delta", Type::number, [](RunConfig& c, const Value& v) { c.delta = as_number(v); }},
        {"reaction", "a3", Type::number, [](RunConfig& c, const Value& v) { c.a3 = as_number(v); }},
        {"reaction", "a1", Type::number, [](RunConfig& c, const Value& v) { c.a1 = as_number(v); }},
        {"reaction", "a0", Type::number, [](RunConfig& c, const Value& v) { c.a0 = as_number(v); }},
        {"data", "w0", Type::text, [](RunConfig& c, const Value& v) { c.initial = parse_field_spec(as_text(v)); }},
        {"data", "wad", Type::text, [](RunConfig& c, const Value& v) { c.target = parse_field_spec(as_text(v)); }},
        {"solver", "newton_tol", Type::number, [](RunConfig& c, const Value& v) { c.solver.newton_tol = as_number(v); }},
        {"solver", "max_newton", Type::integer,
         [](RunConfig& c, const Value& v) { c.solver.max_newton = static_cast<int>(as_integer(v)); }},
        {"solver", "armijo_slope", Type::number,
         [](RunConfig& c, const Value& v) { c.solver.armijo_slope = as_number(v); }},
        {"solver", "backtrack", Type::number, [](RunConfig& c, const Value& v) { c.solver.backtrack = as_number(v); }},
        {"solver", "min_step", Type::number, [](RunConfig& c, const Value& v) { c.solver.min_step = as_number(v); }},
        {"optimize", "max_iters", Type::integer,
         [](RunConfig& c, const Value& v) { c.optimize.max_iters = static_cast<int>(as_integer(v)); }},
        {"optimize", "tolerance", Type::number,
         [](RunConfig& c, const Value& v) { c.optimize.tolerance = as_number(v); }},
        {"optimize", "step_rule", Type::text,
         [](RunConfig& c, const Value& v) { c.optimize.step_rule = parse_step_rule(as_text(v)); }},
        {"optimize", "initial_step", Type::number,
         [](RunConfig& c, const Value& v) { c.optimize.initial_step = as_number(v); }},
        {"optimize", "armijo_slope", Type::number,
         [](RunConfig& c, const Value& v) { c.optimize.armijo_slope = as_number(v); }},
        {"optimize", "max_backtracks", Type::integer,
         [](RunConfig& c, const Value& v) { c.optimize.max_backtracks = static_cast<int>(as_integer(v)); }},
        {"optimize", "fd_directions", Type::integer,
         [](RunConfig& c, const Value& v) { c.fd_directions = as_integer(v); }},
        {"optimize", "fd_lambda", Type::number, [](RunConfig& c, const Value& v) { c.fd_lambda = as_number(v); }},
        {"optimize", "taylor_lambda", Type::number,
         [](RunConfig& c, const Value& v) { c.taylor_lambda = as_number(v); }},
        {"continuation", "levels", Type::integer, [](RunConfig& c, const Value& v) { c.levels = as_integer(v); }},
        {"continuation", "eps_floor", Type::number, [](RunConfig& c, const Value& v) { c.eps_floor = as_number(v); }},
        {"continuation", "delta_floor", Type::number,
         [](RunConfig& c, const Value& v) { c.delta_floor = as_number(v); }},
        {"continuation", "rho", Type::number_list,
         [](RunConfig& c, const Value& v) { c.rhos = std::get<NumberList>(v); }},
        {"output", "dir", Type::text, [](RunConfig& c, const Value& v) { c.output_dir = as_text(v); }},
        {"output", "seed", Type::integer,
         [](RunConfig& c, const Value& v) {
             if (as_integer(v) < 0) throw ConfigError("seed must be nonnegative");
             c.seed = static_cast<std::uint64_t>(as_integer(v));
         }},
    };
    return table;
}

bool known_section(std::string_view name) {
    return std::ranges::any_of(key_table(), [&](const KeySpec& k) { return k.section == name; });
}

/// Range checks that do not need a built setup.
void check_ranges(const RunConfig& c) {
    if (!(c.half_length > 0.0) || !std::isfinite(c.half_length)) throw ConfigError("grid.L must be positive");
    if (c.cells < 2) throw ConfigError("grid.J must be at least 2");
    if (!(c.horizon > 0.0) || !std::isfinite(c.horizon)) throw ConfigError("time.T must be positive");
    if (c.steps < 1) throw ConfigError("time.n must be at least 1");
    if (!(c.physics.control_weight >= 0.0) || !(c.physics.tracking_weight >= 0.0)) {
        throw ConfigError("physics.M_u and physics.M_w must be nonnegative");
    }
    if (c.fd_directions < 1) throw ConfigError("optimize.fd_directions must be at least 1");
    if (!(c.fd_lambda > 0.0) || !(c.taylor_lambda > 0.0)) throw ConfigError("optimize lambdas must be positive");
    for (double r : c.rhos) {
        if (!(r >= 0.0)) throw ConfigError("continuation.rho entries must be nonnegative");
    }
    if (c.output_dir.empty()) throw ConfigError("output.dir must not be empty");
    c.solver.validate();
    c.optimize.validate();
    c.schedule().validate();
}

class Assigner {
public:
    explicit Assigner(std::string origin) : origin_(std::move(origin)) {}

    ConfigError error(const std::string& where, const std::string& msg) const {
        return ConfigError(origin_ + ":" + where + ": " + msg);
    }
    [[noreturn]] void fail(const std::string& where, const std::string& msg) const { throw error(where, msg); }

    void assign(RunConfig& cfg, std::string_view section, std::string_view key, const Value& v,
                const std::string& where) {
        const auto& table = key_table();
        const auto it = std::ranges::find_if(table, [&](const KeySpec& k) { return k.section == section && k.key == key; });
        if (it == table.end()) {
            fail(where, "unknown key '" + std::string(key) + "' in section [" + std::string(section) + "]");
        }
        const std::string full = std::string(section) + "." + std::string(key);
        if (!type_matches(it->type, v)) {
            fail(where, "type mismatch for '" + full + "': expected " + std::string(type_name(it->type)) + ", got " +
                            std::string(value_name(v)));
        }
        if (!seen_.insert(full).second) fail(where, "duplicate key '" + full + "'");
        try {
            it->set(cfg, v);
        } catch (const ConfigError& e) {
            fail(where, "'" + full + "': " + e.what());
        }
    }

private:
    std::string origin_;
    std::set<std::string> seen_;
};

Value parse_value(const std::string& raw, const std::function<ConfigError(const std::string&)>& error) {
    if (raw.empty()) throw error("missing value");
    if (raw.front() == '"' || raw.front() == '\'') {
        const char q = raw.front();
        if (raw.size() < 2 || raw.back() != q) throw error("unterminated string");
        const std::string body = raw.substr(1, raw.size() - 2);
        if (body.find(q) != std::string::npos) throw error("stray quote inside string");
        return body;
    }
    if (raw == "true") return true;
    if (raw == "false") return false;
    if (raw.front() == '[') {
        if (raw.back() != ']') throw error("unterminated array");
        NumberList list;
        const std::string body = trim(std::string_view(raw).substr(1, raw.size() - 2));
        if (body.empty()) return list;
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string t = trim(item);
            if (t.empty()) continue;  // trailing comma
            double v = 0.0;
            if (!parse_double(t, v)) throw error("array entries must be numbers, got '" + t + "'");
            list.push_back(v);
        }
        return list;
    }
    std::string digits = raw;
    std::erase(digits, '_');
    const bool integral = digits.find_first_of(".eEn") == std::string::npos;  // 'n' catches nan/inf
    if (integral) {
        long long iv = 0;
        const char* first = digits.data();
        if (*first == '+') ++first;
        const auto [ptr, ec] = std::from_chars(first, digits.data() + digits.size(), iv);
        if (ec == std::errc() && ptr == digits.data() + digits.size()) return iv;
    } else {
        double dv = 0.0;
        if (parse_double(digits, dv) && std::isfinite(dv)) return dv;
    }
    throw error("cannot parse value '" + raw + "' (strings need quotes)");
}

/// Strips a trailing '#' comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
    char quote = 0;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char ch = line[k];
        if (quote) {
            if (ch == quote) quote = 0;
        } else if (ch == '"' || ch == '\'') {
            quote = ch;
        } else if (ch == '#') {
            return line.substr(0, k);
        }
    }
    return line;
}

Value json_to_value(const nlohmann::json& j, const std::function<ConfigError(const std::string&)>& error) {
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number_integer()) return j.get<long long>();
    if (j.is_number_float()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    if (j.is_array()) {
        NumberList list;
        for (const auto& e : j) {
            if (!e.is_number()) throw error("array entries must be numbers");
            list.push_back(e.get<double>());
        }
        return list;
    }
    throw error("unsupported JSON value");
}

}  // namespace

RunConfig parse_config_text(std::string_view text, std::string_view origin) {
    RunConfig cfg;
    Assigner assigner{std::string(origin)};
    std::string section;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = std::to_string(lineno);
        auto fail = [&](const std::string& msg) { assigner.fail(where, msg); };
        auto error = [&](const std::string& msg) { return assigner.error(where, msg); };
        const std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail("malformed section header '" + s + "'");
            section = trim(std::string_view(s).substr(1, s.size() - 2));
            if (!known_section(section)) fail("unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail("expected 'key = value', got '" + s + "'");
        const std::string key = trim(std::string_view(s).substr(0, eq));
        if (key.empty()) fail("missing key before '='");
        if (section.empty()) fail("key '" + key + "' appears before any [section]");
        const Value v = parse_value(trim(std::string_view(s).substr(eq + 1)), error);
        assigner.assign(cfg, section, key, v, where);
    }
    try {
        check_ranges(cfg);
    } catch (const AssumptionError&) {
        throw;
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(origin) + ": " + e.what());
    }
    return cfg;
}

RunConfig parse_config_json(const nlohmann::json& config, std::string_view origin) {
    if (!config.is_object()) throw ConfigError(std::string(origin) + ": config must be a JSON object");
    RunConfig cfg;
    Assigner assigner{std::string(origin)};
    for (const auto& [section, body] : config.items()) {
        if (!known_section(section)) assigner.fail("config", "unknown section [" + section + "]");
        if (!body.is_object()) assigner.fail("config." + section, "section must be an object");
        for (const auto& [key, value] : body.items()) {
            const std::string where = "config." + section + "." + key;
            auto error = [&](const std::string& msg) { return assigner.error(where, msg); };
            assigner.assign(cfg, section, key, json_to_value(value, error), where);
        }
    }
    try {
        check_ranges(cfg);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(origin) + ": " + e.what());
    }
    return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");

    RunConfig cfg;
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(path.string() + ": JSON parse error at byte " + std::to_string(e.byte));
        }
        cfg = parse_config_json(j.contains("config") ? j.at("config") : j, path.string());
    } else {
        cfg = parse_config_text(text, path.string());
    }
    build_validated_setup(cfg);
    return cfg;
}

ModelSetup build_setup(const RunConfig& c) {
    check_ranges(c);
    Grid grid(c.half_length, static_cast<std::size_t>(c.cells));
    const auto n = static_cast<std::size_t>(c.steps);
    return ModelSetup{grid,
                      c.physics,
                      FluxRegularization(c.flux_kind, c.epsilon),
                      ConstraintRegularization(c.constraint_kind, c.delta),
                      Reaction(c.a3, c.a1, c.a0),
                      c.horizon,
                      n,
                      c.initial.evaluate(grid),
                      Trajectory(n, c.target.evaluate(grid))};
}

ModelSetup build_validated_setup(const RunConfig& config) {
    ModelSetup setup = build_setup(config);
    require_valid(setup);
    return setup;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["grid"] = {{"L", half_length}, {"J", cells}};
    j["time"] = {{"T", horizon}, {"n", steps}};
    j["physics"] = {{"nu", physics.nu}, {"M_u", physics.control_weight}, {"M_w", physics.tracking_weight}};
    j["regularization"] = {{"f_kind", std::string(ac::to_string(flux_kind))},
                           {"epsilon", epsilon},
                           {"k_kind", std::string(ac::to_string(constraint_kind))},
                           {"delta", delta}};
    j["reaction"] = {{"a3", a3}, {"a1", a1}, {"a0", a0}};
    j["data"] = {{"w0", initial.to_string()}, {"wad", target.to_string()}};
    j["solver"] = {{"newton_tol", solver.newton_tol},
                   {"max_newton", solver.max_newton},
                   {"armijo_slope", solver.armijo_slope},
                   {"backtrack", solver.backtrack},
                   {"min_step", solver.min_step}};
    j["optimize"] = {{"max_iters", optimize.max_iters},
                     {"tolerance", optimize.tolerance},
                     {"step_rule", std::string(ac::to_string(optimize.step_rule))},
                     {"initial_step", optimize.initial_step},
                     {"armijo_slope", optimize.armijo_slope},
                     {"max_backtracks", optimize.max_backtracks},
                     {"fd_directions", fd_directions},
                     {"fd_lambda", fd_lambda},
                     {"taylor_lambda", taylor_lambda}};
    j["continuation"] = {{"levels", levels}, {"eps_floor", eps_floor}, {"delta_floor", delta_floor}, {"rho", rhos}};
    j["output"] = {{"dir", output_dir}, {"seed", seed}};
    return j;
}

std::string RunConfig::to_text() const {
    const nlohmann::json j = to_json();
    std::string out;
    for (const auto& [section, body] : j.items()) {
        out += "[" + section + "]\n";
        for (const auto& [key, v] : body.items()) {
            out += key + " = ";
            if (v.is_string()) {
                out += "\"" + v.get<std::string>() + "\"";
            } else if (v.is_array()) {
                out += "[";
                for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + format_float(v[k].get<double>());
                out += "]";
            } else if (v.is_number_float()) {
                out += format_float(v.get<double>());
            } else {
                out += v.dump();
            }
            out += "\n";
        }
        out += "\n";
    }
    return out;
}

}  // namespace ac
