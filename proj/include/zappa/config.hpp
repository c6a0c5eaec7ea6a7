#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "zappa/error.hpp"
#include "zappa/io.hpp"
#include "zappa/kernel.hpp"
#include "zappa/micro_solver.hpp"
#include "zappa/profile.hpp"
#include "zappa/rational.hpp"
#include "zappa/toml_lite.hpp"

namespace zappa {

using Json = nlohmann::json;

struct ProfileSpec {
    std::string kind = "parabolic";  ///< parabolic | constant | poly
    Rational c = 1;
    std::vector<Rational> coeffs;

    VelocityProfile build() const {
        if (kind == "parabolic") return VelocityProfile::parabolic();
        if (kind == "constant") return VelocityProfile::constant(c);
        return VelocityProfile::polynomial(coeffs);
    }
};

struct KernelSpec {
    std::string kind = "exponential";  ///< exponential | general
    /// general kernels: order n -> raw moment mu_n(y)
    std::vector<std::pair<int, RawMoment>> moments;
};

struct GridSpec {
    double L = 400.0;
    int Nx = 1024;
    int n_nodes = kDefaultCrossNodes;
    Boundary boundary = Boundary::periodic;
};

struct MicroSpec {
    double dt = 0.05;
    double t_end = 50.0;
    std::vector<double> output_times{0.0, 10.0, 20.0, 30.0, 40.0, 50.0};
    std::string ic = "gaussian";  ///< gaussian | step | point | table | ypoly
    double x0 = 200.0;
    double sigma = 20.0;
    std::vector<double> ic_table;
    std::vector<Rational> ic_coeffs;  ///< ypoly: x-uniform u(y)
};

struct McSpec {
    std::uint64_t n_particles = 100000;
    std::uint64_t seed = 20190417;
    std::vector<double> t_outputs;
    std::optional<double> initial_y;
    std::uint64_t hist_x_bins = 0;  ///< 0 disables the histogram output
    std::uint64_t hist_y_bins = 8;

    McSpec() {
        for (int k = 0; k <= 20; ++k) t_outputs.push_back(10.0 * k);
    }
};

struct MacroSpec {
    std::string method = "spectral";  ///< spectral | fd | both
    double dt = 0.0;                  ///< finite-difference step; 0 picks 0.9 of the stability limit
};

struct DeriveSpec {
    int order = 2;
    std::string method = "hierarchy";  ///< hierarchy | eigenspace
};

/**
 * @brief Everything one run of the pipeline needs.
 *
 * Parsed from a configuration file; unknown keys are errors. to_tree() is the
 * canonical form: it is what gets hashed and echoed into every summary.
 */
struct RunConfig {
    ProfileSpec profile;
    KernelSpec kernel;
    GridSpec grid;
    MicroSpec micro;
    McSpec mc;
    MacroSpec macro;
    DeriveSpec derive;
    std::string output_dir;

    static RunConfig from_text(std::string_view text) { return from_tree(TomlLite::parse(text)); }

    static RunConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return from_text(ss.str());
    }

    static RunConfig from_tree(const Json& tree);
    Json to_tree() const;
    std::string to_toml() const;
    std::string hash() const { return fnv1a_hex(to_tree().dump()); }
    void validate() const;

    VelocityProfile velocity_profile() const { return profile.build(); }
    JumpKernel jump_kernel() const;
    MicroGrid micro_grid() const {
        return MicroGrid{grid.L, grid.Nx, grid.boundary, build_cross_section(grid.n_nodes)};
    }

    friend bool operator==(const RunConfig& a, const RunConfig& b) { return a.to_tree() == b.to_tree(); }
};

/// Applies "section.key=value" overrides on top of a parsed tree.
inline void apply_override(Json& tree, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form key=value");
    Json patch = TomlLite::parse(assignment.substr(0, eq) + " = " + assignment.substr(eq + 1) + "\n");
    tree.merge_patch(patch);
}

namespace config_detail {

class Reader {
public:
    Reader(const Json& node, std::string prefix) : node_(node), prefix_(std::move(prefix)) {
        if (!node_.is_object()) throw ConfigError("'" + prefix_ + "' must be a table");
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    const Json& raw(const std::string& key) {
        seen_.insert(key);
        return node_.at(key);
    }

    template <class T>
    void read(const std::string& key, T& out) {
        if (!has(key)) return;
        out = convert<T>(raw(key), name(key));
    }

    std::string name(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

    void finish() const {
        for (auto it = node_.begin(); it != node_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError("unknown key '" + name(it.key()) + "'");
    }

    template <class T>
    static T convert(const Json& v, const std::string& where);

private:
    const Json& node_;
    std::string prefix_;
    std::set<std::string> seen_;
};

inline Rational to_rational(const Json& v, const std::string& where) {
    try {
        if (v.is_string()) return parse_rational(v.get<std::string>());
        if (v.is_number_integer()) return Rational(v.get<long long>());
        if (v.is_number_float()) return parse_rational(format_shortest(v.get<double>()));
    } catch (const InvalidArgument& e) {
        throw ConfigError("'" + where + "': " + e.what());
    }
    throw ConfigError("'" + where + "' must be a number or a rational string");
}

template <class T>
T Reader::convert(const Json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError("'" + where + "' must be a number");
        return v.get<double>();
    } else if constexpr (std::is_same_v<T, int>) {
        if (!v.is_number_integer()) throw ConfigError("'" + where + "' must be an integer");
        return v.get<int>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw ConfigError("'" + where + "' must be a non-negative integer");
        return v.get<std::uint64_t>();
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("'" + where + "' must be a string");
        return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, Rational>) {
        return to_rational(v, where);
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        if (!v.is_array()) throw ConfigError("'" + where + "' must be an array");
        std::vector<double> out;
        for (const auto& x : v) out.push_back(convert<double>(x, where));
        return out;
    } else if constexpr (std::is_same_v<T, std::vector<Rational>>) {
        if (!v.is_array()) throw ConfigError("'" + where + "' must be an array");
        std::vector<Rational> out;
        for (const auto& x : v) out.push_back(to_rational(x, where));
        return out;
    } else {
        static_assert(sizeof(T) == 0, "unsupported config type");
    }
}

inline Json rationals_to_json(const std::vector<Rational>& v) {
    Json arr = Json::array();
    for (const auto& r : v) arr.push_back(to_string(r));
    return arr;
}

inline RawMoment parse_moment(const Json& entry, const std::string& where, int& order) {
    if (!entry.is_array() || entry.size() < 2 || !entry[0].is_number_integer())
        throw ConfigError("'" + where + "' entries must look like [n, [coeffs...]], [n, \"nodes\", [values...]] or [n, \"divergent\"]");
    order = entry[0].get<int>();
    if (order < 1) throw ConfigError("'" + where + "' moment orders start at 1 (mu_0 = 1 is implied)");
    if (entry[1].is_string()) {
        const auto tag = entry[1].get<std::string>();
        if (tag == "divergent" && entry.size() == 2) return Divergent{};
        if (tag == "nodes" && entry.size() == 3) return Reader::convert<std::vector<double>>(entry[2], where);
        throw ConfigError("'" + where + "' has an unknown moment form '" + tag + "'");
    }
    if (entry.size() != 2) throw ConfigError("'" + where + "' polynomial moment entries have two elements");
    return YPolynomial(Reader::convert<std::vector<Rational>>(entry[1], where));
}

inline Json moment_to_json(int order, const RawMoment& m) {
    if (std::holds_alternative<Divergent>(m)) return Json::array({order, "divergent"});
    if (const auto* nodal = std::get_if<std::vector<double>>(&m)) return Json::array({order, "nodes", *nodal});
    return Json::array({order, rationals_to_json(std::get<YPolynomial>(m).coeffs())});
}

}  // namespace config_detail

inline RunConfig RunConfig::from_tree(const Json& tree) {
    using config_detail::Reader;
    RunConfig cfg;
    Reader top(tree, "");
    top.read("profile", cfg.profile.kind);
    top.read("c", cfg.profile.c);
    top.read("coeffs", cfg.profile.coeffs);
    top.read("kernel", cfg.kernel.kind);
    top.read("output_dir", cfg.output_dir);
    if (top.has("moments")) {
        const Json& arr = top.raw("moments");
        if (!arr.is_array()) throw ConfigError("'moments' must be an array");
        for (const auto& entry : arr) {
            int order = 0;
            RawMoment m = config_detail::parse_moment(entry, "moments", order);
            cfg.kernel.moments.emplace_back(order, std::move(m));
        }
    }
    if (top.has("grid")) {
        Reader r(top.raw("grid"), "grid");
        r.read("L", cfg.grid.L);
        r.read("Nx", cfg.grid.Nx);
        r.read("n_nodes", cfg.grid.n_nodes);
        std::string boundary = to_string(cfg.grid.boundary);
        r.read("boundary", boundary);
        if (boundary == "periodic") {
            cfg.grid.boundary = Boundary::periodic;
        } else if (boundary == "inflow-zero") {
            cfg.grid.boundary = Boundary::inflow_zero;
        } else {
            throw ConfigError("'grid.boundary' must be \"periodic\" or \"inflow-zero\"");
        }
        r.finish();
    }
    if (top.has("micro")) {
        Reader r(top.raw("micro"), "micro");
        r.read("dt", cfg.micro.dt);
        r.read("t_end", cfg.micro.t_end);
        r.read("output_times", cfg.micro.output_times);
        r.read("ic", cfg.micro.ic);
        r.read("x0", cfg.micro.x0);
        r.read("sigma", cfg.micro.sigma);
        r.read("ic_table", cfg.micro.ic_table);
        r.read("ic_coeffs", cfg.micro.ic_coeffs);
        r.finish();
    }
    if (top.has("mc")) {
        Reader r(top.raw("mc"), "mc");
        r.read("n_particles", cfg.mc.n_particles);
        r.read("seed", cfg.mc.seed);
        r.read("t_outputs", cfg.mc.t_outputs);
        if (r.has("initial_y")) {
            const Json& v = r.raw("initial_y");
            if (v.is_string() && v.get<std::string>() == "uniform") {
                cfg.mc.initial_y.reset();
            } else {
                cfg.mc.initial_y = Reader::convert<double>(v, "mc.initial_y");
            }
        }
        r.read("hist_x_bins", cfg.mc.hist_x_bins);
        r.read("hist_y_bins", cfg.mc.hist_y_bins);
        r.finish();
    }
    if (top.has("macro")) {
        Reader r(top.raw("macro"), "macro");
        r.read("method", cfg.macro.method);
        r.read("dt", cfg.macro.dt);
        r.finish();
    }
    if (top.has("derive")) {
        Reader r(top.raw("derive"), "derive");
        r.read("order", cfg.derive.order);
        r.read("method", cfg.derive.method);
        r.finish();
    }
    top.finish();
    cfg.validate();
    return cfg;
}

inline Json RunConfig::to_tree() const {
    Json t = Json::object();
    t["profile"] = profile.kind;
    if (profile.kind == "constant") t["c"] = to_string(profile.c);
    if (profile.kind == "poly") t["coeffs"] = config_detail::rationals_to_json(profile.coeffs);
    t["kernel"] = kernel.kind;
    if (kernel.kind == "general") {
        Json arr = Json::array();
        for (const auto& [order, m] : kernel.moments) arr.push_back(config_detail::moment_to_json(order, m));
        t["moments"] = arr;
    }
    if (!output_dir.empty()) t["output_dir"] = output_dir;
    t["grid"] = {{"L", grid.L}, {"Nx", grid.Nx}, {"n_nodes", grid.n_nodes}, {"boundary", to_string(grid.boundary)}};
    Json m = {{"dt", micro.dt}, {"t_end", micro.t_end}, {"output_times", micro.output_times}, {"ic", micro.ic}};
    if (micro.ic == "gaussian" || micro.ic == "step" || micro.ic == "point") m["x0"] = micro.x0;
    if (micro.ic == "gaussian") m["sigma"] = micro.sigma;
    if (micro.ic == "table") m["ic_table"] = micro.ic_table;
    if (micro.ic == "ypoly") m["ic_coeffs"] = config_detail::rationals_to_json(micro.ic_coeffs);
    t["micro"] = m;
    Json mc_tree = {{"n_particles", mc.n_particles}, {"seed", mc.seed}, {"t_outputs", mc.t_outputs},
                    {"hist_x_bins", mc.hist_x_bins}, {"hist_y_bins", mc.hist_y_bins}};
    if (mc.initial_y) {
        mc_tree["initial_y"] = *mc.initial_y;
    } else {
        mc_tree["initial_y"] = "uniform";
    }
    t["mc"] = mc_tree;
    t["macro"] = {{"method", macro.method}, {"dt", macro.dt}};
    t["derive"] = {{"order", derive.order}, {"method", derive.method}};
    return t;
}

namespace config_detail {

inline std::string toml_value(const Json& v) {
    if (v.is_string()) {
        std::string out = "\"";
        for (char c : v.get<std::string>()) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        return out + "\"";
    }
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
    if (v.is_number_float()) {
        std::string s = format_shortest(v.get<double>());
        if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
        return s;
    }
    if (v.is_array()) {
        std::string out = "[";
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (k) out += ", ";
            out += toml_value(v[k]);
        }
        return out + "]";
    }
    throw ConfigError("cannot write value to config text");
}

}  // namespace config_detail

inline std::string RunConfig::to_toml() const {
    const Json t = to_tree();
    std::string out;
    for (auto it = t.begin(); it != t.end(); ++it)
        if (!it.value().is_object()) out += it.key() + " = " + config_detail::toml_value(it.value()) + "\n";
    for (auto it = t.begin(); it != t.end(); ++it) {
        if (!it.value().is_object()) continue;
        out += "\n[" + it.key() + "]\n";
        for (auto kv = it.value().begin(); kv != it.value().end(); ++kv)
            out += kv.key() + " = " + config_detail::toml_value(kv.value()) + "\n";
    }
    return out;
}

inline void RunConfig::validate() const {
    auto bad = [](const std::string& what) { throw ConfigError(what); };
    if (profile.kind != "parabolic" && profile.kind != "constant" && profile.kind != "poly")
        bad("'profile' must be \"parabolic\", \"constant\" or \"poly\"");
    if (profile.kind == "poly" && profile.coeffs.empty()) bad("'coeffs' is required for profile = \"poly\"");
    if (kernel.kind != "exponential" && kernel.kind != "general")
        bad("'kernel' must be \"exponential\" or \"general\"");
    if (kernel.kind == "general" && kernel.moments.empty()) bad("'moments' is required for kernel = \"general\"");
    if (!(grid.L > 0.0)) bad("'grid.L' must be positive");
    if (grid.Nx < 8) bad("'grid.Nx' must be at least 8");
    if (grid.n_nodes < 2) bad("'grid.n_nodes' must be at least 2");
    if (!(micro.dt > 0.0) || micro.dt > kMaxMicroDt) bad("'micro.dt' must lie in (0, 0.1]");
    if (!(micro.t_end >= 0.0)) bad("'micro.t_end' must be non-negative");
    for (std::size_t k = 0; k < micro.output_times.size(); ++k)
        if (micro.output_times[k] < 0.0 || micro.output_times[k] > micro.t_end ||
            (k > 0 && micro.output_times[k] < micro.output_times[k - 1]))
            bad("'micro.output_times' must be ascending within [0, t_end]");
    if (micro.ic != "gaussian" && micro.ic != "step" && micro.ic != "point" && micro.ic != "table" &&
        micro.ic != "ypoly")
        bad("'micro.ic' must be one of gaussian, step, point, table, ypoly");
    if (micro.ic == "gaussian" && !(micro.sigma > 0.0)) bad("'micro.sigma' must be positive");
    if (micro.ic == "ypoly" && micro.ic_coeffs.empty()) bad("'micro.ic_coeffs' is required for ic = \"ypoly\"");
    if (mc.n_particles < 1) bad("'mc.n_particles' must be at least 1");
    for (std::size_t k = 0; k < mc.t_outputs.size(); ++k)
        if (mc.t_outputs[k] < 0.0 || (k > 0 && mc.t_outputs[k] < mc.t_outputs[k - 1]))
            bad("'mc.t_outputs' must be non-negative and ascending");
    if (mc.initial_y && !(*mc.initial_y > -1.0 && *mc.initial_y < 1.0)) bad("'mc.initial_y' must lie in (-1, 1)");
    if (macro.method != "spectral" && macro.method != "fd" && macro.method != "both")
        bad("'macro.method' must be \"spectral\", \"fd\" or \"both\"");
    if (macro.dt < 0.0) bad("'macro.dt' must be non-negative");
    if (derive.order < 1) bad("'derive.order' must be at least 1");
    if (derive.method != "hierarchy" && derive.method != "eigenspace")
        bad("'derive.method' must be \"hierarchy\" or \"eigenspace\"");
}

inline JumpKernel RunConfig::jump_kernel() const {
    if (kernel.kind == "exponential") return JumpKernel::exponential(velocity_profile());
    JumpKernel::GeneralOneSided g;
    int max_order = 0;
    for (const auto& [order, m] : kernel.moments) max_order = std::max(max_order, order);
    g.raw_moments.assign(static_cast<std::size_t>(max_order) + 1, Divergent{});
    g.raw_moments[0] = YPolynomial::constant(1);
    for (const auto& [order, m] : kernel.moments) g.raw_moments[static_cast<std::size_t>(order)] = m;
    return JumpKernel::general(std::move(g));
}

}  // namespace zappa
