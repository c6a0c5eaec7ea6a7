#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "zappa/config.hpp"
#include "zappa/diagnostics.hpp"
#include "zappa/io.hpp"
#include "zappa/macro_solver.hpp"
#include "zappa/micro_solver.hpp"
#include "zappa/particle_mc.hpp"
#include "zappa/slow_manifold.hpp"

namespace zappa {

/// The configuration behind the acceptance table; also shipped as configs/paper.toml.
inline constexpr const char* kPaperPreset = R"(# parabolic channel, exponential jumps
profile = "parabolic"
kernel = "exponential"

[grid]
L = 400.0
Nx = 1024
n_nodes = 16
boundary = "periodic"

[micro]
dt = 0.05
t_end = 50.0
output_times = [0.0, 10.0, 20.0, 30.0, 40.0, 50.0]
ic = "gaussian"
x0 = 200.0
sigma = 20.0

[mc]
n_particles = 100000
seed = 20190417
t_outputs = [0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0,
             110.0, 120.0, 130.0, 140.0, 150.0, 160.0, 170.0, 180.0, 190.0, 200.0]
initial_y = "uniform"
hist_x_bins = 64
hist_y_bins = 8

[macro]
method = "spectral"
dt = 0.0

[derive]
order = 2
method = "hierarchy"
)";

inline constexpr const char* kOutputDirEnv = "ZAPPA_OUTPUT_DIR";

namespace cli_detail {

using Json = nlohmann::json;
namespace fs = std::filesystem;

inline Json number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

inline Json numbers(const std::vector<double>& xs) {
    Json arr = Json::array();
    for (double x : xs) arr.push_back(number(x));
    return arr;
}

/**
 * @brief State shared by the pipeline stages of one invocation.
 *
 * Expensive intermediate results (slow manifold, micro run) are computed once
 * and reused by later stages.
 */
class Pipeline {
public:
    Pipeline(RunConfig cfg, fs::path out_dir, int threads)
        : cfg_(std::move(cfg)), out_(std::move(out_dir)), threads_(threads) {
        Json tree = cfg_.to_tree();
        tree.erase("output_dir");
        hash_ = fnv1a_hex(tree.dump());
    }

    const fs::path& out_dir() const noexcept { return out_; }
    const std::string& hash() const noexcept { return hash_; }
    const std::vector<std::string>& written() const noexcept { return written_; }
    void clear_written() { written_.clear(); }

    void derive_stage() {
        const SlowManifold& sm = manifold(cfg_.derive.order, cfg_.derive.method);
        Json doc = header();
        doc["order"] = sm.order;
        doc["method"] = sm.method;
        doc["exact"] = sm.exact();
        doc["extension"] = sm.extension();
        doc["kernel"] = kernel().describe();
        doc["profile"] = profile_echo();
        Json coeffs = Json::object(), floats = Json::object();
        for (int n = 1; n <= sm.order; ++n) {
            const std::string key = "A" + std::to_string(n);
            if (sm.exact()) coeffs[key] = to_string((*sm.A_exact)[static_cast<std::size_t>(n - 1)]);
            floats[key] = number(sm.coefficient(n));
        }
        if (sm.exact()) doc["coefficients"] = coeffs;
        doc["coefficients_float"] = floats;
        Json V = Json::array();
        for (int n = 0; n <= sm.order; ++n) {
            Json entry = {{"n", n}};
            if (sm.V_exact) {
                const YPolynomial& p = (*sm.V_exact)[static_cast<std::size_t>(n)];
                entry["coeffs"] = config_detail::rationals_to_json(p.coeffs());
                entry["poly"] = p.str();
            }
            entry["nodes"] = numbers(sm.V[static_cast<std::size_t>(n)].values);
            V.push_back(entry);
        }
        doc["V"] = V;
        doc["cross_section"] = {{"n_nodes", sm.cs.size()}, {"nodes", numbers(sm.cs.nodes)}};
        doc["validation"] = {{"hierarchy_residual", numbers(sm.validation.hierarchy_residual)},
                             {"solvability", numbers(sm.validation.solvability)},
                             {"eigen_residual", number(sm.validation.eigen_residual)},
                             {"next_moment_exists", sm.validation.next_moment_exists}};
        write_json("derive.json", doc);
    }

    void micro_stage() {
        const MicroRun& r = micro();
        const MicroGrid& g = grid();
        std::string csv = csv_header("t,x,y,u");
        std::string mean_csv = csv_header("t,x,U");
        Json masses = Json::array(), lows = Json::array(), highs = Json::array();
        for (const auto& u : r.snapshots) {
            const auto [lo, hi] = std::minmax_element(u.values.begin(), u.values.end());
            lows.push_back(number(*lo));
            highs.push_back(number(*hi));
            for (std::size_t i = 0; i < u.nx; ++i)
                for (std::size_t j = 0; j < u.ny; ++j)
                    csv += row({u.t, g.x(i), g.cs.nodes[j], u.at(i, j)}, format_17);
            const auto U = cross_mean_profile(u, g.cs);
            for (std::size_t i = 0; i < u.nx; ++i) mean_csv += row({u.t, g.x(i), U[i]});
            masses.push_back(number(mass(u, g)));
        }
        write_text("micro_snapshots.csv", csv);
        write_text("micro_mean.csv", mean_csv);
        Json doc = header();
        doc["times"] = snapshot_times();
        doc["mass"] = masses;
        doc["min"] = lows;
        doc["max"] = highs;
        const double m0 = mass(r.snapshots.front(), g), m1 = mass(r.snapshots.back(), g);
        doc["relative_mass_drift"] = number(std::abs(m1 - m0) / std::abs(m0));
        doc["steps"] = r.steps;
        doc["fast_path"] = solver().fast_path();
        doc["boundary_warning"] = r.boundary_warning;
        write_json("micro_summary.json", doc);
    }

    void mc_stage() {
        if (cfg_.kernel.kind != "exponential")
            throw UnsupportedKernel("the particle simulation models exponential jumps only");
        McConfig mc;
        mc.n_particles = static_cast<std::size_t>(cfg_.mc.n_particles);
        mc.seed = cfg_.mc.seed;
        mc.t_outputs = cfg_.mc.t_outputs;
        mc.initial_y = cfg_.mc.initial_y;
        mc.threads = threads_;
        const McStats stats = simulate(mc, cfg_.velocity_profile());

        std::string csv = csv_header("t,mean,var,se_mean,se_var");
        for (const auto& m : stats.moments) csv += row({m.t, m.mean, m.var, m.se_mean, m.se_var});
        write_text("mc_stats.csv", csv);

        Json doc = header();
        doc["n_particles"] = mc.n_particles;
        if (stats.moments.size() >= 2) {
            const RateFit fit = fit_rates(stats);
            doc["fit"] = {{"t_lo", fit.t_lo},
                          {"t_hi", fit.t_hi},
                          {"n_times", fit.n_times},
                          {"drift", number(fit.drift)},
                          {"drift_se", number(fit.drift_se)},
                          {"var_rate", number(fit.var_rate)},
                          {"var_rate_se", number(fit.var_rate_se)}};
            const SlowManifold& sm = manifold(2, "hierarchy");
            const double drift = -sm.coefficient(1), rate = 2.0 * sm.coefficient(2);
            doc["expected"] = {{"drift", number(drift)}, {"var_rate", number(rate)}};
            doc["z"] = {{"drift", number((fit.drift - drift) / fit.drift_se)},
                        {"var_rate", number((fit.var_rate - rate) / fit.var_rate_se)}};
        }
        if (cfg_.mc.hist_x_bins > 0 && !stats.ensembles.empty()) {
            const Histogram hist = histogram(stats, stats.ensembles.back().t, cfg_.mc.hist_x_bins, cfg_.mc.hist_y_bins);
            std::string h = csv_header("t,x_lo,x_hi,y_lo,y_hi,density");
            for (std::size_t i = 0; i < hist.x_bins(); ++i)
                for (std::size_t j = 0; j < hist.y_bins(); ++j)
                    h += row({hist.t, hist.x_edges[i], hist.x_edges[i + 1], hist.y_edges[j], hist.y_edges[j + 1],
                              hist.density[i * hist.y_bins() + j]});
            write_text("mc_histogram.csv", h);
            doc["histogram_t"] = hist.t;
        }
        write_json("mc_summary.json", doc);
    }

    void macro_stage() {
        const auto& series = macro_series();
        std::string csv = csv_header("t,x,U");
        for (const auto& U : series)
            for (std::size_t i = 0; i < U.U.size(); ++i) csv += row({U.t, U.h() * static_cast<double>(i), U.U[i]});
        write_text("macro.csv", csv);
        Json doc = header();
        const SlowManifold& sm = manifold(2, "hierarchy");
        doc["A1"] = number(sm.coefficient(1));
        doc["A2"] = number(sm.coefficient(2));
        doc["method"] = cfg_.macro.method;
        doc["times"] = snapshot_times();
        if (cfg_.macro.method != "spectral") {
            const auto& fd = fd_series();
            std::string fd_csv = csv_header("t,x,U");
            for (const auto& U : fd)
                for (std::size_t i = 0; i < U.U.size(); ++i)
                    fd_csv += row({U.t, U.h() * static_cast<double>(i), U.U[i]});
            write_text("macro_fd.csv", fd_csv);
            doc["fd_dt"] = number(fd_dt());
            if (cfg_.macro.method == "both") {
                Json gaps = Json::array();
                for (std::size_t k = 0; k < fd.size(); ++k) {
                    std::vector<double> d(fd[k].U.size());
                    for (std::size_t i = 0; i < d.size(); ++i) d[i] = fd[k].U[i] - series[k].U[i];
                    gaps.push_back(number(sup_norm(d)));
                }
                doc["fd_vs_spectral_inf"] = gaps;
            }
        }
        write_json("macro_summary.json", doc);
    }

    void residual_stage() {
        const MicroRun& r = micro();
        const SlowManifold& sm = manifold(2, "hierarchy");
        const MicroGrid& g = grid();
        std::string csv = csv_header("t,x,U,Ut,Ux,Uxx,rho");
        Json per_time = Json::array();
        for (const auto& u : r.snapshots) {
            const ResidualField res = defect_residual(solver(), u, sm);
            for (std::size_t i = 0; i < res.U.size(); ++i)
                csv += row({res.t, g.x(i), res.U[i], res.Ut[i], res.Ux[i], res.Uxx[i], res.rho[i]});
            const ShapeReport shape = shape_check(u, g, sm);
            per_time.push_back({{"t", res.t},
                                {"rho_inf", number(res.rho_inf)},
                                {"rho_l2", number(res.rho_l2)},
                                {"Ut_inf", number(res.Ut_inf)},
                                {"relative", number(res.relative())},
                                {"shape_relative_deviation", number(shape.relative_deviation)},
                                {"pre_emergent", shape.pre_emergent}});
        }
        write_text("residual.csv", csv);
        Json doc = header();
        doc["A1"] = number(sm.coefficient(1));
        doc["A2"] = number(sm.coefficient(2));
        doc["snapshots"] = per_time;
        if (x_uniform_ic()) {
            const EmergenceReport e = transient_decay(r.snapshots, g);
            doc["emergence"] = {{"rate", number(e.rate)},
                                {"amplitude", number(e.amplitude)},
                                {"t_first", e.t_first},
                                {"t_last", e.t_last},
                                {"n_points", e.n_points},
                                {"r_squared", number(e.r_squared)},
                                {"already_on_manifold", e.already_on_manifold}};
        }
        write_json("residual.json", doc);
    }

    void compare_stage() {
        const auto& macro = macro_series();
        std::vector<MacroField> micro;
        for (const auto& u : this->micro().snapshots) micro.push_back(to_macro(u, grid()));
        const ComparisonReport rep = compare_micro_macro(micro, macro);
        std::string csv = csv_header("t,x,U_micro,U_macro,diff");
        for (std::size_t k = 0; k < micro.size(); ++k)
            for (std::size_t i = 0; i < micro[k].U.size(); ++i)
                csv += row({micro[k].t, micro[k].h() * static_cast<double>(i), micro[k].U[i], macro[k].U[i],
                            micro[k].U[i] - macro[k].U[i]});
        write_text("compare.csv", csv);
        Json doc = header();
        doc["times"] = numbers(rep.times);
        doc["rel_l2"] = numbers(rep.rel_l2);
        doc["rel_inf"] = numbers(rep.rel_inf);
        doc["worst_l2"] = number(rep.worst_l2);
        doc["worst_inf"] = number(rep.worst_inf);
        write_json("compare.json", doc);
    }

    void write_json(const std::string& name, const Json& doc) { write_text(name, doc.dump(2) + "\n"); }

    Json header() const {
        return {{"config", cfg_.to_tree()}, {"config_hash", hash_}, {"seed", cfg_.mc.seed}};
    }

private:
    RunConfig cfg_;
    fs::path out_;
    int threads_;
    std::string hash_;
    std::vector<std::string> written_;

    std::optional<JumpKernel> kernel_;
    std::optional<MicroGrid> grid_;
    std::map<std::pair<int, std::string>, SlowManifold> manifolds_;
    std::optional<MicroSolver> solver_;
    std::optional<MicroRun> micro_;
    std::optional<std::vector<MacroField>> macro_;
    std::optional<std::vector<MacroField>> fd_;

    const JumpKernel& kernel() {
        if (!kernel_) kernel_ = cfg_.jump_kernel();
        return *kernel_;
    }

    const MicroGrid& grid() {
        if (!grid_) grid_ = cfg_.micro_grid();
        return *grid_;
    }

    const SlowManifold& manifold(int order, const std::string& method) {
        const auto key = std::pair{order, method};
        auto it = manifolds_.find(key);
        if (it != manifolds_.end()) return it->second;
        const CrossSection& cs = grid().cs;
        SlowManifold sm = method == "eigenspace" ? zero_eigenspace(block_operator(kernel(), order, cs), cs)
                                                 : derive(kernel(), order, cs);
        return manifolds_.emplace(key, std::move(sm)).first->second;
    }

    const MicroSolver& solver() {
        if (!solver_) solver_.emplace(grid(), kernel(), threads_);
        return *solver_;
    }

    bool x_uniform_ic() const {
        return cfg_.micro.ic == "ypoly" ||
               (cfg_.micro.ic == "table" && cfg_.micro.ic_table.size() == static_cast<std::size_t>(cfg_.grid.n_nodes));
    }

    MicroField initial_field() {
        const MicroGrid& g = grid();
        IcSpec ic;
        ic.x0 = cfg_.micro.x0;
        ic.sigma = cfg_.micro.sigma;
        const std::string& kind = cfg_.micro.ic;
        if (kind == "gaussian") {
            ic.kind = IcKind::gaussian;
        } else if (kind == "step") {
            ic.kind = IcKind::step;
        } else if (kind == "point") {
            ic.kind = IcKind::point;
        } else {
            ic.kind = IcKind::table;
            if (kind == "table") {
                ic.table = cfg_.micro.ic_table;
            } else {
                const YPolynomial p(cfg_.micro.ic_coeffs);
                for (double y : g.cs.nodes) ic.table.push_back(p(y));
            }
        }
        return initial_condition(ic, g);
    }

    const MicroRun& micro() {
        if (!micro_) {
            RunSpec spec;
            spec.dt = cfg_.micro.dt;
            spec.t_end = cfg_.micro.t_end;
            spec.output_times = cfg_.micro.output_times;
            micro_ = solver().run(spec, initial_field());
        }
        return *micro_;
    }

    Json snapshot_times() {
        Json t = Json::array();
        for (const auto& u : micro().snapshots) t.push_back(u.t);
        return t;
    }

    MacroField macro_initial() { return to_macro(micro().snapshots.front(), grid()); }

    const std::vector<MacroField>& macro_series() {
        if (!macro_) {
            const SlowManifold& sm = manifold(2, "hierarchy");
            const MacroField U0 = macro_initial();
            std::vector<MacroField> out;
            for (const auto& u : micro().snapshots) {
                MacroField U = solve_spectral(sm.coefficient(1), sm.coefficient(2), U0, u.t - U0.t);
                U.t = u.t;
                out.push_back(std::move(U));
            }
            macro_ = std::move(out);
        }
        return *macro_;
    }

    double fd_dt() {
        const SlowManifold& sm = manifold(2, "hierarchy");
        if (cfg_.macro.dt > 0.0) return cfg_.macro.dt;
        return 0.9 * max_stable_fd_dt(sm.coefficient(1), sm.coefficient(2), grid().h());
    }

    const std::vector<MacroField>& fd_series() {
        if (!fd_) {
            const SlowManifold& sm = manifold(2, "hierarchy");
            const MacroField U0 = macro_initial();
            std::vector<MacroField> out;
            for (const auto& u : micro().snapshots) {
                MacroField U = solve_fd(sm.coefficient(1), sm.coefficient(2), U0, u.t - U0.t, fd_dt());
                U.t = u.t;
                out.push_back(std::move(U));
            }
            fd_ = std::move(out);
        }
        return *fd_;
    }

    Json profile_echo() const {
        const Json tree = cfg_.to_tree();
        Json p = {{"profile", tree["profile"]}, {"description", cfg_.velocity_profile().describe()}};
        if (tree.contains("c")) p["c"] = tree["c"];
        if (tree.contains("coeffs")) p["coeffs"] = tree["coeffs"];
        return p;
    }

    std::string csv_header(const std::string& columns) const {
        return "# zappa config_hash=" + hash_ + " seed=" + std::to_string(cfg_.mc.seed) + "\n" + columns + "\n";
    }

    static std::string row(std::initializer_list<double> xs, std::string (*format)(double) = format_shortest) {
        std::string line;
        bool first = true;
        for (double x : xs) {
            if (!first) line += ',';
            line += format(x);
            first = false;
        }
        return line + "\n";
    }

    void write_text(const std::string& name, const std::string& text) {
        fs::create_directories(out_);
        const fs::path path = out_ / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error("cannot write '" + path.string() + "'");
        f << text;
        if (!f) throw Error("failed while writing '" + path.string() + "'");
        written_.push_back(name);
    }
};

/// 1 for numerical trouble during a run, 2 for anything the user can fix in the invocation or config.
inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const NumericalFailure*>(&e) || dynamic_cast<const NumericalDegeneracy*>(&e)) return 1;
    if (dynamic_cast<const Error*>(&e)) return 2;
    return 1;
}

struct Invocation {
    std::string config_path;
    std::string preset;
    std::string out;
    int threads = 0;
    std::vector<std::string> overrides;
};

inline RunConfig load_config(const Invocation& inv) {
    Json tree;
    if (!inv.preset.empty()) {
        if (!inv.config_path.empty()) throw ConfigError("give either a config file or --preset, not both");
        if (inv.preset != "paper") throw ConfigError("unknown preset '" + inv.preset + "' (available: paper)");
        tree = TomlLite::parse(kPaperPreset);
    } else {
        if (inv.config_path.empty()) throw ConfigError("no config file given (pass a path or --preset paper)");
        std::ifstream in(inv.config_path);
        if (!in) throw ConfigError("cannot open config file '" + inv.config_path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        tree = TomlLite::parse(ss.str());
    }
    for (const auto& o : inv.overrides) apply_override(tree, o);
    return RunConfig::from_tree(tree);
}

inline fs::path output_dir(const Invocation& inv, const RunConfig& cfg) {
    if (!inv.out.empty()) return inv.out;
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return "zappa_out";
}

}  // namespace cli_detail

/**
 * @brief Entry point of the zappa command-line tool.
 *
 * Subcommands derive, micro, mc, macro, residual, compare, all and
 * show-config. Returns the process exit code: 0 success, 1 numerical
 * failure, 2 usage or configuration error.
 */
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    using namespace cli_detail;
    CLI::App app{"Multiscale dispersion laboratory: slow-manifold coefficients, micro and macro solvers, residuals"};
    app.name("zappa");
    app.require_subcommand(1, 1);

    Invocation inv;
    using Stage = void (Pipeline::*)();
    const std::vector<std::pair<std::string, Stage>> stages = {
        {"derive", &Pipeline::derive_stage}, {"micro", &Pipeline::micro_stage},
        {"mc", &Pipeline::mc_stage},         {"macro", &Pipeline::macro_stage},
        {"residual", &Pipeline::residual_stage}, {"compare", &Pipeline::compare_stage},
    };
    const std::map<std::string, std::string> help = {
        {"derive", "Derive the slow manifold V_n and coefficients A_n"},
        {"micro", "Evolve the microscale density"},
        {"mc", "Monte Carlo particle simulation"},
        {"macro", "Solve the macroscale advection-diffusion equation"},
        {"residual", "Defect residual, shape check and emergence diagnostics"},
        {"compare", "Compare micro-derived and macroscale solutions"},
        {"all", "Run every stage into one report directory"},
        {"show-config", "Print the resolved configuration in canonical form"},
    };

    std::vector<CLI::App*> subs;
    for (const auto& name : {"derive", "micro", "mc", "macro", "residual", "compare", "all", "show-config"}) {
        CLI::App* sub = app.add_subcommand(name, help.at(name));
        sub->add_option("config", inv.config_path, "Configuration file");
        sub->add_option("--preset", inv.preset, "Built-in configuration instead of a file (paper)");
        sub->add_option("--set", inv.overrides, "Override one key, e.g. --set grid.Nx=2048")->take_all();
        if (std::string(name) != "show-config") {
            sub->add_option("--out,-o", inv.out,
                            std::string("Output directory (default: config output_dir, $") + kOutputDirEnv +
                                ", or ./zappa_out)");
            sub->add_option("--threads,-j", inv.threads, "Worker thread cap; results do not depend on it")
                ->check(CLI::NonNegativeNumber);
        }
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 2;
    }

    const CLI::App* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();

    RunConfig cfg;
    try {
        cfg = load_config(inv);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n\n" << chosen->help();
        return 2;
    }
    if (command == "show-config") {
        out << cfg.to_toml();
        return 0;
    }

    Pipeline pipe(cfg, output_dir(inv, cfg), inv.threads);
    if (command != "all") {
        const auto it = std::find_if(stages.begin(), stages.end(), [&](const auto& s) { return s.first == command; });
        try {
            (pipe.*(it->second))();
        } catch (const std::exception& e) {
            err << "error in " << command << ": " << e.what() << "\n";
            return exit_code_for(e);
        }
        for (const auto& f : pipe.written()) out << (pipe.out_dir() / f).string() << "\n";
        return 0;
    }

    Json manifest = pipe.header();
    Json entries = Json::array();
    int code = 0;
    for (const auto& [name, stage] : stages) {
        Json entry = {{"stage", name}};
        if (code != 0) {
            entry["status"] = "skipped";
            entries.push_back(entry);
            continue;
        }
        pipe.clear_written();
        try {
            (pipe.*stage)();
            entry["status"] = "ok";
        } catch (const std::exception& e) {
            entry["status"] = "failed";
            entry["error"] = e.what();
            err << "error in " << name << ": " << e.what() << "\n";
            code = exit_code_for(e);
        }
        entry["files"] = pipe.written();
        for (const auto& f : pipe.written()) out << (pipe.out_dir() / f).string() << "\n";
        entries.push_back(entry);
    }
    manifest["stages"] = entries;
    manifest["status"] = code == 0 ? "ok" : "failed";
    try {
        pipe.write_json("MANIFEST.json", manifest);
    } catch (const std::exception& e) {
        err << "error writing manifest: " << e.what() << "\n";
        return code != 0 ? code : 1;
    }
    return code;
}

}  // namespace zappa
