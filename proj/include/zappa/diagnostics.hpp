#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "zappa/error.hpp"
#include "zappa/macro_solver.hpp"
#include "zappa/micro_solver.hpp"
#include "zappa/slow_manifold.hpp"
#include "zappa/spectral.hpp"

namespace zappa {

inline double sup_norm(const std::vector<double>& f) {
    double m = 0.0;
    for (double x : f) m = std::max(m, std::abs(x));
    return m;
}

/// Discrete L2 norm sqrt(h * sum f_i^2).
inline double l2_norm(const std::vector<double>& f, double h) {
    double acc = 0.0;
    for (double x : f) acc += x * x;
    return std::sqrt(h * acc);
}

/// Cross-sectional mean of a micro snapshot as a macroscale field.
inline MacroField to_macro(const MicroField& u, const MicroGrid& grid) {
    return MacroField{grid.L, cross_mean_profile(u, grid.cs), u.t};
}

/**
 * @brief Error of the advection-diffusion model, rho = U_t - A1 U_x - A2 U_xx.
 *
 * U_t is the cross-mean of the exact microscale tendency (the zap averages to
 * zero), and the x-derivatives are spectral. Nothing here comes from a
 * macroscale trajectory.
 */
struct ResidualField {
    double t = 0.0;
    double A1 = 0.0;
    double A2 = 0.0;
    std::vector<double> U, Ut, Ux, Uxx, rho;
    double rho_inf = 0.0;
    double rho_l2 = 0.0;
    double Ut_inf = 0.0;

    double relative() const { return Ut_inf > 0.0 ? rho_inf / Ut_inf : 0.0; }
};

inline ResidualField defect_residual(const MicroSolver& solver, const MicroField& u, const SlowManifold& sm) {
    const MicroGrid& grid = solver.grid();
    if (grid.boundary != Boundary::periodic) throw InvalidArgument("defect residual needs a periodic grid");
    if (u.nx != grid.nx() || u.ny != grid.ny()) throw InvalidArgument("snapshot does not match the solver grid");
    if (sm.order < 2) throw InvalidArgument("defect residual needs a slow manifold of order >= 2");
    if (sm.cs.size() != grid.ny()) throw InvalidArgument("slow manifold and grid use different cross-sections");

    ResidualField r;
    r.t = u.t;
    r.A1 = sm.coefficient(1);
    r.A2 = sm.coefficient(2);
    r.U = cross_mean_profile(u, grid.cs);
    r.Ut = cross_mean_profile(solver.jump_term(u), grid.cs);
    PeriodicSpectral sp(grid.nx(), grid.L);
    r.Ux = sp.derivative(r.U, 1);
    r.Uxx = sp.derivative(r.U, 2);
    r.rho.resize(r.U.size());
    for (std::size_t i = 0; i < r.U.size(); ++i) r.rho[i] = r.Ut[i] - r.A1 * r.Ux[i] - r.A2 * r.Uxx[i];
    r.rho_inf = sup_norm(r.rho);
    r.rho_l2 = l2_norm(r.rho, grid.h());
    r.Ut_inf = sup_norm(r.Ut);
    return r;
}

/// Exponential decay of the off-manifold part of an x-uniform solution.
struct EmergenceReport {
    double rate = std::numeric_limits<double>::quiet_NaN();
    double amplitude = 0.0;  ///< fitted e(0)
    double t_first = 0.0;    ///< fit window
    double t_last = 0.0;
    std::size_t n_points = 0;
    double r_squared = 0.0;
    bool already_on_manifold = false;
};

/**
 * @brief Fits e(t) = max |u - mean_y u| ~ a exp(-rate t) by log-linear regression.
 *
 * Only snapshots with e > 1e-10 enter the fit.
 */
inline EmergenceReport transient_decay(const std::vector<MicroField>& series, const MicroGrid& grid) {
    if (series.empty()) throw InvalidArgument("transient_decay needs at least one snapshot");
    const MicroField& first = series.front();
    double scale = 0.0;
    for (double x : first.values) scale = std::max(scale, std::abs(x));
    for (std::size_t j = 0; j < first.ny; ++j)
        for (std::size_t i = 0; i < first.nx; ++i)
            if (std::abs(first.at(i, j) - first.at(0, j)) > 1e-12 * std::max(scale, 1e-300))
                throw InvalidArgument("transient_decay needs an initial condition that is uniform in x");

    auto off_manifold = [&](const MicroField& u) {
        const auto U = cross_mean_profile(u, grid.cs);
        double e = 0.0;
        for (std::size_t j = 0; j < u.ny; ++j)
            for (std::size_t i = 0; i < u.nx; ++i) e = std::max(e, std::abs(u.at(i, j) - U[i]));
        return e;
    };

    EmergenceReport rep;
    if (off_manifold(first) <= 1e-14 * std::max(scale, 1e-300)) {
        rep.already_on_manifold = true;
        return rep;
    }
    std::vector<double> ts, logs;
    for (const auto& u : series) {
        const double e = off_manifold(u);
        if (e > 1e-10) {
            ts.push_back(u.t);
            logs.push_back(std::log(e));
        }
    }
    rep.n_points = ts.size();
    if (ts.size() < 2) throw InvalidArgument("too few snapshots above the noise floor to fit a decay rate");
    const auto n = static_cast<double>(ts.size());
    double tbar = 0.0, lbar = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        tbar += ts[k];
        lbar += logs[k];
    }
    tbar /= n;
    lbar /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        sxx += (ts[k] - tbar) * (ts[k] - tbar);
        sxy += (ts[k] - tbar) * (logs[k] - lbar);
        syy += (logs[k] - lbar) * (logs[k] - lbar);
    }
    const double slope = sxy / sxx;
    rep.rate = -slope;
    rep.amplitude = std::exp(lbar - slope * tbar);
    rep.t_first = ts.front();
    rep.t_last = ts.back();
    rep.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return rep;
}

/// Distance of a snapshot from the quasistationary form U + V1 U_x + V2 U_xx.
struct ShapeReport {
    double t = 0.0;
    double relative_deviation = 0.0;
    double deviation_inf = 0.0;
    double reference_inf = 0.0;
    std::vector<double> profile;  ///< max over y of the deviation, per x-node
    bool pre_emergent = false;    ///< snapshot earlier than the emergence time
};

inline ShapeReport shape_check(const MicroField& u, const MicroGrid& grid, const SlowManifold& sm,
                               double emergence_time = 10.0) {
    if (grid.boundary != Boundary::periodic) throw InvalidArgument("shape_check needs a periodic grid");
    if (u.nx != grid.nx() || u.ny != grid.ny()) throw InvalidArgument("snapshot does not match the grid");
    if (sm.order < 2) throw InvalidArgument("shape_check needs a slow manifold of order >= 2");
    if (sm.cs.size() != grid.ny()) throw InvalidArgument("slow manifold and grid use different cross-sections");

    const auto U = cross_mean_profile(u, grid.cs);
    PeriodicSpectral sp(grid.nx(), grid.L);
    const auto Ux = sp.derivative(U, 1);
    const auto Uxx = sp.derivative(U, 2);
    const CrossField& V1 = sm.V[1];
    const CrossField& V2 = sm.V[2];

    ShapeReport rep;
    rep.t = u.t;
    rep.profile.assign(u.nx, 0.0);
    double first = 0.0, second = 0.0;
    for (std::size_t j = 0; j < u.ny; ++j) {
        for (std::size_t i = 0; i < u.nx; ++i) {
            const double a = V1[j] * Ux[i];
            const double b = V2[j] * Uxx[i];
            const double dev = std::abs(u.at(i, j) - U[i] - a - b);
            rep.profile[i] = std::max(rep.profile[i], dev);
            first = std::max(first, std::abs(a));
            second = std::max(second, std::abs(b));
        }
    }
    rep.deviation_inf = sup_norm(rep.profile);
    const double floor = 1e-12 * std::max(sup_norm(U), 1e-300);
    rep.reference_inf = std::max({first, second, floor});
    rep.relative_deviation = rep.deviation_inf / rep.reference_inf;
    rep.pre_emergent = u.t < emergence_time;
    return rep;
}

struct ComparisonReport {
    std::vector<double> times;
    std::vector<double> rel_l2;
    std::vector<double> rel_inf;
    double worst_l2 = 0.0;
    double worst_inf = 0.0;
};

/// Relative errors of micro-derived U against a macroscale series at matched times.
inline ComparisonReport compare_micro_macro(const std::vector<MacroField>& micro, const std::vector<MacroField>& macro) {
    if (micro.size() != macro.size() || micro.empty())
        throw InvalidArgument("micro and macro series must be non-empty and of equal length");
    for (std::size_t k = 0; k < micro.size(); ++k) {
        if (micro[k].U.size() != macro[k].U.size() || micro[k].L != macro[k].L)
            throw InvalidArgument("micro and macro grids differ");
        if (std::abs(micro[k].t - macro[k].t) > 1e-9 * std::max(1.0, std::abs(micro[k].t)))
            throw InvalidArgument("micro and macro output times differ");
    }
    const double m0 = micro.front().mean(), M0 = macro.front().mean();
    if (std::abs(m0 - M0) > 1e-12 * std::max({std::abs(m0), std::abs(M0), 1e-300}))
        throw InvalidArgument("micro and macro series start from different cross-means");

    ComparisonReport rep;
    for (std::size_t k = 0; k < micro.size(); ++k) {
        std::vector<double> diff(micro[k].U.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = micro[k].U[i] - macro[k].U[i];
        const double h = macro[k].h();
        const double ref2 = l2_norm(macro[k].U, h), refi = sup_norm(macro[k].U);
        rep.times.push_back(micro[k].t);
        rep.rel_l2.push_back(ref2 > 0.0 ? l2_norm(diff, h) / ref2 : l2_norm(diff, h));
        rep.rel_inf.push_back(refi > 0.0 ? sup_norm(diff) / refi : sup_norm(diff));
        rep.worst_l2 = std::max(rep.worst_l2, rep.rel_l2.back());
        rep.worst_inf = std::max(rep.worst_inf, rep.rel_inf.back());
    }
    return rep;
}

}  // namespace zappa
