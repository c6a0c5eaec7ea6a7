#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "zappa/error.hpp"
#include "zappa/spectral.hpp"

namespace zappa {

/// U(x_i, t) on the periodic grid x_i = i*L/N.
struct MacroField {
    double L = 400.0;
    std::vector<double> U;
    double t = 0.0;

    double h() const noexcept { return L / static_cast<double>(U.size()); }
    double mean() const {
        double acc = 0.0;
        for (double u : U) acc += u;
        return acc / static_cast<double>(U.size());
    }
};

namespace detail {
inline void check_macro(double A2, const MacroField& U0, double t) {
    if (A2 < 0.0) throw IllPosed("negative diffusivity A2 = " + std::to_string(A2) + " makes the macroscale PDE ill-posed");
    if (!(t >= 0.0)) throw InvalidArgument("evolution time must be non-negative");
    if (U0.U.size() < 2) throw InvalidArgument("macroscale field needs at least 2 points");
}
}  // namespace detail

/**
 * @brief Exact per-mode propagator of U_t = A1 U_x + A2 U_xx.
 *
 * Mode k is multiplied by exp((i kappa A1 - kappa^2 A2) t). The Nyquist mode
 * takes the average of its +kappa and -kappa multipliers so the result stays real.
 */
inline MacroField solve_spectral(double A1, double A2, const MacroField& U0, double t) {
    detail::check_macro(A2, U0, t);
    if (t == 0.0) return U0;
    PeriodicSpectral sp(U0.U.size(), U0.L);
    auto spec = sp.forward(U0.U);
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const double kappa = sp.wavenumber(k);
        const double decay = std::exp(-kappa * kappa * A2 * t);
        if (sp.is_nyquist(k)) {
            spec[k] *= decay * std::cos(kappa * A1 * t);
        } else {
            spec[k] *= decay * std::complex<double>(std::cos(kappa * A1 * t), std::sin(kappa * A1 * t));
        }
    }
    MacroField out{U0.L, sp.inverse_real(spec), U0.t + t};
    return out;
}

/// Largest time step the finite-difference solver accepts.
inline double max_stable_fd_dt(double A1, double A2, double h) {
    double dt = std::numeric_limits<double>::infinity();
    if (A2 > 0.0) dt = std::min(dt, 0.4 * h * h / A2);
    if (A1 != 0.0) dt = std::min(dt, 0.5 * h / std::abs(A1));
    return dt;
}

/// Central differences in x, classical RK4 in t with uniform steps of at most dt.
inline MacroField solve_fd(double A1, double A2, const MacroField& U0, double t, double dt) {
    detail::check_macro(A2, U0, t);
    const double h = U0.h();
    const double limit = max_stable_fd_dt(A1, A2, h);
    if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
    if (dt > limit)
        throw StabilityViolation("time step " + std::to_string(dt) + " exceeds the stability limit; use dt <= " +
                                     std::to_string(limit),
                                 limit);
    const std::size_t n = U0.U.size();
    const auto steps = static_cast<std::size_t>(std::ceil(t / dt - 1e-12));
    const double step = steps > 0 ? t / static_cast<double>(steps) : 0.0;
    const double ca = A1 / (2.0 * h);
    const double cd = A2 / (h * h);
    auto f = [&](const std::vector<double>& u, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) {
            const double up = u[(i + 1) % n];
            const double um = u[(i + n - 1) % n];
            out[i] = ca * (up - um) + cd * (up - 2.0 * u[i] + um);
        }
    };
    std::vector<double> u = U0.U, k1(n), k2(n), k3(n), k4(n), tmp(n);
    for (std::size_t s = 0; s < steps; ++s) {
        f(u, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * step * k1[i];
        f(tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * step * k2[i];
        f(tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + step * k3[i];
        f(tmp, k4);
        for (std::size_t i = 0; i < n; ++i) u[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return MacroField{U0.L, std::move(u), U0.t + t};
}

}  // namespace zappa
