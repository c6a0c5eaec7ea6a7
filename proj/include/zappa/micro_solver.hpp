#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zappa/cross_section.hpp"
#include "zappa/error.hpp"
#include "zappa/kernel.hpp"
#include "zappa/parallel.hpp"
#include "zappa/profile.hpp"

namespace zappa {

enum class Boundary { periodic, inflow_zero };

inline const char* to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "inflow-zero"; }

/// Uniform x-grid x_i = i*h, i = 0..Nx-1, times a cross-section.
struct MicroGrid {
    double L = 400.0;
    int Nx = 1024;
    Boundary boundary = Boundary::periodic;
    CrossSection cs = build_cross_section();

    double h() const noexcept { return L / Nx; }
    double x(std::size_t i) const noexcept { return static_cast<double>(i) * h(); }
    std::size_t nx() const noexcept { return static_cast<std::size_t>(Nx); }
    std::size_t ny() const noexcept { return cs.size(); }

    void validate() const {
        if (!(L > 0.0) || !std::isfinite(L)) throw InvalidArgument("grid length L must be positive");
        if (Nx < 8) throw InvalidArgument("grid needs Nx >= 8, got " + std::to_string(Nx));
    }
};

/**
 * @brief Density u(x_i, y_j, t) on a MicroGrid.
 *
 * Stored y-node major: the x-row of node j is contiguous, which is the
 * access pattern of the convolution recursion.
 */
struct MicroField {
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<double> values;
    double t = 0.0;

    MicroField() = default;
    MicroField(std::size_t nx_, std::size_t ny_, double fill = 0.0) : nx(nx_), ny(ny_), values(nx_ * ny_, fill) {}
    explicit MicroField(const MicroGrid& g, double fill = 0.0) : MicroField(g.nx(), g.ny(), fill) {}

    double& at(std::size_t i, std::size_t j) { return values[j * nx + i]; }
    double at(std::size_t i, std::size_t j) const { return values[j * nx + i]; }
    std::span<double> row(std::size_t j) { return {values.data() + j * nx, nx}; }
    std::span<const double> row(std::size_t j) const { return {values.data() + j * nx, nx}; }

    bool same_shape(const MicroField& o) const noexcept { return nx == o.nx && ny == o.ny; }
};

/// Cross-sectional mean U(x_i) at every x-node, summed in node order.
inline std::vector<double> cross_mean_profile(const MicroField& u, const CrossSection& cs) {
    if (u.ny != cs.size()) throw InvalidArgument("field and cross-section disagree on node count");
    std::vector<double> U(u.nx, 0.0);
    for (std::size_t j = 0; j < u.ny; ++j) {
        const double w = 0.5 * cs.weights[j];
        const auto r = u.row(j);
        for (std::size_t i = 0; i < u.nx; ++i) U[i] += w * r[i];
    }
    return U;
}

/// M = sum_i h * 2 * mean_y u(x_i, .)
inline double mass(const MicroField& u, const MicroGrid& g) {
    const auto U = cross_mean_profile(u, g.cs);
    double acc = 0.0;
    for (double x : U) acc += x;
    return 2.0 * g.h() * acc;
}

/**
 * @brief One-cell constants of the exponential convolution recursion.
 *
 * C_i = alpha C_{i-1} + beta u_{i-1} + gamma u_i integrates exp(-(x_i - xi)/v)
 * against the linear interpolant of u over [x_{i-1}, x_i]; beta and gamma are
 * the exact integrals of the two hat functions, beta + gamma = v (1 - alpha).
 */
struct ConvWeights {
    double v = 1.0;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double wrap = 1.0;  ///< 1 / (1 - exp(-L/v)), the periodic image sum
};

inline ConvWeights conv_weights(double v, double h, double L) {
    if (!(v > 0.0)) throw InvalidArgument("convolution needs v > 0");
    const double a = h / v;
    ConvWeights w;
    w.v = v;
    w.alpha = std::exp(-a);
    const double one_minus_alpha = -std::expm1(-a);
    // 1 - e^{-a}(1 + a), by its alternating series where the direct form cancels
    double f;
    if (a < 1e-2) {
        double term = a * a / 2.0;
        f = 0.0;
        for (int k = 2; k < 12; ++k) {
            f += (k - 1) * term;
            term *= -a / (k + 1);
        }
    } else {
        f = one_minus_alpha - a * w.alpha;
    }
    w.beta = v * f / a;
    w.gamma = v * one_minus_alpha - w.beta;
    w.wrap = 1.0 / (-std::expm1(-L / v));
    return w;
}

/// Upstream convolution C(x_i) = int_{-inf}^{x_i} exp(-(x_i - xi)/v) u(xi) dxi of one x-row.
inline void exp_convolve(std::span<const double> u, const ConvWeights& w, Boundary boundary, std::span<double> C) {
    const std::size_t n = u.size();
    double c0 = 0.0;
    if (boundary == Boundary::periodic) {
        double c = 0.0;
        for (std::size_t i = 1; i <= n; ++i) c = w.alpha * c + w.beta * u[i - 1] + w.gamma * u[i % n];
        c0 = c * w.wrap;
    }
    C[0] = c0;
    for (std::size_t i = 1; i < n; ++i) C[i] = w.alpha * C[i - 1] + w.beta * u[i - 1] + w.gamma * u[i];
}

inline std::vector<double> exp_convolve(std::span<const double> u_row, double v, const MicroGrid& grid) {
    if (!(v > 0.0)) throw InvalidArgument("exp_convolve needs v > 0, got " + std::to_string(v));
    if (u_row.size() != grid.nx()) throw InvalidArgument("row length does not match the grid");
    std::vector<double> C(u_row.size());
    exp_convolve(u_row, conv_weights(v, grid.h(), grid.L), grid.boundary, C);
    return C;
}

struct RunSpec {
    double dt = 0.05;
    double t_end = 0.0;
    std::vector<double> output_times;  ///< ascending in [0, t_end]; empty means {t_end}
};

struct MicroRun {
    std::vector<MicroField> snapshots;
    std::size_t steps = 0;
    bool boundary_warning = false;  ///< inflow-zero: mass within 10 cells of an end
};

inline constexpr double kMaxMicroDt = 0.1;

/**
 * @brief Deterministic solver of the jump-and-zap evolution equation.
 *
 * Exponential kernels use the O(Nx) recursion per node. General kernels with a
 * jump density use precomputed hat-function weights and an O(Nx^2) sum.
 */
class MicroSolver {
public:
    MicroSolver(MicroGrid grid, const JumpKernel& kernel, int threads = 0)
        : grid_(std::move(grid)), threads_(threads) {
        grid_.validate();
        if (const auto* v = kernel.profile()) {
            v_ = eval_profile(*v, grid_.cs);
            for (std::size_t j = 0; j < grid_.ny(); ++j) conv_.push_back(conv_weights(v_[j], grid_.h(), grid_.L));
        } else {
            JumpDensity p = kernel.density();
            if (!p) throw UnsupportedKernel("general kernel needs a sampled jump density for the micro-solver");
            for (std::size_t j = 0; j < grid_.ny(); ++j) dense_.push_back(hat_weights(p, grid_.cs.nodes[j]));
        }
    }

    const MicroGrid& grid() const noexcept { return grid_; }
    bool fast_path() const noexcept { return !conv_.empty(); }
    int threads() const noexcept { return threads_; }
    const CrossField& velocities() const noexcept { return v_; }

    /// du/dt = (jump term) + (mean_y u - u); the jump term is C/v - u on the fast path.
    void rhs(const MicroField& u, MicroField& out) const {
        check(u);
        if (!out.same_shape(u)) out = MicroField(u.nx, u.ny);
        const std::size_t nx = u.nx;
        parallel_for(u.ny, threads_, [&](std::size_t j) {
            auto o = out.row(j);
            const auto r = u.row(j);
            if (fast_path()) {
                exp_convolve(r, conv_[j], grid_.boundary, o);
                const double inv_v = 1.0 / conv_[j].v;
                for (std::size_t i = 0; i < nx; ++i) o[i] = o[i] * inv_v - r[i];
            } else {
                dense_jump(r, dense_[j], o);
            }
        });
        parallel_for(nx, threads_, [&](std::size_t i) {
            double ubar = 0.0;
            for (std::size_t j = 0; j < u.ny; ++j) ubar += 0.5 * grid_.cs.weights[j] * u.values[j * nx + i];
            for (std::size_t j = 0; j < u.ny; ++j) out.values[j * nx + i] += ubar - u.values[j * nx + i];
        });
        out.t = u.t;
    }

    MicroField rhs(const MicroField& u) const {
        MicroField out(u.nx, u.ny);
        rhs(u, out);
        return out;
    }

    /// The jump term alone (no zap), used for the exact cross-mean tendency.
    MicroField jump_term(const MicroField& u) const {
        check(u);
        MicroField out(u.nx, u.ny);
        parallel_for(u.ny, threads_, [&](std::size_t j) {
            auto o = out.row(j);
            const auto r = u.row(j);
            if (fast_path()) {
                exp_convolve(r, conv_[j], grid_.boundary, o);
                const double inv_v = 1.0 / conv_[j].v;
                for (std::size_t i = 0; i < u.nx; ++i) o[i] = o[i] * inv_v - r[i];
            } else {
                dense_jump(r, dense_[j], o);
            }
        });
        out.t = u.t;
        return out;
    }

    /// One classical RK4 step.
    void step(MicroField& u, double dt) const {
        Workspace ws(u);
        step(u, dt, ws);
    }

    MicroRun run(const RunSpec& spec, MicroField u) const {
        check(u);
        if (!(spec.dt > 0.0) || spec.dt > kMaxMicroDt)
            throw InvalidArgument("micro time step must lie in (0, 0.1], got " + std::to_string(spec.dt));
        if (!(spec.t_end >= u.t)) throw InvalidArgument("t_end precedes the initial time");
        std::vector<double> outputs = spec.output_times.empty() ? std::vector<double>{spec.t_end} : spec.output_times;
        for (std::size_t k = 0; k < outputs.size(); ++k) {
            if (outputs[k] < u.t || outputs[k] > spec.t_end || (k > 0 && outputs[k] < outputs[k - 1]))
                throw InvalidArgument("output times must be ascending within [t0, t_end]");
        }

        MicroRun result;
        Workspace ws(u);
        for (double target : outputs) {
            const double tol = 1e-12 * std::max(1.0, std::abs(target));
            while (u.t < target - tol) {
                const double h = std::min(spec.dt, target - u.t);
                step(u, h, ws);
                ++result.steps;
                for (double x : u.values)
                    if (!std::isfinite(x))
                        throw NumericalFailure("non-finite density at t = " + std::to_string(u.t));
            }
            u.t = target;
            result.snapshots.push_back(u);
            if (grid_.boundary == Boundary::inflow_zero && near_boundary(u)) result.boundary_warning = true;
        }
        return result;
    }

private:
    struct Workspace {
        explicit Workspace(const MicroField& u)
            : k1(u.nx, u.ny), k2(u.nx, u.ny), k3(u.nx, u.ny), k4(u.nx, u.ny), tmp(u.nx, u.ny) {}
        MicroField k1, k2, k3, k4, tmp;
    };

    void step(MicroField& u, double dt, Workspace& ws) const {
        const std::size_t n = u.values.size();
        auto stage = [&](const MicroField& k, double c) {
            for (std::size_t q = 0; q < n; ++q) ws.tmp.values[q] = u.values[q] + c * k.values[q];
        };
        rhs(u, ws.k1);
        stage(ws.k1, 0.5 * dt);
        rhs(ws.tmp, ws.k2);
        stage(ws.k2, 0.5 * dt);
        rhs(ws.tmp, ws.k3);
        stage(ws.k3, dt);
        rhs(ws.tmp, ws.k4);
        const double c = dt / 6.0;
        for (std::size_t q = 0; q < n; ++q)
            u.values[q] += c * (ws.k1.values[q] + 2.0 * ws.k2.values[q] + 2.0 * ws.k3.values[q] + ws.k4.values[q]);
        u.t += dt;
    }

    void check(const MicroField& u) const {
        if (u.nx != grid_.nx() || u.ny != grid_.ny()) throw InvalidArgument("micro field does not match the grid");
    }

    bool near_boundary(const MicroField& u) const {
        const auto U = cross_mean_profile(u, grid_.cs);
        const std::size_t strip = std::min<std::size_t>(10, U.size() / 2);
        double edge = 0.0, total = 0.0;
        for (std::size_t i = 0; i < U.size(); ++i) {
            total += std::abs(U[i]);
            if (i < strip || i >= U.size() - strip) edge += std::abs(U[i]);
        }
        return edge > 1e-6 * total;
    }

    /// W_k = int p(s) hat_k(s) ds for the hat at s = k h; periodic grids fold k mod Nx.
    /// `rising` keeps only the part of each hat on [(k-1) h, k h], which is all
    /// the inflow node x_0 sees because nothing lies upstream of it.
    struct HatWeights {
        std::vector<double> full;
        std::vector<double> rising;
    };

    HatWeights hat_weights(const JumpDensity& p, double y) const {
        static constexpr double gl_x[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                           -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                           0.7966664774136267,  0.9602898564975363};
        static constexpr double gl_w[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                           0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                           0.2223810344533745, 0.1012285362903763};
        const double h = grid_.h();
        const std::size_t nx = grid_.nx();
        const bool periodic = grid_.boundary == Boundary::periodic;
        const std::size_t max_cells = periodic ? 64 * nx : nx;
        HatWeights W{std::vector<double>(nx, 0.0), std::vector<double>(nx, 0.0)};
        double accumulated = 0.0;
        for (std::size_t c = 0; c < max_cells; ++c) {
            double left = 0.0, right = 0.0, cell_mass = 0.0;
            for (int q = 0; q < 8; ++q) {
                const double xi = 0.5 * (gl_x[q] + 1.0);
                const double ps = p((static_cast<double>(c) + xi) * h, y) * 0.5 * gl_w[q] * h;
                left += (1.0 - xi) * ps;
                right += xi * ps;
                cell_mass += ps;
            }
            W.full[c % nx] += left;
            if (periodic || c + 1 < nx) {
                W.full[(c + 1) % nx] += right;
                W.rising[(c + 1) % nx] += right;
            }
            accumulated += cell_mass;
            if (c > 0 && 1.0 - accumulated < 1e-15 && cell_mass < 1e-17) break;
        }
        return W;
    }

    void dense_jump(std::span<const double> u, const HatWeights& W, std::span<double> out) const {
        const std::size_t nx = u.size();
        const bool periodic = grid_.boundary == Boundary::periodic;
        for (std::size_t i = 0; i < nx; ++i) {
            double c = 0.0;
            for (std::size_t k = 0; k < nx; ++k) {
                if (periodic) {
                    c += W.full[k] * u[(i + nx - k) % nx];
                } else if (k < i) {
                    c += W.full[k] * u[i - k];
                } else if (k == i) {
                    c += W.rising[k] * u[0];
                }
            }
            out[i] = c - u[i];
        }
    }

    MicroGrid grid_;
    int threads_ = 0;
    CrossField v_;
    std::vector<ConvWeights> conv_;
    std::vector<HatWeights> dense_;
};

enum class IcKind { gaussian, step, point, table };

struct IcSpec {
    IcKind kind = IcKind::gaussian;
    double x0 = 200.0;
    double sigma = 20.0;
    /// table values: Nx*ny entries (x-node major, y fastest), or ny entries broadcast along x
    std::vector<double> table;
};

/// Builds an initial density normalized to unit mass; uniform in y unless a table says otherwise.
inline MicroField initial_condition(const IcSpec& spec, const MicroGrid& grid) {
    grid.validate();
    MicroField u(grid);
    const std::size_t nx = grid.nx(), ny = grid.ny();
    const double h = grid.h();
    auto fill_column = [&](std::size_t i, double value) {
        for (std::size_t j = 0; j < ny; ++j) u.at(i, j) = value;
    };
    switch (spec.kind) {
    case IcKind::gaussian: {
        if (!(spec.sigma > 0.0)) throw InvalidArgument("gaussian initial condition needs sigma > 0");
        for (std::size_t i = 0; i < nx; ++i) {
            double d = grid.x(i) - spec.x0;
            if (grid.boundary == Boundary::periodic) d -= grid.L * std::round(d / grid.L);
            fill_column(i, std::exp(-0.5 * d * d / (spec.sigma * spec.sigma)));
        }
        break;
    }
    case IcKind::step:
        if (spec.x0 <= 0.0 || spec.x0 > grid.L) throw InvalidArgument("step position must lie in (0, L]");
        for (std::size_t i = 0; i < nx; ++i) fill_column(i, grid.x(i) < spec.x0 ? 1.0 : 0.0);
        break;
    case IcKind::point: {
        if (spec.x0 < 0.0 || spec.x0 >= grid.L) throw InvalidArgument("point position must lie in [0, L)");
        const auto i0 = static_cast<std::size_t>(std::lround(spec.x0 / h)) % nx;
        fill_column(i0, 1.0);
        break;
    }
    case IcKind::table:
        if (spec.table.size() == ny) {
            for (std::size_t i = 0; i < nx; ++i)
                for (std::size_t j = 0; j < ny; ++j) u.at(i, j) = spec.table[j];
        } else if (spec.table.size() == nx * ny) {
            for (std::size_t i = 0; i < nx; ++i)
                for (std::size_t j = 0; j < ny; ++j) u.at(i, j) = spec.table[i * ny + j];
        } else {
            throw InvalidArgument("table initial condition needs ny or Nx*ny values, got " +
                                  std::to_string(spec.table.size()));
        }
        break;
    }
    const double m = mass(u, grid);
    if (!(std::abs(m) > 0.0) || !std::isfinite(m)) throw InvalidArgument("initial condition has zero or non-finite mass");
    for (double& x : u.values) x /= m;
    return u;
}

}  // namespace zappa
