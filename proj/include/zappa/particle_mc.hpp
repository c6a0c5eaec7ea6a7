#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "zappa/error.hpp"
#include "zappa/parallel.hpp"
#include "zappa/philox.hpp"
#include "zappa/profile.hpp"

namespace zappa {

/// Fixed-order pairwise sum; the result depends only on the input order.
inline double pairwise_sum(std::span<const double> x) {
    if (x.size() <= 16) {
        double acc = 0.0;
        for (double v : x) acc += v;
        return acc;
    }
    const std::size_t half = x.size() / 2;
    return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

struct McConfig {
    std::size_t n_particles = 100000;
    std::uint64_t seed = 20190417;
    std::vector<double> t_outputs;       ///< ascending, non-negative
    std::optional<double> initial_y;     ///< fixed start across the channel; default Uniform(-1, 1)
    int threads = 0;
};

/// Sample moments of particle positions at one output time.
struct McMoments {
    double t = 0.0;
    double mean = 0.0;
    double var = 0.0;
    double se_mean = 0.0;
    double se_var = 0.0;
};

/// Particle states at one output time, in particle order.
struct Ensemble {
    double t = 0.0;
    std::vector<double> x;
    std::vector<double> y;
};

struct McStats {
    std::vector<McMoments> moments;
    std::vector<Ensemble> ensembles;
};

namespace detail {

inline McMoments sample_moments(const Ensemble& e) {
    const auto n = static_cast<double>(e.x.size());
    McMoments m;
    m.t = e.t;
    m.mean = pairwise_sum(e.x) / n;
    if (e.x.size() < 2) return m;
    std::vector<double> dev2(e.x.size()), dev4(e.x.size());
    for (std::size_t p = 0; p < e.x.size(); ++p) {
        const double d = e.x[p] - m.mean;
        dev2[p] = d * d;
        dev4[p] = dev2[p] * dev2[p];
    }
    const double m2 = pairwise_sum(dev2) / n;
    const double m4 = pairwise_sum(dev4) / n;
    m.var = m2 * n / (n - 1.0);
    m.se_mean = std::sqrt(m.var / n);
    m.se_var = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
    return m;
}

}  // namespace detail

/**
 * @brief Event-driven simulation of the jump-and-zap particle process.
 *
 * Each particle carries two unit-rate clocks, so events arrive at rate 2 and a
 * fair coin picks the type: a zap redraws y ~ Uniform(-1, 1), a jump adds an
 * Exp(mean v(y)) distance to x. Particle p draws only from substream (seed, p),
 * so results do not depend on the thread count.
 */
inline McStats simulate(const McConfig& cfg, const VelocityProfile& v) {
    if (cfg.n_particles < 1) throw InvalidArgument("Monte Carlo needs at least one particle");
    for (std::size_t k = 0; k < cfg.t_outputs.size(); ++k) {
        if (!(cfg.t_outputs[k] >= 0.0) || (k > 0 && cfg.t_outputs[k] < cfg.t_outputs[k - 1]))
            throw InvalidArgument("Monte Carlo output times must be non-negative and ascending");
    }
    if (cfg.initial_y && !(*cfg.initial_y > -1.0 && *cfg.initial_y < 1.0))
        throw InvalidArgument("initial y must lie in (-1, 1)");
    const auto* poly = v.polynomial();
    if (poly == nullptr) throw InvalidArgument("Monte Carlo needs a polynomial velocity profile");
    if (!v.positive_on_open_interval())
        throw InvalidProfile("velocity profile is not positive on (-1, 1)", -1, 0.0);
    const std::vector<double> coeffs = poly->coeffs_double();
    auto velocity = [&coeffs](double y) {
        double acc = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * y + *it;
        return acc;
    };

    const std::size_t n = cfg.n_particles;
    const std::size_t n_out = cfg.t_outputs.size();
    McStats stats;
    stats.ensembles.resize(n_out);
    for (std::size_t k = 0; k < n_out; ++k) {
        stats.ensembles[k].t = cfg.t_outputs[k];
        stats.ensembles[k].x.assign(n, 0.0);
        stats.ensembles[k].y.assign(n, 0.0);
    }

    parallel_for(n, cfg.threads, [&](std::size_t p) {
        CounterStream rng(cfg.seed, p);
        double x = 0.0;
        double y = cfg.initial_y ? *cfg.initial_y : -1.0 + 2.0 * rng.uniform_open();
        double next_event = rng.exponential(0.5);
        for (std::size_t k = 0; k < n_out; ++k) {
            const double horizon = cfg.t_outputs[k];
            while (next_event <= horizon) {
                if (rng.uniform_open() < 0.5) {
                    y = -1.0 + 2.0 * rng.uniform_open();
                } else {
                    x += rng.exponential(velocity(y));
                }
                next_event += rng.exponential(0.5);
            }
            stats.ensembles[k].x[p] = x;
            stats.ensembles[k].y[p] = y;
        }
    });

    for (const auto& e : stats.ensembles) stats.moments.push_back(detail::sample_moments(e));
    return stats;
}

/// Least-squares drift and variance growth rate over a window of output times.
struct RateFit {
    double drift = 0.0;
    double drift_se = 0.0;
    double var_rate = 0.0;
    double var_rate_se = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::size_t n_times = 0;
};

/**
 * @brief Regresses mean and variance of x on t over [t_lo, t_hi].
 *
 * Both slopes are linear in per-particle quantities, q_p = sum_k c_k x_pk and
 * r_p = sum_k c_k (x_pk - mean_k)^2 with OLS weights c_k, so their standard
 * errors come from the spread of q_p and r_p across independent particles and
 * account for the correlation between output times. The default window is the
 * second half of the output horizon.
 */
inline RateFit fit_rates(const McStats& stats, std::optional<double> t_lo = std::nullopt,
                         std::optional<double> t_hi = std::nullopt) {
    if (stats.ensembles.empty()) throw InvalidArgument("no output times to fit");
    const double last = stats.ensembles.back().t;
    const double lo = t_lo.value_or(0.5 * last);
    const double hi = t_hi.value_or(last);
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < stats.ensembles.size(); ++k)
        if (stats.ensembles[k].t >= lo && stats.ensembles[k].t <= hi) idx.push_back(k);
    if (idx.size() < 2) throw InvalidArgument("rate fit needs at least two output times in the window");

    double tbar = 0.0;
    for (auto k : idx) tbar += stats.ensembles[k].t;
    tbar /= static_cast<double>(idx.size());
    double sxx = 0.0;
    for (auto k : idx) sxx += (stats.ensembles[k].t - tbar) * (stats.ensembles[k].t - tbar);
    std::vector<double> c;
    for (auto k : idx) c.push_back((stats.ensembles[k].t - tbar) / sxx);

    const std::size_t n = stats.ensembles.front().x.size();
    std::vector<double> q(n, 0.0), r(n, 0.0);
    for (std::size_t a = 0; a < idx.size(); ++a) {
        const auto& e = stats.ensembles[idx[a]];
        const double mean = stats.moments[idx[a]].mean;
        for (std::size_t p = 0; p < n; ++p) {
            q[p] += c[a] * e.x[p];
            const double d = e.x[p] - mean;
            r[p] += c[a] * d * d;
        }
    }
    auto mean_and_se = [n](const std::vector<double>& s) {
        const double m = pairwise_sum(s) / static_cast<double>(n);
        if (n < 2) return std::pair{m, 0.0};
        std::vector<double> d2(n);
        for (std::size_t p = 0; p < n; ++p) d2[p] = (s[p] - m) * (s[p] - m);
        const double var = pairwise_sum(d2) / static_cast<double>(n - 1);
        return std::pair{m, std::sqrt(var / static_cast<double>(n))};
    };
    RateFit fit;
    std::tie(fit.drift, fit.drift_se) = mean_and_se(q);
    std::tie(fit.var_rate, fit.var_rate_se) = mean_and_se(r);
    // r uses the biased (1/n) variance; rescale to match the unbiased estimator
    const double unbias = n > 1 ? static_cast<double>(n) / static_cast<double>(n - 1) : 1.0;
    fit.var_rate *= unbias;
    fit.var_rate_se *= unbias;
    fit.t_lo = lo;
    fit.t_hi = hi;
    fit.n_times = idx.size();
    return fit;
}

/// Normalized 2-D density of (x, y); density[ix * y_bins + iy].
struct Histogram {
    double t = 0.0;
    std::vector<double> x_edges;
    std::vector<double> y_edges;
    std::vector<double> density;

    std::size_t x_bins() const noexcept { return x_edges.size() - 1; }
    std::size_t y_bins() const noexcept { return y_edges.size() - 1; }

    /// Density of x alone.
    std::vector<double> x_marginal() const {
        std::vector<double> m(x_bins(), 0.0);
        for (std::size_t i = 0; i < x_bins(); ++i)
            for (std::size_t j = 0; j < y_bins(); ++j)
                m[i] += density[i * y_bins() + j] * (y_edges[j + 1] - y_edges[j]);
        return m;
    }

    /// Density of y alone.
    std::vector<double> y_marginal() const {
        std::vector<double> m(y_bins(), 0.0);
        for (std::size_t j = 0; j < y_bins(); ++j)
            for (std::size_t i = 0; i < x_bins(); ++i)
                m[j] += density[i * y_bins() + j] * (x_edges[i + 1] - x_edges[i]);
        return m;
    }
};

inline Histogram histogram(const McStats& stats, double t, std::size_t x_bins, std::size_t y_bins) {
    if (x_bins < 1 || y_bins < 1) throw InvalidArgument("histogram needs at least one bin per axis");
    const Ensemble* e = nullptr;
    for (const auto& cand : stats.ensembles)
        if (cand.t == t) e = &cand;
    if (e == nullptr) throw InvalidArgument("no ensemble recorded at t = " + std::to_string(t));

    Histogram h;
    h.t = t;
    double lo = *std::min_element(e->x.begin(), e->x.end());
    double hi = *std::max_element(e->x.begin(), e->x.end());
    if (hi <= lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    for (std::size_t i = 0; i <= x_bins; ++i) h.x_edges.push_back(lo + (hi - lo) * static_cast<double>(i) / x_bins);
    for (std::size_t j = 0; j <= y_bins; ++j) h.y_edges.push_back(-1.0 + 2.0 * static_cast<double>(j) / y_bins);
    std::vector<std::size_t> counts(x_bins * y_bins, 0);
    for (std::size_t p = 0; p < e->x.size(); ++p) {
        auto ix = static_cast<std::size_t>((e->x[p] - lo) / (hi - lo) * static_cast<double>(x_bins));
        auto iy = static_cast<std::size_t>((e->y[p] + 1.0) / 2.0 * static_cast<double>(y_bins));
        ix = std::min(ix, x_bins - 1);
        iy = std::min(iy, y_bins - 1);
        ++counts[ix * y_bins + iy];
    }
    const double dx = (hi - lo) / static_cast<double>(x_bins);
    const double dy = 2.0 / static_cast<double>(y_bins);
    const auto n = static_cast<double>(e->x.size());
    h.density.resize(counts.size());
    for (std::size_t q = 0; q < counts.size(); ++q) h.density[q] = static_cast<double>(counts[q]) / (n * dx * dy);
    return h;
}

}  // namespace zappa
