// Random-walk particles in the parabolic channel. Prints the sample mean and
// variance of x against the drift 2/3 and spreading rate 56/45, then a coarse
// picture of where the cloud sits at the last time.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "zappa/zappa.hpp"

using namespace zappa;

int main(int argc, char** argv) {
    McConfig cfg;
    cfg.n_particles = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 20000;
    cfg.seed = 20190417;
    for (int k = 0; k <= 10; ++k) cfg.t_outputs.push_back(20.0 * k);
    const auto stats = simulate(cfg, VelocityProfile::parabolic());

    std::printf("%6s %12s %10s %12s %10s\n", "t", "mean", "se", "variance", "se");
    for (const auto& m : stats.moments) std::printf("%6.0f %12.4f %10.4f %12.4f %10.4f\n", m.t, m.mean, m.se_mean, m.var, m.se_var);

    const auto fit = fit_rates(stats, 100.0, 200.0);
    std::printf("\ndrift    %.5f +- %.5f  (2/3 = %.5f)\n", fit.drift, fit.drift_se, 2.0 / 3.0);
    std::printf("var rate %.5f +- %.5f  (56/45 = %.5f)\n\n", fit.var_rate, fit.var_rate_se, 56.0 / 45.0);

    const auto h = histogram(stats, 200.0, 30, 4);
    const auto xm = h.x_marginal();
    double top = 0;
    for (double d : xm) top = std::max(top, d);
    for (std::size_t i = 0; i < xm.size(); ++i)
        std::printf("%8.1f |%s\n", 0.5 * (h.x_edges[i] + h.x_edges[i + 1]), std::string(static_cast<int>(50 * xm[i] / top), '#').c_str());
    return 0;
}
