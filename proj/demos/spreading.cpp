// Evolves a Gaussian release in the parabolic channel with the microscale
// solver and tracks the centre and variance of the cross-channel mean against
// the advection-diffusion prediction x0 - A1 t, sigma^2 + 2 A2 t.

#include <cmath>
#include <cstdio>

#include "zappa/zappa.hpp"

using namespace zappa;

int main() {
    const MicroGrid grid{400.0, 1024, Boundary::periodic, build_cross_section(16)};
    const auto kernel = JumpKernel::exponential(VelocityProfile::parabolic());
    const MicroSolver solver(grid, kernel);
    const auto sm = derive(kernel, 2, grid.cs);
    const double A1 = sm.coefficient(1), A2 = sm.coefficient(2);

    const auto run = solver.run(RunSpec{0.05, 100.0, {0, 10, 20, 40, 60, 80, 100}}, initial_condition(IcSpec{}, grid));
    const MacroField U0 = to_macro(run.snapshots.front(), grid);

    std::printf("%6s %10s %10s %10s %10s %12s %12s\n", "t", "centre", "predicted", "variance", "predicted",
                "defect", "vs macro");
    for (const auto& u : run.snapshots) {
        const MacroField U = to_macro(u, grid);
        double m0 = 0, m1 = 0, m2 = 0;
        for (std::size_t i = 0; i < U.U.size(); ++i) {
            const double x = grid.x(i);
            m0 += U.U[i];
            m1 += x * U.U[i];
            m2 += x * x * U.U[i];
        }
        const double mean = m1 / m0, var = m2 / m0 - mean * mean;
        const auto rho = defect_residual(solver, u, sm);
        const auto cmp = compare_micro_macro({U0, U}, {U0, solve_spectral(A1, A2, U0, u.t)});
        std::printf("%6.0f %10.4f %10.4f %10.4f %10.4f %12.3e %12.3e\n", u.t, mean, 200.0 - A1 * u.t, var,
                    400.0 + 2 * A2 * u.t, rho.relative(), cmp.rel_l2[1]);
    }
    return 0;
}
