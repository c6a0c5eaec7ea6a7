// Prints the slow-manifold coefficients A_1..A_4 and shape functions V_1, V_2
// for a few velocity profiles, exactly and in floating point.

#include <cstdio>

#include "zappa/zappa.hpp"

using namespace zappa;

static void show(const char* label, const VelocityProfile& v) {
    const auto cs = build_cross_section(16);
    const auto sm = derive(JumpKernel::exponential(v), 4, cs);
    std::printf("%s  (v = %s)\n", label, v.describe().c_str());
    for (int n = 1; n <= 4; ++n)
        std::printf("  A%d = %-14s = % .15f\n", n, to_string((*sm.A_exact)[n - 1]).c_str(), sm.coefficient(n));
    std::printf("  V1 = %s\n  V2 = %s\n\n", (*sm.V_exact)[1].str().c_str(), (*sm.V_exact)[2].str().c_str());
}

int main() {
    show("parabolic channel", VelocityProfile::parabolic());
    show("linear shear", VelocityProfile::polynomial({Rational(3, 2), Rational(1, 2)}));
    show("plug flow", VelocityProfile::constant(2));
    return 0;
}
