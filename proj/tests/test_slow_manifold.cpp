#include <gtest/gtest.h>

#include <algorithm>
#include <complex>
#include <random>

#include "support.hpp"
#include "zappa/slow_manifold.hpp"

using namespace zappa;

// Golden values below were produced by an independent computer-algebra solve of
// the hierarchy (tests/oracles/hierarchy_oracle.py) and frozen here.

namespace {

const CrossSection& cs16() {
    static const CrossSection cs = build_cross_section(16);
    return cs;
}

YPolynomial poly(std::initializer_list<Rational> c) { return YPolynomial(c); }

Rational R(long long p, long long q = 1) { return Rational(p, q); }

JumpKernel exponential(const VelocityProfile& v) { return JumpKernel::exponential(v); }

void expect_close(const SlowManifold& a, const SlowManifold& b, double tol) {
    ASSERT_EQ(a.order, b.order);
    for (int n = 1; n <= a.order; ++n)
        EXPECT_NEAR(a.coefficient(n), b.coefficient(n), tol * std::max(1.0, std::abs(b.coefficient(n)))) << "A" << n;
    for (int n = 0; n <= a.order; ++n) {
        const auto& va = a.V[static_cast<std::size_t>(n)];
        const auto& vb = b.V[static_cast<std::size_t>(n)];
        double scale = 1.0;
        for (double x : vb.values) scale = std::max(scale, std::abs(x));
        for (std::size_t j = 0; j < va.size(); ++j) EXPECT_NEAR(va[j], vb[j], tol * scale) << "V" << n << " node " << j;
    }
}

}  // namespace

TEST(Derive, ParabolicOrderTwoIsExact) {
    const auto sm = derive(exponential(VelocityProfile::parabolic()), 2, cs16());
    ASSERT_TRUE(sm.exact());
    EXPECT_EQ(sm.method, "hierarchy");
    EXPECT_EQ((*sm.A_exact)[0], R(-2, 3));
    EXPECT_EQ((*sm.A_exact)[1], R(28, 45));
    EXPECT_EQ((*sm.V_exact)[0], poly({1}));
    EXPECT_EQ((*sm.V_exact)[1], poly({R(-1, 3), 0, 1}));
    EXPECT_EQ((*sm.V_exact)[2], poly({R(22, 45), 0, R(-8, 3), 0, 2}));
    EXPECT_FALSE(sm.extension());
    EXPECT_TRUE(sm.validation.next_moment_exists);
    for (double r : sm.validation.hierarchy_residual) EXPECT_EQ(r, 0.0);
    for (double s : sm.validation.solvability) EXPECT_EQ(s, 0.0);
}

TEST(Derive, ParabolicOrderFourMatchesComputerAlgebra) {
    const auto sm = derive(exponential(VelocityProfile::parabolic()), 4, cs16());
    ASSERT_TRUE(sm.exact());
    EXPECT_TRUE(sm.extension());
    const std::vector<Rational> A{R(-2, 3), R(28, 45), R(-608, 945), R(9808, 14175)};
    EXPECT_EQ(*sm.A_exact, A);
    EXPECT_EQ((*sm.V_exact)[3], poly({R(-122, 189), 0, R(244, 45), 0, R(-26, 3), 0, 4}));
    EXPECT_EQ((*sm.V_exact)[4], poly({R(2344, 2835), 0, R(-9256, 945), 0, R(224, 9), 0, -24, 0, 8}));
}

TEST(Derive, LinearProfileMatchesComputerAlgebra) {
    const auto v = VelocityProfile::polynomial({R(3, 2), R(1, 2)});
    const auto sm = derive(exponential(v), 4, cs16());
    ASSERT_TRUE(sm.exact());
    const std::vector<Rational> A{R(-3, 2), R(29, 12), R(-17, 4), R(1949, 240)};
    EXPECT_EQ(*sm.A_exact, A);
    EXPECT_EQ((*sm.V_exact)[1], poly({0, R(-1, 2)}));
    EXPECT_EQ((*sm.V_exact)[2], poly({R(-1, 6), R(3, 2), R(1, 2)}));
    EXPECT_EQ((*sm.V_exact)[3], poly({R(7, 8), R(-77, 24), R(-21, 8), R(-1, 2)}));
    EXPECT_EQ((*sm.V_exact)[4], poly({R(-1091, 360), R(43, 8), R(211, 24), R(15, 4), R(1, 2)}));
}

TEST(Derive, ConstantProfileHasNoShear) {
    for (const Rational c : {R(1), R(2), R(3, 2), R(7, 10)}) {
        const auto sm = derive(exponential(VelocityProfile::constant(c)), 4, cs16());
        ASSERT_TRUE(sm.exact());
        Rational power = 1;
        for (int n = 1; n <= 4; ++n) {
            power *= -c;
            // A_n = (-c)^n: A1 = -c, A2 = c^2, ...
            EXPECT_EQ((*sm.A_exact)[static_cast<std::size_t>(n - 1)], power) << n;
            EXPECT_TRUE((*sm.V_exact)[static_cast<std::size_t>(n)].is_zero()) << n;
        }
    }
}

TEST(Derive, OrderOneIsMinusMeanVelocity) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const auto v = gen::random_positive_profile(rng);
        const auto sm = derive(exponential(v), 1, cs16());
        ASSERT_TRUE(sm.exact());
        const Rational vbar = v.polynomial()->mean();
        EXPECT_EQ((*sm.A_exact)[0], -vbar);
        EXPECT_EQ((*sm.V_exact)[1], YPolynomial::constant(vbar) - *v.polynomial());
    }
}

TEST(Derive, ShapeFunctionsHaveZeroMeanAndResidualIsTiny) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 20; ++trial) {
        const auto k = exponential(gen::random_positive_profile(rng));
        const auto exact = derive(k, 4, cs16());
        const auto numeric = derive_numeric(k, 4, cs16());
        for (int n = 1; n <= 4; ++n) {
            EXPECT_EQ((*exact.V_exact)[static_cast<std::size_t>(n)].mean(), 0);
            const auto& Vn = numeric.V[static_cast<std::size_t>(n)];
            EXPECT_NEAR(cross_mean(Vn, cs16()), 0.0, 1e-12 * std::max(1.0, Vn.max_abs()));
            EXPECT_LE(numeric.validation.hierarchy_residual[static_cast<std::size_t>(n - 1)],
                      1e-12 * std::max(1.0, Vn.max_abs()));
            EXPECT_LE(numeric.validation.solvability[static_cast<std::size_t>(n - 1)],
                      1e-13 * std::max(1.0, Vn.max_abs()));
        }
        expect_close(numeric, exact, 1e-12);
    }
}

TEST(Derive, SampledProfileTakesTheNumericPath) {
    const auto& cs = cs16();
    std::vector<double> samples;
    for (double y : cs.nodes) samples.push_back(1.0 - y * y);
    const auto sm = derive(exponential(VelocityProfile::sampled(samples)), 2, cs);
    EXPECT_FALSE(sm.exact());
    EXPECT_NEAR(sm.coefficient(1), -2.0 / 3.0, 1e-14);
    EXPECT_NEAR(sm.coefficient(2), 28.0 / 45.0, 1e-14);
    expect_close(sm, derive(exponential(VelocityProfile::parabolic()), 2, cs), 1e-13);
}

TEST(Derive, ErrorsForDivergentMomentsAndBadProfiles) {
    JumpKernel::GeneralOneSided g;
    g.raw_moments = {YPolynomial::constant(1), poly({1}), poly({2}), Divergent{}};
    const auto k = JumpKernel::general(g);
    EXPECT_NO_THROW(derive(k, 2, cs16()));
    EXPECT_FALSE(derive(k, 2, cs16()).validation.next_moment_exists);
    EXPECT_THROW(derive(k, 3, cs16()), MomentDivergence);
    EXPECT_THROW(derive(exponential(VelocityProfile::polynomial({0, 1})), 2, cs16()), InvalidProfile);
    EXPECT_THROW(derive(exponential(VelocityProfile::parabolic()), 0, cs16()), InvalidArgument);
}

TEST(Derive, GeneralKernelWithNodalMomentsMatchesExponential) {
    const auto& cs = cs16();
    const auto v = VelocityProfile::parabolic();
    JumpKernel::GeneralOneSided g;
    g.raw_moments.push_back(YPolynomial::constant(1));
    double fact = 1.0;
    for (int n = 1; n <= 3; ++n) {
        fact *= n;
        std::vector<double> mu;
        for (double y : cs.nodes) mu.push_back(fact * std::pow(1.0 - y * y, n));
        g.raw_moments.emplace_back(mu);
    }
    const auto sm = derive(JumpKernel::general(g), 3, cs);
    EXPECT_FALSE(sm.exact());
    expect_close(sm, derive(exponential(v), 3, cs), 1e-13);
}

TEST(ClosedForm, MatchesHierarchyExactly) {
    const auto cf = closed_form_order2(VelocityProfile::parabolic(), cs16());
    const auto h = derive(exponential(VelocityProfile::parabolic()), 2, cs16());
    EXPECT_EQ(*cf.A_exact, *h.A_exact);
    EXPECT_EQ(*cf.V_exact, *h.V_exact);

    const YPolynomial v{1, 0, -1};
    EXPECT_EQ((v * v).mean(), R(8, 15));
    const auto dev = v - YPolynomial::constant(v.mean());
    EXPECT_EQ((dev * dev).mean(), R(4, 45));

    const auto one = closed_form_order2(VelocityProfile::constant(1), cs16());
    EXPECT_EQ((*one.A_exact)[0], R(-1));
    EXPECT_EQ((*one.A_exact)[1], R(1));

    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = gen::random_positive_profile(rng);
        const auto a = closed_form_order2(p, cs16());
        const auto b = derive(exponential(p), 2, cs16());
        EXPECT_EQ(*a.A_exact, *b.A_exact);
        EXPECT_EQ(*a.V_exact, *b.V_exact);
    }
}

TEST(ClosedForm, SampledProfile) {
    const auto& cs = cs16();
    std::vector<double> samples;
    for (double y : cs.nodes) samples.push_back(2.0 + y + y * y * y);
    const auto cf = closed_form_order2(VelocityProfile::sampled(samples), cs);
    const auto h = derive(exponential(VelocityProfile::polynomial({2, 1, 0, 1})), 2, cs);
    expect_close(cf, h, 1e-13);
}

TEST(BlockOperator, StructureForParabolicProfile) {
    const auto& cs = cs16();
    const auto B = block_operator(exponential(VelocityProfile::parabolic()), 2, cs);
    const auto n = static_cast<Eigen::Index>(cs.size());
    ASSERT_EQ(B.matrix.rows(), 3 * n);
    const Eigen::MatrixXd b01 = B.block(0, 1);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) {
            const double y = cs.nodes[static_cast<std::size_t>(r)];
            EXPECT_EQ(b01(r, c), r == c ? -(1.0 - y * y) : 0.0);
        }
    for (int i = 0; i <= 2; ++i)
        for (int j = 0; j < i; ++j) EXPECT_EQ(B.block(i, j).cwiseAbs().maxCoeff(), 0.0);
    // block Toeplitz: constant along block diagonals
    EXPECT_EQ(B.block(0, 0), B.block(1, 1));
    EXPECT_EQ(B.block(1, 1), B.block(2, 2));
    EXPECT_EQ(B.block(0, 1), B.block(1, 2));
}

TEST(BlockOperator, SpectrumIsThreeZerosAndMinusOnes) {
    const auto& cs = cs16();
    const auto B = block_operator(exponential(VelocityProfile::parabolic()), 2, cs);
    for (const auto& spectrum : {dense_spectrum(B), block_spectrum(B)}) {
        std::vector<double> re;
        for (const auto& z : spectrum) {
            EXPECT_NEAR(z.imag(), 0.0, 1e-10);
            re.push_back(z.real());
        }
        std::sort(re.begin(), re.end());
        const std::size_t minus_ones = 3 * (cs.size() - 1);
        ASSERT_EQ(re.size(), minus_ones + 3);
        for (std::size_t i = 0; i < minus_ones; ++i) EXPECT_NEAR(re[i], -1.0, 1e-10);
        for (std::size_t i = minus_ones; i < re.size(); ++i) EXPECT_NEAR(re[i], 0.0, 1e-10);
    }
}

TEST(ZeroEigenspace, MatchesHierarchyForParabolicProfile) {
    const auto& cs = cs16();
    const auto k = exponential(VelocityProfile::parabolic());
    const auto es = zero_eigenspace(block_operator(k, 2, cs), cs);
    EXPECT_EQ(es.method, "eigenspace");
    EXPECT_FALSE(es.exact());
    expect_close(es, derive(k, 2, cs), 1e-12);
    EXPECT_LE(es.validation.eigen_residual, 1e-12);
}

TEST(ZeroEigenspace, ConstantAndOrderOne) {
    const auto& cs = cs16();
    for (double c : {0.5, 1.0, 2.0}) {
        const auto es = zero_eigenspace(block_operator(exponential(VelocityProfile::constant(Rational(c))), 2, cs), cs);
        EXPECT_NEAR(es.coefficient(1), -c, 1e-12);
        EXPECT_NEAR(es.coefficient(2), c * c, 1e-12);
        EXPECT_LE(es.V[1].max_abs(), 1e-12);
        EXPECT_LE(es.V[2].max_abs(), 1e-12);
    }
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 10; ++trial) {
        const auto v = gen::random_positive_profile(rng);
        const auto es = zero_eigenspace(block_operator(exponential(v), 1, cs), cs);
        EXPECT_NEAR(es.coefficient(1), -to_double(v.polynomial()->mean()), 1e-12);
    }
}

TEST(ZeroEigenspace, PathEquivalenceOnRandomProfiles) {
    const auto& cs = cs16();
    std::mt19937_64 rng(25);
    for (int trial = 0; trial < 30; ++trial) {
        const auto k = exponential(gen::random_positive_profile(rng, 6));
        for (int order : {2, 3}) {
            const auto es = zero_eigenspace(block_operator(k, order, cs), cs);
            expect_close(es, derive(k, order, cs), 1e-11);
        }
    }
}

TEST(ZeroEigenspace, RejectsMismatchedCrossSection) {
    const auto B = block_operator(exponential(VelocityProfile::parabolic()), 2, cs16());
    EXPECT_THROW(zero_eigenspace(B, build_cross_section(8)), InvalidArgument);
}
