#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include "support.hpp"
#include "zappa/kernel.hpp"

using namespace zappa;

namespace {

const CrossSection& cs16() {
    static const CrossSection cs = build_cross_section(16);
    return cs;
}

JumpKernel parabolic_kernel() { return JumpKernel::exponential(VelocityProfile::parabolic()); }

}  // namespace

TEST(MomentOperator, FirstAndSecondMomentsOfExponentialJumps) {
    const auto& cs = cs16();
    const auto k = parabolic_kernel();
    const CrossField one(cs.size(), 1.0);
    const auto L1 = apply(moment_operator(1, k, cs), one);
    const auto L2 = apply(moment_operator(2, k, cs), one);
    for (std::size_t j = 0; j < cs.size(); ++j) {
        const double v = 1.0 - cs.nodes[j] * cs.nodes[j];
        EXPECT_NEAR(L1[j], -v, 1e-15);
        EXPECT_NEAR(L2[j], v * v, 1e-15);
    }
    EXPECT_EQ(*moment_operator(1, k, cs).exact, (YPolynomial{-1, 0, 1}));
    EXPECT_EQ(*moment_operator(2, k, cs).exact, (YPolynomial{1, 0, -2, 0, 1}));
}

TEST(MomentOperator, ZapAnnihilatesConstants) {
    const auto& cs = cs16();
    const auto L0 = moment_operator(0, parabolic_kernel(), cs);
    for (double c : {-2.0, 0.0, 1.0, 3.5}) {
        const auto out = apply(L0, CrossField(cs.size(), c));
        EXPECT_LE(out.max_abs(), 1e-15 * std::max(1.0, std::abs(c)));
    }
    EXPECT_TRUE(apply(L0, YPolynomial::constant(Rational(7, 3))).is_zero());
}

TEST(MomentOperator, ApplyExamples) {
    const auto& cs = cs16();
    const auto k = parabolic_kernel();
    const auto L0 = moment_operator(0, k, cs);
    const auto L1 = moment_operator(1, k, cs);

    const YPolynomial y{0, 1}, y2{0, 0, 1}, v{1, 0, -1};
    EXPECT_EQ(apply(L0, y), -y);
    EXPECT_EQ(apply(L0, y2), (YPolynomial{Rational(1, 3), 0, -1}));
    EXPECT_EQ(apply(L1, v), -(v * v));

    const auto ny = apply(L0, CrossField::sample(y, cs));
    const auto ny2 = apply(L0, CrossField::sample(y2, cs));
    const auto nv = apply(L1, CrossField::sample(v, cs));
    for (std::size_t j = 0; j < cs.size(); ++j) {
        const double yj = cs.nodes[j];
        EXPECT_NEAR(ny[j], -yj, 1e-15);
        EXPECT_NEAR(ny2[j], 1.0 / 3.0 - yj * yj, 1e-15);
        EXPECT_NEAR(nv[j], -(1 - yj * yj) * (1 - yj * yj), 1e-15);
    }
}

TEST(MomentOperator, ZapNegatesZeroMeanFields) {
    std::mt19937_64 rng(5);
    const auto& cs = cs16();
    const auto L0 = moment_operator(0, parabolic_kernel(), cs);
    for (int trial = 0; trial < 20; ++trial) {
        CrossField f(gen::random_values(rng, cs.size()));
        f += -cross_mean(f, cs);
        const auto out = apply(L0, f);
        for (std::size_t j = 0; j < cs.size(); ++j) EXPECT_NEAR(out[j], -f[j], 1e-15);
    }
}

TEST(MomentOperator, IsLinear) {
    std::mt19937_64 rng(9);
    const auto& cs = cs16();
    const auto k = parabolic_kernel();
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int n = 0; n <= 4; ++n) {
        const auto op = moment_operator(n, k, cs);
        for (int trial = 0; trial < 10; ++trial) {
            const CrossField f(gen::random_values(rng, cs.size())), g(gen::random_values(rng, cs.size()));
            const double a = coef(rng), b = coef(rng);
            const auto lhs = apply(op, a * f + b * g);
            const auto rhs = a * apply(op, f) + b * apply(op, g);
            for (std::size_t j = 0; j < cs.size(); ++j) EXPECT_NEAR(lhs[j], rhs[j], 1e-14);
        }
    }
}

TEST(MomentOperator, SizeMismatchIsAnError) {
    const auto op = moment_operator(1, parabolic_kernel(), cs16());
    EXPECT_THROW(apply(op, CrossField(5, 1.0)), InvalidArgument);
    EXPECT_THROW(moment_operator(-1, parabolic_kernel(), cs16()), InvalidArgument);
}

TEST(MomentOperator, ZapSpectrumIsOneZeroAndMinusOnes) {
    for (int n : {2, 5, 16, 33}) {
        const auto cs = build_cross_section(n);
        const auto L0 = moment_operator(0, parabolic_kernel(), cs);
        Eigen::MatrixXd M(n, n);
        for (int c = 0; c < n; ++c) {
            CrossField e(static_cast<std::size_t>(n), 0.0);
            e[static_cast<std::size_t>(c)] = 1.0;
            const auto col = apply(L0, e);
            for (int r = 0; r < n; ++r) M(r, c) = col[static_cast<std::size_t>(r)];
        }
        Eigen::EigenSolver<Eigen::MatrixXd> es(M);
        std::vector<double> ev;
        for (int i = 0; i < n; ++i) {
            EXPECT_NEAR(es.eigenvalues()[i].imag(), 0.0, 1e-12);
            ev.push_back(es.eigenvalues()[i].real());
        }
        std::sort(ev.begin(), ev.end());
        for (int i = 0; i < n - 1; ++i) EXPECT_NEAR(ev[static_cast<std::size_t>(i)], -1.0, 1e-12);
        EXPECT_NEAR(ev.back(), 0.0, 1e-12);
        // the null vector is constant across the channel
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
        EXPECT_LE((M * ones).norm(), 1e-13);
    }
}

TEST(MomentExists, ExponentialKernelHasAllMoments) {
    const auto k = parabolic_kernel();
    for (int n = 0; n <= 12; ++n) EXPECT_TRUE(moment_exists(n, k).exists);
}

TEST(MomentExists, DivergentThirdMomentIsReported) {
    JumpKernel::GeneralOneSided g;
    g.raw_moments = {YPolynomial::constant(1), YPolynomial{1, 0, -1}, YPolynomial{2, 0, -4, 0, 2}, Divergent{}};
    const auto k = JumpKernel::general(g);
    EXPECT_TRUE(moment_exists(0, k).exists);
    EXPECT_TRUE(moment_exists(2, k).exists);
    const auto check = moment_exists(3, k);
    EXPECT_FALSE(check.exists);
    EXPECT_EQ(check.first_failing_order, 3);
    EXPECT_NE(check.diagnostic.find("order 3"), std::string::npos);
    EXPECT_FALSE(moment_exists(5, k).exists);
    EXPECT_EQ(moment_exists(5, k).first_failing_order, 3);
    try {
        moment_operator(3, k, cs16());
        FAIL() << "expected MomentDivergence";
    } catch (const MomentDivergence& e) {
        EXPECT_EQ(e.order(), 3);
    }
}

TEST(MomentExists, MissingAndNonFiniteMoments) {
    JumpKernel::GeneralOneSided g;
    g.raw_moments = {YPolynomial::constant(1), std::vector<double>(16, 0.5),
                     std::vector<double>(16, std::numeric_limits<double>::infinity())};
    const auto k = JumpKernel::general(g);
    EXPECT_TRUE(moment_exists(1, k).exists);
    EXPECT_EQ(moment_exists(2, k).first_failing_order, 2);
    EXPECT_EQ(moment_exists(4, k).first_failing_order, 2);
    EXPECT_TRUE(moment_exists(0, k).exists);
}

TEST(MomentCoefficient, GeneralKernelScalesRawMoments) {
    // mu_n = n! v^n reproduces the exponential kernel's m_n = (-v)^n
    const auto& cs = cs16();
    const YPolynomial v{Rational(3, 2), Rational(1, 2)};
    JumpKernel::GeneralOneSided g;
    g.raw_moments.push_back(YPolynomial::constant(1));
    Rational fact = 1;
    for (int n = 1; n <= 4; ++n) {
        fact *= n;
        g.raw_moments.push_back(v.pow(n) * fact);
    }
    const auto general = JumpKernel::general(g);
    const auto expo = JumpKernel::exponential(VelocityProfile(v));
    for (int n = 0; n <= 4; ++n) {
        EXPECT_EQ(*exact_moment_coefficient(n, general), *exact_moment_coefficient(n, expo)) << n;
        const auto a = moment_coefficient(n, general, cs), b = moment_coefficient(n, expo, cs);
        for (std::size_t j = 0; j < cs.size(); ++j) EXPECT_NEAR(a[j], b[j], 1e-13 * std::max(1.0, std::abs(b[j])));
    }
}

TEST(MomentCoefficient, NodalMomentsNeedMatchingSize) {
    JumpKernel::GeneralOneSided g;
    g.raw_moments = {YPolynomial::constant(1), std::vector<double>(4, 1.0)};
    const auto k = JumpKernel::general(g);
    EXPECT_THROW(moment_coefficient(1, k, cs16()), InvalidArgument);
    EXPECT_FALSE(exact_moment_coefficient(1, k).has_value());
    EXPECT_NO_THROW(moment_coefficient(1, k, build_cross_section(4)));
}

TEST(MomentCoefficient, AnalyticMatchesQuadratureOfTheDensity) {
    const auto k = parabolic_kernel();
    for (double y : {-0.9, -0.5, 0.0, 0.3, 0.77}) {
        const double v = 1.0 - y * y;
        EXPECT_NEAR(density_moment(0, k, y), 1.0, 1e-10);
        double fact = 1.0;
        for (int n = 1; n <= 5; ++n) {
            fact *= n;
            const double quad = (n % 2 == 0 ? 1.0 : -1.0) * density_moment(n, k, y) / fact;
            EXPECT_NEAR(quad, std::pow(-v, n), 1e-8) << "n = " << n << " y = " << y;
        }
    }
}

TEST(JumpKernel, DensityAndDescription) {
    const auto k = parabolic_kernel();
    const auto p = k.density();
    ASSERT_TRUE(static_cast<bool>(p));
    EXPECT_NEAR(p(0.5, 0.0), std::exp(-0.5), 1e-15);
    EXPECT_NEAR(p(0.2, 0.5), std::exp(-0.2 / 0.75) / 0.75, 1e-15);
    EXPECT_NE(k.describe().find("exponential"), std::string::npos);

    JumpKernel::GeneralOneSided g;
    g.raw_moments = {YPolynomial::constant(1)};
    EXPECT_THROW(density_moment(1, JumpKernel::general(g), 0.0), UnsupportedKernel);
}
