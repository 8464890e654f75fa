#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hlb/grid.hpp"

using namespace hlb;
using namespace hlb::grid;

TEST(Grid, StaggeredNodes) {
    auto x = make_grid({2.0, 4, Mode::periodic});
    ASSERT_EQ(x.size(), 4u);
    EXPECT_DOUBLE_EQ(x[0], 0.25);
    EXPECT_DOUBLE_EQ(x[1], 0.75);
    EXPECT_DOUBLE_EQ(x[2], 1.25);
    EXPECT_DOUBLE_EQ(x[3], 1.75);
    EXPECT_DOUBLE_EQ(make_grid({1.0, 16, Mode::periodic})[0], 1.0 / 32);
    auto r = make_grid({1.5, 6, Mode::realline});
    std::vector<double> want{-1.25, -0.75, -0.25, 0.25, 0.75, 1.25};
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(r[j], want[j], 1e-15);
}

TEST(Grid, ConfigValidation) {
    EXPECT_THROW(make_grid({1.0, 3, Mode::periodic}), Error);
    EXPECT_THROW(make_grid({1.0, 0, Mode::periodic}), Error);
    EXPECT_THROW(make_grid({-1.0, 8, Mode::periodic}), Error);
    try {
        make_grid({0.0, 8, Mode::periodic});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "invalid-config");
    }
}

TEST(Grid, MirrorNeverHitsSingularPoints) {
    DomainConfig d{1.0, 64, Mode::periodic};
    for (int j = 0; j < d.N; ++j) {
        EXPECT_NE(d.node(j), 0.0);
        EXPECT_NE(d.node(j), 0.5);
        EXPECT_NEAR(d.node(j) + d.node(d.mirror(j)), 1.0, 1e-15);  // -x == L - x
    }
}

TEST(Grid, Integrate) {
    DomainConfig d{2.0, 64, Mode::periodic};
    EXPECT_EQ(integrate(GridField(d), 0.0, 2.0), 0.0);
    auto one = GridField::sample(d, [](double) { return 1.0; });
    EXPECT_NEAR(integrate(one, 0.0, 1.0), 1.0, 1e-15);
    auto s = GridField::sample(d, [&](double x) { return std::sin(2 * std::numbers::pi * x / d.L); });
    EXPECT_NEAR(integrate(s), 0.0, 1e-14);
    EXPECT_NEAR(integrate(s, 0.0, 2.0), 0.0, 1e-14);
    // additivity across a split point inside a cell
    EXPECT_NEAR(integrate(s, 0.0, 0.37) + integrate(s, 0.37, 2.0), integrate(s, 0.0, 2.0), 1e-14);
    EXPECT_THROW(integrate(s, 1.0, 1.0), Error);
    try {
        integrate(s, 1.0, 0.5);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "empty-interval");
    }
}

TEST(Grid, Projections) {
    DomainConfig d{1.0, 32, Mode::periodic};
    double mu = d.mu();
    auto odd = GridField::sample(d, [&](double x) { return std::sin(2 * mu * x) + 0.2 * std::sin(6 * mu * x); });
    auto even = GridField::sample(d, [&](double x) { return std::cos(2 * mu * x); });
    auto mixed = GridField::sample(d, [&](double x) { return 1 + std::sin(2 * mu * x); });
    auto po = project_odd(odd);
    for (int j = 0; j < d.N; ++j) EXPECT_NEAR(po[j], odd[j], 1e-15);
    EXPECT_LE(project_odd(even).max_abs(), 1e-15);
    auto pm = project_odd(mixed);
    for (int j = 0; j < d.N; ++j) EXPECT_NEAR(pm[j], std::sin(2 * mu * d.node(j)), 1e-15);
    EXPECT_TRUE(has_symmetry(pm, Symmetry::odd));
    EXPECT_TRUE(has_symmetry(project_even(mixed), Symmetry::even));
}

TEST(Grid, SpectralDerivative) {
    DomainConfig d{1.0, 64, Mode::periodic};
    double mu = d.mu();
    auto f = GridField::sample(d, [&](double x) { return std::sin(2 * mu * x); });
    auto df = spectral_derivative(f);
    for (int j = 0; j < d.N; ++j) EXPECT_NEAR(df[j], 2 * mu * std::cos(2 * mu * d.node(j)), 1e-12);
    auto c = GridField::sample(d, [](double) { return 3.0; });
    EXPECT_LE(spectral_derivative(c).max_abs(), 1e-13);
    EXPECT_THROW(spectral_derivative(GridField({1.0, 8, Mode::realline})), Error);
}

TEST(Grid, SpectralDerivativeOfBump) {
    // width L/8 bump on (0.4, 0.525), derivative by hand
    DomainConfig d{1.0, 512, Mode::periodic};
    double c = 0.125, x0 = 0.4;
    auto b = [&](double x) {
        double s = (2 * (x - x0) - c) / c, q = 1 - s * s;
        return q > 0 ? std::exp(1 - 1 / q) : 0.0;
    };
    auto db = [&](double x) {
        double s = (2 * (x - x0) - c) / c, q = 1 - s * s;
        return q > 0 ? std::exp(1 - 1 / q) * (-4 * s / c) / (q * q) : 0.0;
    };
    auto err = [&](int N) {
        DomainConfig g{1.0, N, Mode::periodic};
        auto df = spectral_derivative(GridField::sample(g, b));
        double e = 0;
        for (int j = 0; j < N; ++j) e = std::max(e, std::abs(df[j] - db(g.node(j))));
        return e;
    };
    EXPECT_LE(err(d.N), 1e-8);
}

TEST(Grid, SpectralDerivativeOfBumpConverges) {
    double c = 0.125, x0 = 0.4;
    auto b = [&](double x) {
        double s = (2 * (x - x0) - c) / c, q = 1 - s * s;
        return q > 0 ? std::exp(1 - 1 / q) : 0.0;
    };
    auto db = [&](double x) {
        double s = (2 * (x - x0) - c) / c, q = 1 - s * s;
        return q > 0 ? std::exp(1 - 1 / q) * (-4 * s / c) / (q * q) : 0.0;
    };
    std::vector<double> e;
    for (int N : {512, 1024, 2048, 4096}) {
        DomainConfig g{1.0, N, Mode::periodic};
        auto df = spectral_derivative(GridField::sample(g, b));
        double m = 0;
        for (int j = 0; j < N; ++j) m = std::max(m, std::abs(df[j] - db(g.node(j))));
        e.push_back(m);
    }
    // faster than any power: each doubling gains more than the previous one
    for (size_t k = 1; k < e.size(); ++k) EXPECT_GT(e[k - 1] / e[k], 30.0);
    EXPECT_GT(e[2] / e[3], e[0] / e[1]);
    EXPECT_LE(e[3], 1e-8);
}

TEST(Grid, HalfPeriodWeights) {
    for (int N : {16, 64, 256}) {
        DomainConfig d{2.0, N, Mode::periodic};
        double kap = 2 * std::numbers::pi / d.L;
        const auto& w = half_period_weights(d);
        double sum = 0;
        for (double v : w) sum += v;
        EXPECT_NEAR(sum, d.L / 2, 1e-13);
        for (int k = 1; k < N / 2; ++k) {
            auto fs = GridField::sample(d, [&](double x) { return std::sin(k * kap * x); });
            auto fc = GridField::sample(d, [&](double x) { return std::cos(k * kap * x); });
            double es = (1 - std::cos(k * kap * d.L / 2)) / (k * kap), ec = std::sin(k * kap * d.L / 2) / (k * kap);
            EXPECT_NEAR(integrate_half(fs), es, 1e-13) << N << " " << k;
            EXPECT_NEAR(integrate_half(fc), ec, 1e-13) << N << " " << k;
        }
    }
    DomainConfig line{1.5, 6, Mode::realline};
    auto one = GridField::sample(line, [](double) { return 1.0; });
    EXPECT_NEAR(integrate_half(one), 1.5, 1e-15);
}

TEST(Grid, Fd4OnRealLine) {
    DomainConfig d{3.0, 600, Mode::realline};
    auto f = GridField::sample(d, [](double x) { return std::exp(-4 * x * x); });
    auto df = fd4_derivative(f);
    double err = 0;
    for (int j = 0; j < d.N; ++j) {
        double x = d.node(j);
        err = std::max(err, std::abs(df[j] + 8 * x * std::exp(-4 * x * x)));
    }
    EXPECT_LT(err, 1e-5);
}

TEST(Grid, TrigInterpolant) {
    DomainConfig d{1.0, 32, Mode::periodic};
    double mu = d.mu();
    auto f = GridField::sample(d, [&](double x) { return std::cos(4 * mu * x) + 0.5 * std::sin(10 * mu * x); });
    TrigInterpolant I(f);
    for (double x : {0.0, 0.013, 0.31, 0.77}) {
        EXPECT_NEAR(I(x), std::cos(4 * mu * x) + 0.5 * std::sin(10 * mu * x), 1e-13);
        EXPECT_NEAR(I.derivative(x), -4 * mu * std::sin(4 * mu * x) + 5 * mu * std::cos(10 * mu * x), 1e-11);
    }
    // reproduces the samples
    for (int j = 0; j < d.N; ++j) EXPECT_NEAR(I(d.node(j)), f[j], 1e-13);
}
