#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fehmm/fem/assembly.hpp"
#include "fehmm/fem/banded.hpp"
#include "fehmm/fem/norms.hpp"
#include "fehmm/fem/quadrature.hpp"
#include "fehmm/fem/space.hpp"

using namespace fehmm::fem;

namespace {

double total_sum(const BandedMatrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j) s += m.at(i, j);
    return s;
}

// Plain Gaussian elimination with partial pivoting, as an independent oracle.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::fabs(a[i][k]) > std::fabs(a[p][k])) p = i;
        std::swap(a[k], a[p]);
        std::swap(b[k], b[p]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

FeSpace p(int degree, std::size_t n, Boundary bc = Boundary::none) { return FeSpace(Mesh1D(0.0, 1.0, n), degree, bc); }

}  // namespace

TEST(Quadrature, GaussExactness) {
    for (std::size_t n = 1; n <= 8; ++n) {
        const auto rule = gauss_legendre(n);
        double wsum = 0.0;
        for (double w : rule.weights) wsum += w;
        EXPECT_NEAR(wsum, 1.0, 1e-15);
        for (std::size_t k = 0; k <= 2 * n - 1; ++k) {
            double s = 0.0;
            for (std::size_t q = 0; q < n; ++q) s += rule.weights[q] * std::pow(rule.points[q], static_cast<double>(k));
            EXPECT_NEAR(s, 1.0 / (k + 1.0), 1e-14) << "n = " << n << " k = " << k;
        }
    }
}

TEST(Quadrature, LagrangeBasisIsNodal) {
    for (int deg = 1; deg <= 4; ++deg) {
        double v[8], d[8];
        for (int j = 0; j <= deg; ++j) {
            lagrange_basis(deg, static_cast<double>(j) / deg, v, d);
            double dsum = 0.0;
            for (int i = 0; i <= deg; ++i) {
                EXPECT_NEAR(v[i], i == j ? 1.0 : 0.0, 1e-14);
                dsum += d[i];
            }
            EXPECT_NEAR(dsum, 0.0, 1e-12);
        }
    }
}

TEST(Space, DofCounts) {
    EXPECT_EQ(p(1, 4, Boundary::dirichlet_zero).n_dofs(), 3u);
    EXPECT_EQ(p(2, 4, Boundary::dirichlet_zero).n_dofs(), 7u);
    EXPECT_EQ(p(2, 4, Boundary::periodic).n_dofs(), 8u);
    EXPECT_EQ(p(1, 4).n_dofs(), 5u);
    EXPECT_NEAR(p(2, 4).node_x(1), 0.125, 1e-15);
    EXPECT_THROW(Mesh1D(1.0, 0.0, 3), fehmm::InputError);
    EXPECT_THROW(Mesh1D(0.0, 1.0, 0), fehmm::InputError);
}

TEST(Mass, P1PartitionOfUnity) {
    const auto m = assemble_mass(p(1, 2));
    ASSERT_EQ(m.size(), 3u);
    EXPECT_NEAR(total_sum(m), 1.0, 1e-15);
    // row sums are the hat-function integrals h/2, h, h/2
    const double row[] = {0.25, 0.5, 0.25};
    for (std::size_t i = 0; i < 3; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 3; ++j) s += m.at(i, j);
        EXPECT_NEAR(s, row[i], 1e-15);
    }
}

TEST(Mass, P2TotalIsLength) {
    EXPECT_NEAR(total_sum(assemble_mass(p(2, 1))), 1.0, 1e-15);
    EXPECT_NEAR(total_sum(assemble_mass(FeSpace(Mesh1D(-1.0, 2.0, 5), 2, Boundary::none))), 3.0, 1e-14);
}

TEST(Mass, DirichletP1IsTridiagonal) {
    const auto m = assemble_mass(p(1, 4, Boundary::dirichlet_zero));
    EXPECT_EQ(m.size(), 3u);
    EXPECT_EQ(m.at(0, 2), 0.0);
    EXPECT_GT(m.at(0, 1), 0.0);
}

TEST(Stiffness, UnitP1TwoElements) {
    const auto k = assemble_stiffness(p(1, 2, Boundary::dirichlet_zero), [](double) { return 1.0; });
    ASSERT_EQ(k.size(), 1u);
    EXPECT_NEAR(k.at(0, 0), 4.0, 1e-14);
}

TEST(Stiffness, LinearInCoefficient) {
    const auto space = p(2, 7);
    const auto k1 = assemble_stiffness(space, [](double) { return 1.0; });
    const auto kc = assemble_stiffness(space, [](double) { return 3.25; });
    for (std::size_t i = 0; i < k1.size(); ++i)
        for (std::size_t j = 0; j < k1.size(); ++j) EXPECT_NEAR(kc.at(i, j), 3.25 * k1.at(i, j), 1e-12);
}

TEST(Stiffness, EnergyOfQuadratic) {
    const auto space = p(2, 3);
    const auto u = interpolate(space, [](double x) { return x * x; });
    const auto k = assemble_stiffness(space, [](double) { return 1.0; });
    const auto ku = k.multiply(u.coefficients());
    double e = 0.0;
    for (std::size_t i = 0; i < ku.size(); ++i) e += ku[i] * u.coefficients()[i];
    EXPECT_NEAR(e, 4.0 / 3.0, 1e-13);
}

TEST(Stiffness, AnnihilatesConstants) {
    for (int deg = 1; deg <= 3; ++deg) {
        const auto k = assemble_stiffness(p(deg, 9), [](double x) { return 1.0 + x * x; });
        const std::vector<double> ones(k.size(), 1.0);
        for (double v : k.multiply(ones)) EXPECT_LE(std::fabs(v), 1e-12 * k.norm_inf());
    }
}

TEST(Stiffness, NonFiniteCoefficientIsRejected) {
    EXPECT_THROW(assemble_stiffness(p(1, 3), [](double) { return std::nan(""); }), fehmm::NumericalError);
}

TEST(Assembly, Symmetric) {
    std::mt19937_64 rng(3);
    for (int deg = 1; deg <= 3; ++deg) {
        const auto space = p(deg, 11, Boundary::dirichlet_zero);
        const auto m = assemble_mass(space);
        const auto k = assemble_stiffness(space, [](double x) { return 2.0 + std::sin(7 * x); });
        std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
        for (int r = 0; r < 200; ++r) {
            const std::size_t i = pick(rng), j = pick(rng);
            EXPECT_NEAR(m.at(i, j), m.at(j, i), 1e-15 * std::fabs(m.at(i, i)));
            EXPECT_NEAR(k.at(i, j), k.at(j, i), 1e-13 * std::fabs(k.at(i, i)));
        }
    }
}

TEST(Banded, IdentitySolve) {
    const std::vector<double> r{1.0, -2.0, 3.5};
    EXPECT_EQ(solve_banded(BandedMatrix::identity(3), r), r);
}

TEST(Banded, TridiagonalAgainstDense) {
    BandedMatrix m(3, 1, 1);
    for (std::size_t i = 0; i < 3; ++i) {
        m.set(i, i, 2.0);
        if (i > 0) m.set(i, i - 1, -1.0);
        if (i < 2) m.set(i, i + 1, -1.0);
    }
    const std::vector<double> rhs{1.0, 1.0, 1.0};
    const auto x = solve_banded(m, rhs);
    const auto xd = dense_solve({{2, -1, 0}, {-1, 2, -1}, {0, -1, 2}}, rhs);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(x[i], xd[i], 1e-14);
    EXPECT_NEAR(x[0], 1.5, 1e-14);
    EXPECT_NEAR(x[1], 2.0, 1e-14);
    EXPECT_NEAR(x[2], 1.5, 1e-14);
}

TEST(Banded, SingularZeroMatrix) {
    EXPECT_THROW(solve_banded(BandedMatrix(3, 1, 1), std::vector<double>{1, 1, 1}), fehmm::SingularMatrixError);
}

TEST(Banded, RandomSpdResidual) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 5 + static_cast<std::size_t>(trial) * 7;
        const std::size_t bw = 1 + trial % 3;
        BandedMatrix m(n, bw, bw);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j <= std::min(n - 1, i + bw); ++j) {
                const double v = i == j ? 0.0 : u(rng);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        for (std::size_t i = 0; i < n; ++i) m.set(i, i, m.row_abs_sum(i) + 0.5);  // diagonally dominant
        std::vector<double> rhs(n);
        for (auto& r : rhs) r = u(rng);
        const auto x = solve_banded(m, rhs);
        const auto mx = m.multiply(x);
        double res = 0.0, xn = 0.0, bn = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            res = std::max(res, std::fabs(mx[i] - rhs[i]));
            xn = std::max(xn, std::fabs(x[i]));
            bn = std::max(bn, std::fabs(rhs[i]));
        }
        EXPECT_LE(res, 1e-10 * (m.norm_inf() * xn + bn));
    }
}

TEST(Banded, PeriodicSchurSolveMatchesDense) {
    const auto space = p(2, 6, Boundary::periodic);
    const std::size_t n = space.n_dofs();
    PeriodicBandedMatrix m(n, space.bandwidth());
    add_mass(space, m);
    add_stiffness(space, m, [](double x) { return 1.5 + std::cos(2 * std::numbers::pi * x); }, 0.1);
    std::vector<std::vector<double>> dense(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) dense[i][j] = m.at(i, j);
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = std::sin(static_cast<double>(i));
    const auto x = PeriodicLU(m).solve(rhs);
    const auto xd = dense_solve(dense, rhs);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[i], xd[i], 1e-12);
    // wrap coupling: dof 0 talks to the last element's interior node
    EXPECT_NE(m.at(0, n - 1), 0.0);
}

TEST(L2Project, Idempotent) {
    const auto space = p(2, 5);
    const auto g = [](double x) { return 1.0 - 3.0 * x + 2.0 * x * x; };  // in the P2 space
    const auto u = l2_project(space, g);
    const auto ui = interpolate(space, g);
    for (std::size_t i = 0; i < u.coefficients().size(); ++i) EXPECT_NEAR(u.coefficients()[i], ui.coefficients()[i], 1e-12);
    const auto again = l2_project(space, [&](double x) { return u(x); });
    for (std::size_t i = 0; i < u.coefficients().size(); ++i) EXPECT_NEAR(again.coefficients()[i], u.coefficients()[i], 1e-12);
}

TEST(L2Project, ZeroFunction) {
    const auto u = l2_project(p(1, 8, Boundary::dirichlet_zero), [](double) { return 0.0; });
    for (double c : u.coefficients()) EXPECT_EQ(c, 0.0);
}

TEST(L2Project, GalerkinResidual) {
    const auto space = p(1, 16, Boundary::dirichlet_zero);
    const auto f = [](double x) { return std::exp(x) * std::sin(3 * x); };
    const auto u = l2_project(space, f);
    const auto mu = assemble_mass(space).multiply(u.coefficients());
    const auto rhs = assemble_load(space, f, 3);
    for (std::size_t i = 0; i < mu.size(); ++i) EXPECT_NEAR(mu[i], rhs[i], 1e-14);
}

TEST(L2Project, SecondOrderForSine) {
    std::vector<double> err;
    for (std::size_t n : {16u, 32u, 64u}) {
        const auto u = l2_project(p(1, n, Boundary::dirichlet_zero), [](double x) { return std::sin(std::numbers::pi * x); });
        err.push_back(error_norms(
                          u, [](double x) { return std::sin(std::numbers::pi * x); },
                          [](double x) { return std::numbers::pi * std::cos(std::numbers::pi * x); })
                          .l2);
    }
    EXPECT_GE(std::log2(err[0] / err[1]), 1.9);
    EXPECT_GE(std::log2(err[1] / err[2]), 1.9);
    EXPECT_LT(err[2], 1e-3);
}

TEST(Norms, Zero) {
    const auto n = norms(FeFunction(p(2, 4)));
    EXPECT_EQ(n.l2, 0.0);
    EXPECT_EQ(n.h1_semi, 0.0);
}

TEST(Norms, Linear) {
    const auto n = norms(interpolate(p(1, 3), [](double x) { return x; }));
    EXPECT_NEAR(n.l2, 1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(n.h1_semi, 1.0, 1e-14);
}

TEST(Norms, InterpolatedSine) {
    const auto n = norms(interpolate(p(1, 128), [](double x) { return std::sin(std::numbers::pi * x); }));
    EXPECT_NEAR(n.l2, 1.0 / std::sqrt(2.0), 1e-3);
}

TEST(Norms, InterpolationErrorMonotoneOnNestedMeshes) {
    const auto f = [](double x) { return std::exp(-x) * std::cos(5 * x); };
    const auto df = [](double x) { return -std::exp(-x) * (std::cos(5 * x) + 5 * std::sin(5 * x)); };
    for (int deg = 1; deg <= 2; ++deg) {
        Norms prev{1e300, 1e300};
        for (std::size_t n = 4; n <= 128; n *= 2) {
            const auto e = error_norms(interpolate(p(deg, n), f), f, df);
            EXPECT_LT(e.l2, prev.l2);
            EXPECT_LT(e.h1_semi, prev.h1_semi);
            prev = e;
        }
    }
}

TEST(FeFunction, PointEvaluation) {
    const auto u = interpolate(p(2, 4), [](double x) { return x * x; });
    EXPECT_NEAR(u(0.3), 0.09, 1e-14);
    EXPECT_NEAR(u(1.0), 1.0, 1e-14);
    EXPECT_NEAR(u.derivative(1, 0.5), 0.75, 1e-13);
}
