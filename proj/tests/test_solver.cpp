#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "dcurve/solver.hpp"
#include "fixtures.hpp"

using namespace dcurve;

namespace {

SolverOptions options(int g, int s, int panels_per_span = 1) {
    SolverOptions o;
    o.disc.g = g;
    o.disc.s = s;
    o.disc.initial_panels_per_span = panels_per_span;
    return o;
}

LinearOperator dense_operator(const Eigen::MatrixXd& A) {
    return [A](std::span<const double> x, std::span<double> y) {
        Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
        Eigen::Map<Eigen::VectorXd> yv(y.data(), y.size());
        yv = A * xv;
    };
}

std::vector<Vec2> grid_points(const Rect& r, int n) {
    std::vector<Vec2> out;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            out.push_back({r.xmin + (i + 0.5) * r.width() / n, r.ymin + (j + 0.5) * r.height() / n});
    return out;
}

}  // namespace

TEST(Gmres, IdentityConvergesImmediately) {
    std::vector<double> b{1.0, -2.0, 3.0};
    auto r = gmres(dense_operator(Eigen::MatrixXd::Identity(3, 3)), b, {});
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.iterations, 1);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(r.x[i], b[i], 1e-14);
}

TEST(Gmres, RandomSystemsMatchDirectSolve) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int n : {5, 20, 60}) {
        Eigen::MatrixXd A(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) A(i, j) = N(rng) / std::sqrt(n) + (i == j ? 3.0 : 0.0);
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) b(i) = N(rng);
        Eigen::VectorXd ref = A.partialPivLu().solve(b);
        GmresConfig c;
        c.tolerance = 1e-12;
        auto r = gmres(dense_operator(A), {b.data(), static_cast<std::size_t>(n)}, {}, c);
        EXPECT_TRUE(r.converged);
        for (int i = 0; i < n; ++i) EXPECT_NEAR(r.x[i], ref(i), 1e-9);
        // residual history is non-increasing
        for (std::size_t k = 1; k < r.residuals.size(); ++k) EXPECT_LE(r.residuals[k], r.residuals[k - 1] * (1 + 1e-12));
        EXPECT_EQ(r.residuals.size(), static_cast<std::size_t>(r.iterations) + 1);
    }
}

TEST(Gmres, WarmStartAtSolutionNeedsNoIterations) {
    Eigen::MatrixXd A(2, 2);
    A << 2, 1, 1, 3;
    std::vector<double> b{3, 4}, x0{1, 1};
    auto r = gmres(dense_operator(A), b, x0);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 0);
}

TEST(Gmres, RestartedStillConverges) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> N(0.0, 1.0);
    const int n = 40;
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) * 4.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) += N(rng) * 0.2;
    std::vector<double> b(n, 1.0);
    GmresConfig c;
    c.restart = 5;
    c.tolerance = 1e-10;
    auto r = gmres(dense_operator(A), b, {}, c);
    EXPECT_TRUE(r.converged);
    EXPECT_LT(r.relative_residual, 1e-10);
}

TEST(Gmres, NonFiniteOperatorThrows) {
    LinearOperator bad = [](std::span<const double>, std::span<double> y) {
        for (double& v : y) v = std::nan("");
    };
    std::vector<double> b{1, 1};
    EXPECT_THROW(gmres(bad, b, {}), GmresError);
}

TEST(Gmres, ZeroRightHandSide) {
    std::vector<double> b(4, 0.0);
    auto r = gmres(dense_operator(Eigen::MatrixXd::Identity(4, 4)), b, {});
    EXPECT_TRUE(r.converged);
    for (double v : r.x) EXPECT_EQ(v, 0.0);
}

TEST(HybridSolve, FmmMatchesDense) {
    Scene sc = preprocess_scene(verify::random_scene(3, 6));
    SolveState st(sc, options(4, 20));
    SolverOptions& so = st.opts;
    so.gmres.tolerance = 1e-10;
    solve_fmm_hybrid(st);
    DensitySet d = solve_dense_hybrid(st.disc);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < st.disc.node_count(); ++i) EXPECT_NEAR(st.dens.sigma[c][i], d.sigma[c][i], 1e-5);
}

TEST(HybridSolve, ConstantColorsGiveConstantField) {
    for (bool neumann : {false, true}) {
        Scene sc = preprocess_scene(verify::constant_scene(0.42, neumann));
        SolveState st(sc, options(4, 20));
        st.opts.gmres.tolerance = 1e-10;
        solve_fmm_hybrid(st);
        auto pts = grid_points(sc.bounds(), 12);
        std::vector<Vec2> keep;
        for (Vec2 p : pts)
            if (!verify::inside_closed_curves(sc, p) && verify::distance_to_curves(sc, p) > 0.02) keep.push_back(p);
        ASSERT_FALSE(keep.empty());
        Channels v = render_pipeline(st, keep);
        for (int c = 0; c < 3; ++c)
            for (double x : v[c]) EXPECT_NEAR(x, 0.42, 1e-4) << "neumann " << neumann;
    }
}

TEST(HybridSolve, ZeroTotalCharge) {
    Scene sc = preprocess_scene(verify::random_scene(5, 5));
    SolveState st(sc, options(4, 20));
    st.opts.gmres.tolerance = 1e-12;
    solve_fmm_hybrid(st);
    for (int c = 0; c < 3; ++c) {
        double q = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < st.disc.node_count(); ++i) {
            q += st.charge_w[i] * st.dens.sigma[c][i];
            scale += std::abs(st.charge_w[i] * st.dens.sigma[c][i]);
        }
        EXPECT_NEAR(q, 0.0, 1e-8 * std::max(1.0, scale));
    }
}

TEST(HybridSolve, DirichletJumpEqualsMu) {
    // across a Dirichlet curve the field jumps by the prescribed u+ - u-
    Scene sc = preprocess_scene(verify::corner_scene());
    SolveState st(sc, options(8, 40));
    st.opts.gmres.tolerance = 1e-10;
    solve_fmm_hybrid(st);
    EvalField ef = make_eval_field(st);
    const auto& path = st.disc.paths()[0];
    for (double f : {0.3, 0.45, 0.6}) {
        CurvePoint cp = path.evaluate(f);
        double h = 2e-3;
        std::vector<Vec2> q{cp.point + cp.normal * h, cp.point - cp.normal * h};
        Channels v = evaluate_field(ef, q);
        for (int c = 0; c < 3; ++c) {
            double jump = st.disc.boundary_value(0, f, Side::Plus, c) - st.disc.boundary_value(0, f, Side::Minus, c);
            EXPECT_NEAR(v[c][0] - v[c][1], jump, 0.02 + 0.05 * std::abs(jump)) << f;
        }
    }
}

TEST(HybridSolve, Deterministic) {
    Scene sc = preprocess_scene(verify::random_scene(7, 5));
    SolveState a(sc, options(4, 20)), b(sc, options(4, 20));
    solve_fmm_hybrid(a);
    solve_fmm_hybrid(b);
    for (int c = 0; c < 3; ++c) {
        EXPECT_EQ(a.dens.sigma[c], b.dens.sigma[c]);
        EXPECT_EQ(a.dens.mu[c], b.dens.mu[c]);
    }
}

TEST(HybridSolve, CopyIsIndependent) {
    Scene sc = preprocess_scene(verify::random_scene(8, 4));
    SolveState st(sc, options(4, 20));
    solve_fmm_hybrid(st);
    SolveState copy(st);
    std::vector<Vec2> q{{0.5, 0.5}, {0.2, 0.8}};
    Channels a = render_pipeline(st, q), b = render_pipeline(copy, q);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(a[c], b[c]);
    copy.dens.constant[0] += 1.0;
    Channels d = render_pipeline(st, q);
    EXPECT_EQ(d[0], a[0]);
}

TEST(HybridSolve, FewerIterationsThanBem) {
    Scene sc = preprocess_scene(verify::random_scene(9, 6));
    SolverOptions so = options(4, 20);
    SolveState st(sc, so);
    SolveReport hy = solve_fmm_hybrid(st);
    BemFmmResult bem = solve_fmm_bem(st.disc, so);
    EXPECT_LE(hy.total_iterations(), bem.total_iterations());
}

TEST(HybridSolve, AllNeumannThrows) {
    Scene sc;
    sc.curves.push_back(verify::circle_curve("n", {0.5, 0.5}, 0.2, {0, 0, 0}, {0, 0, 0}));
    sc.curves[0].bc = NeumannBc{};
    EXPECT_THROW(solve_dense_hybrid(Discretization(sc, {})), std::exception);
}
