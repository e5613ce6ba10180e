#include <doctest.h>

#include <cmath>

#include "bvflow/builtins.hpp"
#include "bvflow/heat.hpp"
#include "helpers.hpp"

using namespace bvflow;
using namespace bvflow::testing;

TEST_CASE("2-vertex graph: H spectrum {0,1} and closed-form semigroup") {
    DiscreteManifold M = two_vertex_graph();
    HeatOperator H = build_heat_operator(M, HeatStrategy::spectral);
    REQUIRE(H.eigenvalues().size() == 2);
    CHECK(H.eigenvalues()[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(H.eigenvalues()[1] == doctest::Approx(1.0).epsilon(1e-14));

    ScalarField f(2);
    f << 1.0, 0.0;
    for (double t : {0.1, 0.5, 1.0, 3.0}) {
        ScalarField g = H.apply(f, t);
        CHECK(g[0].real() == doctest::Approx((1 + std::exp(-t)) / 2).epsilon(1e-13));
        CHECK(g[1].real() == doctest::Approx((1 - std::exp(-t)) / 2).epsilon(1e-13));
    }
    CHECK(H.kernel_row(0.7, 0)[0] == doctest::Approx((1 + std::exp(-0.7)) / 2).epsilon(1e-13));
}

TEST_CASE("t = 0 is the identity") {
    DiscreteManifold M = make_cycle(10);
    HeatOperator H = build_heat_operator(M);
    ScalarField f = random_complex_field(M, 1);
    CHECK((H.apply(f, 0.0) - f).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(H.apply(f, -1.0), ValidationError);
}

TEST_CASE("constants are fixed and mass is conserved") {
    DiscreteManifold M = make_flat_torus(6);
    HeatOperator H = build_heat_operator(M);
    ScalarField one = ScalarField::Constant(M.num_vertices(), 1.0);
    CHECK((H.apply(one, 0.4) - one).cwiseAbs().maxCoeff() <= 1e-12);
    ScalarField f = random_complex_field(M, 7);
    Complex m0 = inner_vertices(M, one, f);
    Complex m1 = inner_vertices(M, one, H.apply(f, 0.3));
    CHECK(std::abs(m0 - m1) <= 1e-12 * (1 + std::abs(m0)));
}

TEST_CASE("spectral and implicit stepper agree on a cycle") {
    DiscreteManifold M = make_cycle(32);
    HeatOperator Hs = build_heat_operator(M, HeatStrategy::spectral);
    HeatParams p;
    p.steps = 4096;
    HeatOperator Hi = build_heat_operator(M, HeatStrategy::implicit_stepper, p);
    ScalarField f = random_complex_field(M, 3);
    ScalarField a = Hs.apply(f, 0.1), b = Hi.apply(f, 0.1);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("semigroup property and contraction") {
    DiscreteManifold M = make_cycle(24);
    HeatOperator H = build_heat_operator(M);
    ScalarField f = random_complex_field(M, 5);
    ScalarField a = H.apply(H.apply(f, 0.2), 0.3);
    ScalarField b = H.apply(f, 0.5);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-11);

    auto l1 = [&](const ScalarField& g) {
        double s = 0;
        for (int i = 0; i < M.num_vertices(); ++i) s += M.vol[i] * std::abs(g[i]);
        return s;
    };
    for (double t : {0.01, 0.1, 1.0}) {
        ScalarField g = H.apply(f, t);
        CHECK(l1(g) <= l1(f) + 1e-12);
        CHECK(g.cwiseAbs().maxCoeff() <= f.cwiseAbs().maxCoeff() + 1e-12);
    }
    // positivity preservation
    ScalarField pos = f.cwiseAbs().cast<Complex>();
    ScalarField gp = H.apply(pos, 0.2);
    for (int i = 0; i < M.num_vertices(); ++i) CHECK(gp[i].real() >= -1e-13);
}

TEST_CASE("strong continuity as t -> 0") {
    DiscreteManifold M = make_cycle(24);
    HeatOperator H = build_heat_operator(M);
    ScalarField f = random_complex_field(M, 9);
    double prev = 1e300;
    for (double t : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7}) {
        double d = 0;
        ScalarField g = H.apply(f, t);
        for (int i = 0; i < M.num_vertices(); ++i) d += M.vol[i] * std::abs(g[i] - f[i]);
        CHECK(d <= prev + 1e-12);
        prev = d;
    }
    CHECK(prev <= 1e-4);
}

TEST_CASE("heat kernel: positivity, symmetry, weighted row sums, Chapman-Kolmogorov") {
    DiscreteManifold M = graph_from_edges(
        8, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 0}, {1, 5}}, 11);
    HeatOperator H = build_heat_operator(M, HeatStrategy::spectral);
    const int n = M.num_vertices();
    for (double t : {0.05, 0.5}) {
        Eigen::MatrixXd P(n, n);
        for (int x = 0; x < n; ++x) P.row(x) = H.kernel_row(t, x);
        for (int x = 0; x < n; ++x) {
            double rowsum = 0;
            for (int y = 0; y < n; ++y) {
                CHECK(P(x, y) > 0.0);
                CHECK(P(x, y) == doctest::Approx(P(y, x)).epsilon(1e-11));
                rowsum += P(x, y) * M.vol[y];
            }
            CHECK(rowsum == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
    // Chapman-Kolmogorov
    double s = 0.2, t = 0.3;
    for (int x : {0, 3}) {
        Eigen::VectorXd ps = H.kernel_row(s, x);
        for (int y : {1, 6}) {
            Eigen::VectorXd pt = H.kernel_row(t, y);
            double conv = 0;
            for (int z = 0; z < n; ++z) conv += ps[z] * pt[z] * M.vol[z];
            CHECK(conv == doctest::Approx(H.kernel_row(s + t, x)[y]).epsilon(1e-10));
        }
    }
    CHECK_THROWS_AS(H.kernel_row(0.0, 0), ValidationError);
}

TEST_CASE("kernel bound check: flat torus stays bounded, sub-mesh scale flagged") {
    DiscreteManifold M = make_flat_torus(12);
    HeatOperator H = build_heat_operator(M, HeatStrategy::spectral);
    double h2 = (1.0 / 12) * (1.0 / 12);
    // continuum flat value p(t,x,x) t = 1/(2 pi); stay in the small-time
    // regime (for large t the diagonal tends to 1/vol(M) and p t^{m/2} grows)
    KernelBoundReport rep = heat_kernel_bound_check(H, {4 * h2, 0.05, 0.1, 0.3}, 1.0);
    CHECK(rep.within_bound);
    KernelBoundReport rep2 = heat_kernel_bound_check(H, {h2 / 100}, 1.0);
    CHECK(rep2.sub_mesh_scale[0]);
    // kernel localizes: p -> 1/vol_x as t -> 0
    CHECK(H.kernel_row(1e-9, 0)[0] ==
          doctest::Approx(1.0 / M.vol[0]).epsilon(1e-6));
}

TEST_CASE("single-vertex-like limit: kernel diagonal at large t equals 1/total volume") {
    DiscreteManifold M = make_cycle(6);
    HeatOperator H = build_heat_operator(M, HeatStrategy::spectral);
    CHECK(H.kernel_row(200.0, 2)[2] == doctest::Approx(1.0).epsilon(1e-10));  // total vol 1
}
