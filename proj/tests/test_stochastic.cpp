#include <doctest.h>

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "bvflow/builtins.hpp"
#include "bvflow/stochastic.hpp"
#include "helpers.hpp"

using namespace bvflow;
using namespace bvflow::testing;

TEST_CASE("walk generator matches -H") {
    DiscreteManifold M = graph_from_edges(
        6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}, {1, 4}}, 17);
    HeatOperator H = build_heat_operator(M, HeatStrategy::spectral);
    WalkModel W = build_walk(M, H);
    Eigen::MatrixXd G = W.dense_generator();
    Eigen::MatrixXd mH = -H.dense_generator();
    CHECK((G - mH).cwiseAbs().maxCoeff() <= 1e-12);
    // conservative chain: zero kill rate, rows sum to zero
    CHECK(W.kill_rate.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(G.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("2-vertex walk: jump rate one half") {
    DiscreteManifold M = two_vertex_graph();
    HeatOperator H = build_heat_operator(M);
    WalkModel W = build_walk(M, H);
    CHECK(W.total_rate[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(W.total_rate[1] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("cycle rates are N^2/2 per neighbor") {
    const int N = 10;
    DiscreteManifold M = make_cycle(N);
    HeatOperator H = build_heat_operator(M);
    WalkModel W = build_walk(M, H);
    for (int x = 0; x < N; ++x) {
        CHECK(W.rates[x].size() == 2);
        for (auto& [y, r] : W.rates[x])
            CHECK(r == doctest::Approx(N * N / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("occupation distribution matches the heat kernel") {
    DiscreteManifold M = make_cycle(8);
    HeatOperator H = build_heat_operator(M);
    WalkModel W = build_walk(M, H);
    MonteCarloParams mc;
    mc.samples = 200000;
    mc.seed = 3;
    double t = 0.02;
    Eigen::VectorXd occ = occupation_distribution(W, t, 0, mc);
    Eigen::VectorXd row = H.kernel_row(t, 0);
    for (int y = 0; y < 8; ++y) {
        double p = row[y] * M.vol[y];  // P{B_t = y}
        CHECK(occ[y] == doctest::Approx(p).epsilon(0.05).scale(0.01));
    }
    CHECK(occ.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Feynman-Kac with a constant modulus is exp(ct)") {
    DiscreteManifold M = make_cycle(6);
    HeatOperator H = build_heat_operator(M);
    WalkModel W = build_walk(M, H);
    MonteCarloParams mc;
    mc.samples = 500;
    mc.seed = 4;
    for (double c : {0.0, 0.7, -1.3}) {
        FKResult r = feynman_kac(W, Eigen::VectorXd::Constant(6, c), 0.5, 2, mc);
        CHECK(r.mean == doctest::Approx(std::exp(std::abs(c) * 0.5)).epsilon(1e-12));
        // the path integral is constant; only summation rounding remains
        CHECK(r.std_error <= 1e-6);
        CHECK(r.survival == 1.0);
    }
}

TEST_CASE("Feynman-Kac against the dense Schrodinger semigroup oracle") {
    DiscreteManifold M = graph_from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}}, 33);
    HeatOperator H = build_heat_operator(M);
    WalkModel W = build_walk(M, H);
    Eigen::VectorXd v(5);
    v << 0.4, 0.0, 1.1, 0.2, 0.6;
    double t = 0.3;
    // oracle: u(t) = expm(t(G + diag(v))) 1
    Eigen::MatrixXd A = W.dense_generator();
    A += Eigen::MatrixXd(v.asDiagonal());
    Eigen::VectorXd u = (t * A).exp() * Eigen::VectorXd::Ones(5);
    MonteCarloParams mc;
    mc.samples = 400000;
    mc.seed = 9;
    mc.threads = 4;
    for (int x : {0, 2}) {
        FKResult r = feynman_kac(W, v, t, x, mc);
        CHECK(r.ci_lo <= u[x]);
        CHECK(u[x] <= r.ci_hi);
        CHECK(r.mean == doctest::Approx(u[x]).epsilon(0.01));
    }
}

TEST_CASE("Feynman-Kac determinism and thread invariance") {
    DiscreteManifold M = make_cycle(6);
    HeatOperator H = build_heat_operator(M);
    WalkModel W = build_walk(M, H);
    Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(6, 0.0, 1.0);
    MonteCarloParams a, b;
    a.samples = b.samples = 20000;
    a.seed = b.seed = 11;
    a.threads = 1;
    b.threads = 4;
    FKResult ra = feynman_kac(W, v, 0.4, 1, a);
    FKResult rb = feynman_kac(W, v, 0.4, 1, b);
    CHECK(ra.mean == rb.mean);
    CHECK(ra.std_error == rb.std_error);
}

TEST_CASE("killing: cemetery vertex reproduces the Dirichlet kernel") {
    DiscreteManifold M = make_cycle(8);
    HeatOperator H = build_heat_operator(M);
    Killing kill;
    kill.cemetery = {4};
    WalkModel W = build_walk(M, H, kill);
    // oracle: restrict the generator to the surviving states
    Eigen::MatrixXd G = -H.dense_generator();
    std::vector<int> keep;
    for (int i = 0; i < 8; ++i)
        if (i != 4) keep.push_back(i);
    Eigen::MatrixXd Gd(7, 7);
    for (int a = 0; a < 7; ++a)
        for (int b = 0; b < 7; ++b) Gd(a, b) = G(keep[a], keep[b]);
    Eigen::VectorXd surv = (0.05 * Gd).exp() * Eigen::VectorXd::Ones(7);
    MonteCarloParams mc;
    mc.samples = 300000;
    mc.seed = 21;
    mc.threads = 4;
    FKResult r = feynman_kac(W, Eigen::VectorXd::Zero(8), 0.05, 0, mc);
    CHECK(r.mean == doctest::Approx(surv[0]).epsilon(0.01));
    CHECK(r.survival < 1.0);
}

TEST_CASE("explicit kill rate matches a negative potential oracle") {
    DiscreteManifold M = make_cycle(6);
    HeatOperator H = build_heat_operator(M);
    Killing kill;
    kill.rate = Eigen::VectorXd::Constant(6, 2.0);
    WalkModel W = build_walk(M, H, kill);
    MonteCarloParams mc;
    mc.samples = 200000;
    mc.seed = 5;
    mc.threads = 4;
    // constant kill rate c: survival weight is exactly e^{-ct} path-wise only in
    // expectation; with exponential killing the survivor fraction ~ e^{-ct}
    FKResult r = feynman_kac(W, Eigen::VectorXd::Zero(6), 0.5, 0, mc);
    CHECK(r.mean == doctest::Approx(std::exp(-1.0)).epsilon(0.02));
}

TEST_CASE("frozen-after-death mode keeps killed paths' weight") {
    DiscreteManifold M = make_cycle(6);
    HeatOperator H = build_heat_operator(M);
    Killing kill;
    kill.rate = Eigen::VectorXd::Constant(6, 3.0);
    WalkModel W = build_walk(M, H, kill);
    MonteCarloParams mc;
    mc.samples = 50000;
    mc.seed = 6;
    FKOptions frozen;
    frozen.frozen_after_death = true;
    FKResult r = feynman_kac(W, Eigen::VectorXd::Zero(6), 1.0, 0, mc, frozen);
    // with v = 0 every path carries weight 1 regardless of killing
    CHECK(r.mean == doctest::Approx(1.0).epsilon(1e-12));
    FKResult rd = feynman_kac(W, Eigen::VectorXd::Zero(6), 1.0, 0, mc);
    CHECK(rd.mean < 0.2);
}

TEST_CASE("terminal weight reduces to the occupation average") {
    DiscreteManifold M = make_cycle(6);
    HeatOperator H = build_heat_operator(M);
    WalkModel W = build_walk(M, H);
    MonteCarloParams mc;
    mc.samples = 100000;
    mc.seed = 7;
    Eigen::VectorXd g = Eigen::VectorXd::LinSpaced(6, 0.0, 2.0);
    FKOptions opt;
    opt.terminal = g;
    FKResult r = feynman_kac(W, Eigen::VectorXd::Zero(6), 0.1, 0, mc, opt);
    Eigen::VectorXd occ = occupation_distribution(W, 0.1, 0, mc);
    CHECK(r.mean == doctest::Approx(occ.dot(g)).epsilon(0.02));
}

TEST_CASE("Kato modulus: constant w gives D = c t exactly") {
    DiscreteManifold M = make_cycle(12);
    HeatOperator H = build_heat_operator(M, HeatStrategy::spectral);
    double c = 0.8;
    std::vector<double> grid{0.01, 0.1, 0.5, 1.0};
    KatoReport rep = kato_modulus(M, H, Eigen::VectorXd::Constant(12, c), grid);
    for (size_t k = 0; k < grid.size(); ++k)
        CHECK(rep.D[k] == doctest::Approx(c * grid[k]).epsilon(1e-10));
    CHECK(rep.decay_exponent == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("Kato modulus: monotone in t and positively homogeneous in w") {
    DiscreteManifold M = graph_from_edges(
        7, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 0}}, 13);
    HeatOperator H = build_heat_operator(M, HeatStrategy::spectral);
    Eigen::VectorXd w(7);
    w << 1.0, 0.0, 0.3, -0.5, 2.0, 0.0, 0.1;  // sign is irrelevant: |w| enters
    std::vector<double> grid{0.05, 0.1, 0.2, 0.4, 0.8};
    KatoReport rep = kato_modulus(M, H, w, grid);
    for (size_t k = 1; k < grid.size(); ++k) CHECK(rep.D[k] >= rep.D[k - 1] - 1e-13);
    KatoReport rep3 = kato_modulus(M, H, (3.0 * w).eval(), grid);
    for (size_t k = 0; k < grid.size(); ++k)
        CHECK(rep3.D[k] == doctest::Approx(3 * rep.D[k]).epsilon(1e-11));
    KatoReport repn = kato_modulus(M, H, (-w).eval(), grid);
    for (size_t k = 0; k < grid.size(); ++k)
        CHECK(repn.D[k] == doctest::Approx(rep.D[k]).epsilon(1e-12));
}

TEST_CASE("Kato modulus against a direct quadrature oracle") {
    DiscreteManifold M = graph_from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, 29);
    HeatOperator H = build_heat_operator(M, HeatStrategy::spectral);
    Eigen::VectorXd w(5);
    w << 0.2, 1.0, 0.0, 0.4, 0.7;
    double t = 0.37;
    // Simpson quadrature of sum_y p(s,x,y)|w|_y vol_y over [0, t]
    auto integrand = [&](double s, int x) {
        if (s <= 0) return std::abs(w[x]);  // p(0+) localizes
        Eigen::VectorXd row = H.kernel_row(s, x);
        double acc = 0;
        for (int y = 0; y < 5; ++y) acc += row[y] * std::abs(w[y]) * M.vol[y];
        return acc;
    };
    const int S = 4000;
    double best = 0;
    for (int x = 0; x < 5; ++x) {
        double acc = 0, hstep = t / S;
        for (int k = 0; k < S; ++k) {
            double a = k * hstep, b = a + hstep;
            acc += hstep / 6 * (integrand(a, x) + 4 * integrand((a + b) / 2, x) + integrand(b, x));
        }
        best = std::max(best, acc);
    }
    KatoReport rep = kato_modulus(M, H, w, {t});
    CHECK(rep.D[0] == doctest::Approx(best).epsilon(1e-8));
}

TEST_CASE("Khas'minskii certificate with a constant modulus") {
    DiscreteManifold M = make_cycle(8);
    HeatOperator H = build_heat_operator(M);
    WalkModel W = build_walk(M, H);
    double c = 1.0, delta = 2.0;  // threshold 1 - 1/delta = 1/2, need cs < 1/2
    std::vector<double> s_grid{0.05, 0.1, 0.2, 0.3, 0.45};
    MonteCarloParams mc;
    mc.samples = 40000;
    mc.seed = 31;
    mc.threads = 4;
    KasminskiiCertificate cert = kasminskii_certify(
        M, W, H, Eigen::VectorXd::Constant(8, c), delta, s_grid, {0.5, 1.0}, mc);
    REQUIRE(!cert.refused);
    CHECK(cert.s == doctest::Approx(0.45));
    CHECK(cert.D_at_s == doctest::Approx(0.45).epsilon(1e-10));
    CHECK(cert.C == doctest::Approx(std::log(1.0 / (1 - 0.45)) / 0.45).epsilon(1e-9));
    // E e^{ct} = e^{ct} exactly, and delta e^{tC} >= e^{ct} since C > c here
    for (auto& tt : cert.tests) CHECK(tt.pass);
    CHECK(cert.dtilde_pass);
    CHECK(cert.valid);
}

TEST_CASE("Khas'minskii refuses when the modulus is too large") {
    DiscreteManifold M = make_cycle(8);
    HeatOperator H = build_heat_operator(M);
    WalkModel W = build_walk(M, H);
    MonteCarloParams mc;
    mc.samples = 1000;
    mc.seed = 1;
    KasminskiiCertificate cert =
        kasminskii_certify(M, W, H, Eigen::VectorXd::Constant(8, 50.0), 2.0,
                           {0.05, 0.1, 0.2}, {0.5}, mc);
    CHECK(cert.refused);
    CHECK(!cert.valid);
}

TEST_CASE("negative off-diagonal rates are rejected") {
    Eigen::MatrixXd H(2, 2);
    H << 1.0, 1.0, 1.0, 1.0;  // off-diagonal of -H would be -1
    CHECK_THROWS_AS(walk_from_operator(H), ValidationError);
}
