#include <doctest.h>

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "bvflow/builtins.hpp"
#include "bvflow/curvature.hpp"
#include "bvflow/heat.hpp"
#include "helpers.hpp"

using namespace bvflow;
using namespace bvflow::testing;

namespace {

Eigen::MatrixXcd random_hermitian(int m, std::uint64_t seed) {
    Rng rng(seed, 5);
    Eigen::MatrixXcd A(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) A(i, j) = Complex(rng.next_normal(), rng.next_normal());
    return 0.5 * (A + A.adjoint()).eval();
}

}  // namespace

TEST_CASE("spectral parts: diagonal case and random reconstruction") {
    EndomorphismField R{Eigen::Vector2cd(2.0, -3.0).asDiagonal().toDenseMatrix()};
    auto [P, N] = spectral_parts(R);
    CHECK(std::abs(P[0](0, 0) - Complex(2)) <= 1e-14);
    CHECK(std::abs(P[0](1, 1)) <= 1e-14);
    CHECK(std::abs(N[0](1, 1) - Complex(3)) <= 1e-14);

    EndomorphismField psd{(random_hermitian(3, 1) * random_hermitian(3, 1)).eval()};
    psd[0] = (psd[0] * psd[0].adjoint()).eval();  // PSD
    auto [Pp, Np] = spectral_parts(psd);
    CHECK(Np[0].cwiseAbs().maxCoeff() <= 1e-10);

    for (std::uint64_t s = 0; s < 5; ++s) {
        EndomorphismField F{random_hermitian(3, 10 + s)};
        auto [A, B] = spectral_parts(F);
        CHECK((A[0] - B[0] - F[0]).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((A[0] * B[0]).cwiseAbs().maxCoeff() <= 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ea(A[0]), eb(B[0]);
        CHECK(ea.eigenvalues().minCoeff() >= -1e-12);
        CHECK(eb.eigenvalues().minCoeff() >= -1e-12);
    }

    EndomorphismField bad{Eigen::MatrixXcd::Random(2, 2)};
    CHECK_THROWS_AS(spectral_parts(bad), ValidationError);
}

TEST_CASE("scalar potentials from a decomposition") {
    RicciDecomposition dec;
    dec.R1 = {Eigen::MatrixXcd::Identity(2, 2) * 3.0};
    dec.R2 = {Eigen::Vector2cd(0.0, 3.0).asDiagonal().toDenseMatrix()};
    auto [w1, w2] = scalar_potentials(dec);
    CHECK(w1[0] == doctest::Approx(1.5));
    CHECK(w2[0] == doctest::Approx(1.5));
    for (std::uint64_t s = 0; s < 5; ++s) {
        Eigen::MatrixXcd A = random_hermitian(3, 40 + s);
        auto [P, N] = spectral_parts({A});
        RicciDecomposition d2{{P[0]}, {N[0]}};
        auto [a, b] = scalar_potentials(d2);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
        CHECK(b[0] == doctest::Approx(std::max(0.0, -es.eigenvalues().minCoeff()) / 2)
                          .epsilon(1e-12));
        // operator norm of R2 equals 2 w2
        CHECK(N[0].operatorNorm() == doctest::Approx(2 * b[0]).epsilon(1e-10));
    }
}

TEST_CASE("conformal perturbation: m=2 identity, constants, m=3 hand case") {
    Rng rng(13, 0);
    for (int k = 0; k < 50; ++k) {
        Eigen::MatrixXd B = Eigen::MatrixXd::NullaryExpr(2, 2, [&](int, int) { return rng.next_normal(); });
        Eigen::MatrixXd g = B * B.transpose() + 0.5 * Eigen::MatrixXd::Identity(2, 2);
        Eigen::VectorXd dpsi(2);
        dpsi << rng.next_normal(), rng.next_normal();
        Eigen::MatrixXd h = Eigen::MatrixXd::NullaryExpr(2, 2, [&](int, int) { return rng.next_normal(); });
        h = 0.5 * (h + h.transpose()).eval();
        double lap = rng.next_normal();
        Eigen::MatrixXd T = conformal_perturbation(2, g, dpsi, h, lap);
        CHECK((T + lap * g).cwiseAbs().maxCoeff() <= 1e-14 * (1 + std::abs(lap)));
    }
    // constant psi
    Eigen::MatrixXd g3 = Eigen::MatrixXd::Identity(3, 3);
    Eigen::MatrixXd T0 = conformal_perturbation(3, g3, Eigen::VectorXd::Zero(3),
                                                Eigen::MatrixXd::Zero(3, 3), 0.0);
    CHECK(T0.cwiseAbs().maxCoeff() == 0.0);
    // psi = x1 on Euclidean R^3: T = dpsi dpsi^T - g
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(3);
    e1[0] = 1.0;
    Eigen::MatrixXd T = conformal_perturbation(3, g3, e1, Eigen::MatrixXd::Zero(3, 3), 0.0);
    CHECK((T - (e1 * e1.transpose() - g3)).cwiseAbs().maxCoeff() <= 1e-14);
    // non-SPD metric refused
    CHECK_THROWS_AS(conformal_perturbation(2, -Eigen::MatrixXd::Identity(2, 2),
                                           Eigen::VectorXd::Zero(2),
                                           Eigen::MatrixXd::Zero(2, 2), 0.0),
                    ValidationError);
}

TEST_CASE("edge complex: d1 d0 = 0 on meshes and H0 matches the heat generator") {
    DiscreteManifold M = make_flat_torus(4);
    EdgeComplex ec = build_edge_complex(M);
    Eigen::MatrixXd dd = Eigen::MatrixXd(ec.d1) * Eigen::MatrixXd(ec.d0);
    CHECK(dd.cwiseAbs().maxCoeff() == 0.0);
    CHECK(ec.star1_up.minCoeff() > 0.0);
}

TEST_CASE("one-form semigroup: identity at t=0 and commutation with the scalar flow") {
    for (const DiscreteManifold& M : {make_cycle(12), make_flat_torus(4)}) {
        OneFormHeatOperator op = build_oneform_heat(M);
        HeatOperator H = build_heat_operator(M, HeatStrategy::spectral);
        const EdgeComplex& ec = op.complex();
        Eigen::VectorXcd alpha(ec.edges.size());
        Rng rng(7, 1);
        for (Eigen::Index e = 0; e < alpha.size(); ++e)
            alpha[e] = Complex(rng.next_normal(), rng.next_normal());
        CHECK((op.apply(alpha, 0.0) - alpha).cwiseAbs().maxCoeff() == 0.0);

        ScalarField h = random_complex_field(M, 23);
        for (double t : {0.01, 0.1, 1.0}) {
            Eigen::VectorXcd lhs = op.apply(d0_apply(ec, h), t);
            Eigen::VectorXcd rhs = d0_apply(ec, H.apply(h, t));
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10);
        }
    }
}

TEST_CASE("cycle with constant potential: 1-form flow equals scalar Schrodinger flow on edges") {
    const int N = 8;
    DiscreteManifold M = make_cycle(N);
    double w = 0.7;
    OneFormHeatOperator op = build_oneform_heat(M, Eigen::VectorXd::Constant(N, -w));
    // dense oracle: expm(-t (Delta_edge/2 - w)) via the generator itself is the
    // implementation, so check against the factorized form e^{tw} expm(-t Delta/2)
    OneFormHeatOperator op0 = build_oneform_heat(M);
    Eigen::VectorXcd alpha(N);
    Rng rng(9, 2);
    for (int e = 0; e < N; ++e) alpha[e] = Complex(rng.next_normal(), rng.next_normal());
    double t = 0.4;
    Eigen::VectorXcd a = op.apply(alpha, t);
    Eigen::VectorXcd b = std::exp(w * t) * op0.apply(alpha, t);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-10 * (1 + b.cwiseAbs().maxCoeff()));
}

TEST_CASE("domination: zero potential on a small cycle, no violations") {
    DiscreteManifold M = make_cycle(6);
    OneFormHeatOperator op = build_oneform_heat(M);
    Eigen::VectorXcd alpha(6);
    Rng rng(11, 3);
    for (int e = 0; e < 6; ++e) alpha[e] = Complex(rng.next_normal(), rng.next_normal());
    MonteCarloParams mc;
    mc.samples = 4000;
    mc.seed = 5;
    DominationReport rep =
        domination_check(op, Eigen::VectorXd::Zero(6), alpha, 0.2, mc);
    CHECK(rep.violations == 0);
    // alpha = 0: both sides vanish
    DominationReport rep0 =
        domination_check(op, Eigen::VectorXd::Zero(6), Eigen::VectorXcd::Zero(6), 0.2, mc);
    for (const auto& s : rep0.sites) {
        CHECK(s.lhs == 0.0);
        CHECK(s.majorant == 0.0);
    }
}

TEST_CASE("domination: constant potential pulls out as a factor") {
    DiscreteManifold M = make_cycle(6);
    double c = 0.5;
    OneFormHeatOperator op = build_oneform_heat(M, Eigen::VectorXd::Constant(6, -c));
    Eigen::VectorXcd alpha(6);
    Rng rng(12, 4);
    for (int e = 0; e < 6; ++e) alpha[e] = Complex(rng.next_normal(), rng.next_normal());
    MonteCarloParams mc;
    mc.samples = 4000;
    mc.seed = 6;
    DominationReport rep =
        domination_check(op, Eigen::VectorXd::Constant(6, c), alpha, 0.5, mc);
    CHECK(rep.violations == 0);
}
