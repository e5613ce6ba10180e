#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bvflow/heat.hpp"
#include "bvflow/manifold.hpp"

namespace bvflow {

struct Killing {
    std::vector<int> cemetery;     // absorbing vertices: entering one ends the path
    Eigen::VectorXd rate;          // optional per-vertex kill rate (may be empty)
};

// Exact continuous-time Markov chain whose generator matches -H (plus
// killing): exponential holding times, jump rates from the off-diagonal of H.
struct WalkModel {
    int n = 0;
    std::vector<std::vector<std::pair<int, double>>> rates;  // per state: (target, rate)
    Eigen::VectorXd total_rate;
    Eigen::VectorXd kill_rate;   // explicit kill intensity (includes rate deficiency)
    std::vector<char> cemetery;  // absorbing states

    // dense generator of the sub-Markov semigroup, for small-instance oracles:
    // G[x][y] = q(x->y), G[x][x] = -(total + kill)
    Eigen::MatrixXd dense_generator() const;
};

WalkModel build_walk(const DiscreteManifold& M, const HeatOperator& Hop,
                     const Killing& killing = {});

// Generic chain from an H-like matrix (off-diagonals of -H are the rates;
// positive row sums of H become kill intensity).
WalkModel walk_from_operator(const Eigen::MatrixXd& H, const Killing& killing = {});

struct MonteCarloParams {
    std::int64_t samples = 100000;
    std::uint64_t seed = 1;
    double confidence_z = 2.5758293035489004;  // two-sided 99%
    int threads = 1;
};

struct FKOptions {
    // terminal weight g(B_t); empty means g == 1
    Eigen::VectorXd terminal;
    // Alexandroff mode: killed paths keep their accumulated exponential
    // (hat-extension with w(infinity)=0) instead of contributing 0
    bool frozen_after_death = false;
};

struct FKResult {
    double mean = 0.0;
    double std_error = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    double survival = 1.0;  // fraction of paths with t < zeta
    bool overflow = false;  // some path integral exceeded the float range
};

// MC estimate of E_x[ e^{int_0^t |v(B_s)| ds} g(B_t) 1_{t<zeta} ] with exact
// path integrals. Deterministic given (seed, start, sample index).
FKResult feynman_kac(const WalkModel& W, const Eigen::VectorXd& v, double t, int start,
                     const MonteCarloParams& mc, const FKOptions& opts = {});

// MC occupation distribution P{B_t = y, t < zeta} per state.
Eigen::VectorXd occupation_distribution(const WalkModel& W, double t, int start,
                                        const MonteCarloParams& mc);

struct KatoReport {
    std::vector<double> t;
    std::vector<double> D;       // D(w,t) = sup_x int_0^t sum_y p(s,x,y)|w(y)| vol_y ds
    std::vector<int> argmax_x;   // attaining vertex per grid point
    double decay_exponent = 0.0; // least-squares slope of log D vs log t
};

KatoReport kato_modulus(const DiscreteManifold& M, const HeatOperator& Hop,
                        const Eigen::VectorXd& w, const std::vector<double>& t_grid);

struct KasminskiiTest {
    double t = 0;
    double sup_estimate = 0;   // max over start vertices of the FK mean
    double sup_upper_ci = 0;
    double bound = 0;          // delta * e^{t C}
    bool pass = false;
};

struct KasminskiiCertificate {
    bool refused = false;        // no grid s with D(v,s) < 1 - 1/delta
    double smallness_threshold = 0.0;  // 1 - 1/delta
    double s = 0.0;              // chosen time with D(v,s) below threshold
    double D_at_s = 0.0;
    double C = 0.0;              // log(1/(1-D)) / s
    double delta = 0.0;
    std::vector<KasminskiiTest> tests;
    // direct Khas'minskii inequality check at s: MC D-tilde vs 1/(1-D)
    double dtilde_estimate = 0.0;
    double dtilde_upper_ci = 0.0;
    double dtilde_bound = 0.0;
    bool dtilde_pass = false;
    bool valid = false;
};

KasminskiiCertificate kasminskii_certify(const DiscreteManifold& M, const WalkModel& W,
                                         const HeatOperator& Hop, const Eigen::VectorXd& v,
                                         double delta, const std::vector<double>& s_grid,
                                         const std::vector<double>& t_tests,
                                         const MonteCarloParams& mc);

}  // namespace bvflow
