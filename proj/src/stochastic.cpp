#include "bvflow/stochastic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>

#include "bvflow/rng.hpp"

namespace bvflow {

Eigen::MatrixXd WalkModel::dense_generator() const {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    for (int x = 0; x < n; ++x) {
        if (cemetery[x]) continue;
        for (auto [y, q] : rates[x]) G(x, y) += q;
        G(x, x) = -(total_rate[x] + kill_rate[x]);
    }
    return G;
}

WalkModel walk_from_operator(const Eigen::MatrixXd& H, const Killing& killing) {
    const int n = static_cast<int>(H.rows());
    WalkModel W;
    W.n = n;
    W.rates.assign(n, {});
    W.total_rate = Eigen::VectorXd::Zero(n);
    W.kill_rate = Eigen::VectorXd::Zero(n);
    W.cemetery.assign(n, 0);
    for (int z : killing.cemetery) {
        if (z < 0 || z >= n) throw ValidationError("cemetery vertex out of range");
        W.cemetery[z] = 1;
    }
    const double tol = 1e-9 * (1.0 + H.cwiseAbs().maxCoeff());
    for (int x = 0; x < n; ++x) {
        if (W.cemetery[x]) continue;
        double rowsum = 0;
        for (int y = 0; y < n; ++y) {
            if (y == x) continue;
            double q = -H(x, y);
            if (q < -tol)
                throw ValidationError(
                    "negative jump rate: generator is not sub-Markov (non-Delaunay mesh?); "
                    "use graph mode or intrinsic-Delaunay preprocessing");
            if (q > 0) {
                W.rates[x].emplace_back(y, q);
                W.total_rate[x] += q;
            }
            rowsum += q;
        }
        // positive diagonal excess of H over the jump rates is killing
        double deficiency = H(x, x) - rowsum;
        if (deficiency > tol * 10) W.kill_rate[x] += deficiency;
        if (killing.rate.size() == n) W.kill_rate[x] += killing.rate[x];
    }
    return W;
}

WalkModel build_walk(const DiscreteManifold& M, const HeatOperator& Hop, const Killing& killing) {
    return walk_from_operator(Hop.dense_generator(), killing);
}

namespace {

struct PathOutcome {
    double log_weight = 0.0;  // int |v| ds, accumulated in log space
    int end_state = -1;
    bool survived = true;
};

PathOutcome sample_path(const WalkModel& W, const Eigen::VectorXd& v, double t, int start,
                        Rng& rng) {
    PathOutcome out;
    int x = start;
    double s = 0.0;
    if (W.cemetery[x]) {
        out.survived = false;
        return out;
    }
    while (true) {
        double lam = W.total_rate[x] + W.kill_rate[x];
        double hold = lam > 0 ? rng.next_exponential() / lam : t - s + 1.0;
        if (s + hold >= t) {
            out.log_weight += std::abs(v[x]) * (t - s);
            out.end_state = x;
            return out;
        }
        out.log_weight += std::abs(v[x]) * hold;
        s += hold;
        // kill vs jump
        double u = rng.next_double() * lam;
        if (u < W.kill_rate[x]) {
            out.survived = false;
            return out;
        }
        u -= W.kill_rate[x];
        int target = -1;
        for (auto [y, q] : W.rates[x]) {
            if (u < q) {
                target = y;
                break;
            }
            u -= q;
        }
        if (target < 0) target = W.rates[x].back().first;
        x = target;
        if (W.cemetery[x]) {
            out.survived = false;
            return out;
        }
    }
}

}  // namespace

FKResult feynman_kac(const WalkModel& W, const Eigen::VectorXd& v, double t, int start,
                     const MonteCarloParams& mc, const FKOptions& opts) {
    if (mc.samples < 1) throw ValidationError("feynman_kac: sample budget must be >= 1");
    if (v.size() != W.n) throw ValidationError("feynman_kac: potential size mismatch");
    if (opts.terminal.size() != 0 && opts.terminal.size() != W.n)
        throw ValidationError("feynman_kac: terminal field size mismatch");
    if (start < 0 || start >= W.n) throw ValidationError("feynman_kac: bad start state");

    // fixed-size blocks reduced in block order keep the result bit-identical
    // across thread counts
    const std::int64_t n = mc.samples;
    const std::int64_t block = 4096;
    const std::int64_t nblocks = (n + block - 1) / block;
    struct Partial {
        double sum = 0, sumsq = 0, surv = 0;
        bool overflow = false;
    };
    std::vector<Partial> partial(nblocks);
    std::atomic<std::int64_t> next{0};
    auto worker = [&]() {
        for (std::int64_t b = next.fetch_add(1); b < nblocks; b = next.fetch_add(1)) {
            Partial& p = partial[b];
            const std::int64_t hi = std::min(n, (b + 1) * block);
            for (std::int64_t i = b * block; i < hi; ++i) {
                Rng rng(mc.seed,
                        (static_cast<std::uint64_t>(start) << 40) ^ static_cast<std::uint64_t>(i));
                PathOutcome path = sample_path(W, v, t, start, rng);
                double val = 0.0;
                if (path.survived) {
                    if (path.log_weight > 700.0) p.overflow = true;
                    val = std::exp(std::min(path.log_weight, 700.0));
                    if (opts.terminal.size()) val *= opts.terminal[path.end_state];
                    p.surv += 1.0;
                } else if (opts.frozen_after_death && opts.terminal.size() == 0) {
                    if (path.log_weight > 700.0) p.overflow = true;
                    val = std::exp(std::min(path.log_weight, 700.0));
                }
                p.sum += val;
                p.sumsq += val * val;
            }
        }
    };

    const int threads = std::max(1, mc.threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::future<void>> futs;
        for (int k = 0; k < threads; ++k)
            futs.push_back(std::async(std::launch::async, worker));
        for (auto& f : futs) f.get();
    }
    double sum = 0, sumsq = 0, surv = 0;
    bool overflow = false;
    for (const Partial& p : partial) {
        sum += p.sum;
        sumsq += p.sumsq;
        surv += p.surv;
        overflow = overflow || p.overflow;
    }

    FKResult r;
    r.mean = sum / n;
    double var = std::max(0.0, sumsq / n - r.mean * r.mean);
    r.std_error = std::sqrt(var / n);
    r.ci_lo = r.mean - mc.confidence_z * r.std_error;
    r.ci_hi = r.mean + mc.confidence_z * r.std_error;
    r.survival = surv / n;
    r.overflow = overflow;
    return r;
}

Eigen::VectorXd occupation_distribution(const WalkModel& W, double t, int start,
                                        const MonteCarloParams& mc) {
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(W.n);
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(W.n);
    for (std::int64_t i = 0; i < mc.samples; ++i) {
        Rng rng(mc.seed, (static_cast<std::uint64_t>(start) << 40) ^ static_cast<std::uint64_t>(i));
        PathOutcome p = sample_path(W, zero, t, start, rng);
        if (p.survived) counts[p.end_state] += 1.0;
    }
    return counts / static_cast<double>(mc.samples);
}

KatoReport kato_modulus(const DiscreteManifold& M, const HeatOperator& Hop,
                        const Eigen::VectorXd& w, const std::vector<double>& t_grid) {
    if (!Hop.is_spectral())
        throw SolverError("kato_modulus requires a spectral heat operator");
    if (w.size() != M.num_vertices()) throw ValidationError("kato_modulus: field size mismatch");
    Eigen::VectorXd wabs = w.cwiseAbs();
    KatoReport rep;
    for (double t : t_grid) {
        Eigen::VectorXd Dx = Hop.integrated_kernel_apply(t, wabs);
        int arg = 0;
        double d = Dx.maxCoeff(&arg);
        rep.t.push_back(t);
        rep.D.push_back(d);
        rep.argmax_x.push_back(arg);
    }
    // decay exponent: slope of log D vs log t over positive entries
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (size_t i = 0; i < rep.t.size(); ++i) {
        if (rep.D[i] <= 0 || rep.t[i] <= 0) continue;
        double X = std::log(rep.t[i]), Y = std::log(rep.D[i]);
        sx += X;
        sy += Y;
        sxx += X * X;
        sxy += X * Y;
        ++cnt;
    }
    if (cnt >= 2 && std::abs(cnt * sxx - sx * sx) > 1e-300)
        rep.decay_exponent = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    return rep;
}

KasminskiiCertificate kasminskii_certify(const DiscreteManifold& M, const WalkModel& W,
                                         const HeatOperator& Hop, const Eigen::VectorXd& v,
                                         double delta, const std::vector<double>& s_grid,
                                         const std::vector<double>& t_tests,
                                         const MonteCarloParams& mc) {
    if (!(delta > 1.0)) throw ValidationError("kasminskii: delta must be > 1");
    if (v.minCoeff() < 0) throw ValidationError("kasminskii: potential must be >= 0");
    KasminskiiCertificate cert;
    cert.delta = delta;
    cert.smallness_threshold = 1.0 - 1.0 / delta;

    KatoReport kato = kato_modulus(M, Hop, v, s_grid);
    int best = -1;
    for (size_t i = 0; i < kato.t.size(); ++i) {
        if (kato.D[i] < cert.smallness_threshold &&
            (best < 0 || kato.t[i] > kato.t[best]))
            best = static_cast<int>(i);
    }
    if (best < 0) {
        cert.refused = true;
        return cert;
    }
    cert.s = kato.t[best];
    cert.D_at_s = kato.D[best];
    cert.C = std::log(1.0 / (1.0 - cert.D_at_s)) / cert.s;

    auto sup_fk = [&](double t, bool frozen) {
        double sup_mean = 0, sup_hi = 0;
        FKOptions opts;
        opts.frozen_after_death = frozen;
        for (int x = 0; x < W.n; ++x) {
            if (W.cemetery[x]) continue;
            FKResult r = feynman_kac(W, v, t, x, mc, opts);
            if (r.mean > sup_mean) sup_mean = r.mean;
            if (r.ci_hi > sup_hi) sup_hi = r.ci_hi;
        }
        return std::pair<double, double>(sup_mean, sup_hi);
    };

    cert.valid = true;
    for (double t : t_tests) {
        KasminskiiTest kt;
        kt.t = t;
        auto [mean, hi] = sup_fk(t, false);
        kt.sup_estimate = mean;
        kt.sup_upper_ci = hi;
        kt.bound = delta * std::exp(t * cert.C);
        kt.pass = kt.sup_upper_ci <= kt.bound;
        cert.valid = cert.valid && kt.pass;
        cert.tests.push_back(kt);
    }

    // direct Khas'minskii inequality at s via the hat-extended process
    auto [dm, dhi] = sup_fk(cert.s, true);
    cert.dtilde_estimate = dm;
    cert.dtilde_upper_ci = dhi;
    cert.dtilde_bound = 1.0 / (1.0 - cert.D_at_s);
    cert.dtilde_pass = cert.dtilde_upper_ci <= cert.dtilde_bound;
    cert.valid = cert.valid && cert.dtilde_pass;
    return cert;
}

}  // namespace bvflow
