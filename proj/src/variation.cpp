#include "bvflow/variation.hpp"

#include <cmath>

namespace bvflow {

VariationResult variation_gradient_l1(const DiscreteManifold& M, const ScalarField& f) {
    OneForm df = exterior_derivative(M, f);
    Eigen::VectorXd norms = site_norm(M, df);
    VariationResult r;
    r.method = VariationMethod::gradient_l1;
    for (int s = 0; s < M.num_sites(); ++s) r.value += M.site_volume(s) * norms[s];
    return r;
}

namespace {

// project each site value onto its unit ball |.|_s <= 1
void project_dual_ball(const DiscreteManifold& M, OneForm& a) {
    if (M.mode == Mode::graph) {
        for (size_t s = 0; s < M.edges.size(); ++s) {
            double cap = M.edges[s].len;  // |a_e| / len <= 1
            double n = std::abs(a.edge[s]);
            if (n > cap) a.edge[s] *= cap / n;
        }
    } else {
        for (Eigen::Index s = 0; s < a.tri.cols(); ++s) {
            double n = a.tri.col(s).norm();
            if (n > 1.0) a.tri.col(s) /= n;
        }
    }
}

}  // namespace

VariationResult variation_dual(const DiscreteManifold& M, const ScalarField& f,
                               DualSolverParams params) {
    OneForm df = exterior_derivative(M, f);
    // primal value is a certified upper bound by site-wise Cauchy-Schwarz
    double primal = 0.0;
    {
        Eigen::VectorXd norms = site_norm(M, df);
        for (int s = 0; s < M.num_sites(); ++s) primal += M.site_volume(s) * norms[s];
    }

    OneForm a = zero_one_form(M);
    double step = 1.0;
    double best = 0.0;
    VariationResult r;
    r.method = VariationMethod::dual;
    int it = 0;
    for (; it < params.max_iterations; ++it) {
        // ascent direction: gradient of Re<df, a>_sites is df itself
        if (M.mode == Mode::graph)
            a.edge += step * df.edge;
        else
            a.tri += step * df.tri;
        project_dual_ball(M, a);
        double val = std::abs(inner_sites(M, df, a));
        if (val > best) best = val;
        double gap = primal - best;
        if (gap <= params.gap_tol * (1.0 + best)) break;
        // the objective is linear, so successive gradients coincide; grow the
        // step until the projection saturates every active site
        step *= 2.0;
        if (step > 1e12) step = 1e12;
    }
    r.iterations = it + 1;
    r.value = best;
    r.duality_gap = primal - best;
    r.converged = r.duality_gap <= params.gap_tol * (1.0 + best) * 10;
    return r;
}

std::vector<double> default_t_schedule(const DiscreteManifold& M, int points, double t0) {
    if (t0 <= 0) {
        // mesh diameter proxy: total extent of the structure
        double diam;
        if (M.mode == Mode::graph) {
            diam = 0;
            for (const Edge& e : M.edges) diam += e.len;
            diam /= 2.0;  // half the total length as a crude diameter
        } else {
            double area = 0;
            for (const Triangle& t : M.tris) area += t.area;
            diam = std::sqrt(area);
        }
        t0 = diam * diam / 16.0;
    }
    std::vector<double> sched(points);
    for (int k = 0; k < points; ++k) sched[k] = t0 * std::pow(2.0, -k);
    return sched;
}

HeatflowCurve variation_heatflow(const DiscreteManifold& M, const HeatOperator& Hop,
                                 const ScalarField& f, const std::vector<double>& t_schedule) {
    if (t_schedule.empty()) throw ValidationError("heatflow: empty schedule");
    for (size_t i = 0; i + 1 < t_schedule.size(); ++i)
        if (!(t_schedule[i] > t_schedule[i + 1]))
            throw ValidationError("heatflow: schedule must be strictly decreasing");
    if (!(t_schedule.back() > 0)) throw ValidationError("heatflow: schedule must be positive");

    HeatflowCurve c;
    c.t = t_schedule;
    c.V.resize(t_schedule.size());
    for (size_t i = 0; i < t_schedule.size(); ++i) {
        ScalarField g = Hop.apply(f, t_schedule[i]);
        c.V[i] = variation_gradient_l1(M, g).value;
    }
    c.limit_last = c.V.back();
    if (c.V.size() >= 2) {
        size_t k = c.V.size() - 1;
        double rho = c.t[k] / c.t[k - 1];
        c.limit_richardson = (c.V[k] - rho * c.V[k - 1]) / (1.0 - rho);
    } else {
        c.limit_richardson = c.limit_last;
    }
    return c;
}

VectorMeasure polar_decompose(const DiscreteManifold& M, const ScalarField& f) {
    OneForm df = exterior_derivative(M, f);
    Eigen::VectorXd norms = site_norm(M, df);
    VectorMeasure nu;
    nu.mass.resize(M.num_sites());
    nu.sigma = zero_one_form(M);
    for (int s = 0; s < M.num_sites(); ++s) {
        nu.mass[s] = M.site_volume(s) * norms[s];
        if (norms[s] > 0) {
            if (M.mode == Mode::graph)
                nu.sigma.edge[s] = df.edge[s] / norms[s];
            else
                nu.sigma.tri.col(s) = df.tri.col(s) / norms[s];
        }
    }
    return nu;
}

Complex measure_pair_apply(const DiscreteManifold& M, const VectorMeasure& nu,
                           const OneForm& alpha) {
    if (alpha.mode != M.mode || alpha.sites() != M.num_sites() ||
        nu.mass.size() != M.num_sites())
        throw ValidationError("measure pairing: site mismatch");
    Complex r = 0;
    for (int s = 0; s < M.num_sites(); ++s)
        r += fiber_pairing(M, s, nu.sigma, alpha) * nu.mass[s];
    return r;
}

double pointwise_variation_1d(const std::vector<Complex>& samples) {
    if (samples.size() < 2)
        throw ValidationError("pointwise variation needs at least 2 samples");
    double v = 0;
    for (size_t j = 0; j + 1 < samples.size(); ++j) v += std::abs(samples[j + 1] - samples[j]);
    return v;
}

double bv_norm(const DiscreteManifold& M, const ScalarField& f) {
    double l1 = 0;
    for (int x = 0; x < M.num_vertices(); ++x) l1 += M.vol[x] * std::abs(f[x]);
    return l1 + variation_gradient_l1(M, f).value;
}

DensityProfile density_profile(const std::vector<const DiscreteManifold*>& family,
                               const std::vector<ScalarField>& fields) {
    if (family.empty() || family.size() != fields.size())
        throw ValidationError("density profile: empty or mismatched family");
    DensityProfile p;
    for (size_t k = 0; k < family.size(); ++k) {
        const DiscreteManifold& M = *family[k];
        VectorMeasure nu = polar_decompose(M, fields[k]);
        double dmax = 0, hmean = 0;
        for (int s = 0; s < M.num_sites(); ++s) {
            dmax = std::max(dmax, nu.mass[s] / M.site_volume(s));
            hmean += M.mode == Mode::graph ? M.edges[s].len : std::sqrt(M.tris[s].area);
        }
        p.max_density.push_back(dmax);
        p.h.push_back(hmean / M.num_sites());
    }
    return p;
}

}  // namespace bvflow
