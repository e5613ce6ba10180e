#pragma once

#include <vector>

#include "bvflow/heat.hpp"
#include "bvflow/manifold.hpp"

namespace bvflow {

enum class VariationMethod { dual, gradient_l1, heatflow };

struct VariationResult {
    double value = 0.0;
    VariationMethod method = VariationMethod::gradient_l1;
    int iterations = 0;
    double duality_gap = 0.0;
    bool converged = true;
};

struct DualSolverParams {
    int max_iterations = 100000;
    double gap_tol = 1e-10;  // relative duality-gap stop
};

// (|Df|, sigma_f): nonnegative site masses and the unit covector field.
struct VectorMeasure {
    Eigen::VectorXd mass;  // per gradient site, total = Var(f)
    OneForm sigma;         // |sigma|_s = 1 where mass_s > 0, else 0
};

struct HeatflowCurve {
    std::vector<double> t;       // strictly decreasing
    std::vector<double> V;       // V(t) = ||d e^{-tH} f||_1
    double limit_last = 0.0;
    double limit_richardson = 0.0;
};

// Var(f) = sum_s w_s |df|_s
VariationResult variation_gradient_l1(const DiscreteManifold& M, const ScalarField& f);

// Var(f) = sup { |<f, d+a>| : |a|_s <= 1 } by projected ascent with
// Barzilai-Borwein style step growth; the constraint set is a product of
// per-site unit balls with closed-form projection.
VariationResult variation_dual(const DiscreteManifold& M, const ScalarField& f,
                               DualSolverParams params = {});

HeatflowCurve variation_heatflow(const DiscreteManifold& M, const HeatOperator& Hop,
                                 const ScalarField& f, const std::vector<double>& t_schedule);

// Default geometric schedule t_k = t0 2^{-k}.
std::vector<double> default_t_schedule(const DiscreteManifold& M, int points = 12,
                                       double t0 = -1.0);

VectorMeasure polar_decompose(const DiscreteManifold& M, const ScalarField& f);

// Psi[(mass, sigma)](alpha) = sum_s (sigma, alpha)_s mass_s
Complex measure_pair_apply(const DiscreteManifold& M, const VectorMeasure& nu,
                           const OneForm& alpha);

// Classical 1-D pointwise variation of ordered samples.
double pointwise_variation_1d(const std::vector<Complex>& samples);

// ||f||_BV = ||f||_1 + Var(f)
double bv_norm(const DiscreteManifold& M, const ScalarField& f);

struct DensityProfile {
    std::vector<double> max_density;  // per refinement level: max_s mass_s / w_s
    std::vector<double> h;            // characteristic site scale per level
};

// Diagnostic for |Df| << vol across a refinement family.
DensityProfile density_profile(const std::vector<const DiscreteManifold*>& family,
                               const std::vector<ScalarField>& fields);

}  // namespace bvflow
