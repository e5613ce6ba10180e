#pragma once

#include <memory>
#include <vector>

#include "bvflow/manifold.hpp"

namespace bvflow {

enum class HeatStrategy { automatic, spectral, implicit_stepper };

struct HeatParams {
    int spectral_ceiling = 3000;  // vertex count above which the stepper is used
    int steps = 64;               // Crank-Nicolson steps per apply
};

// e^{-tH} with H = Vol^{-1} A / 2, A the weighted stiffness matrix.
// Immutable after build; applications are const and thread-safe.
class HeatOperator {
  public:
    HeatOperator(const DiscreteManifold& M, HeatStrategy strategy, HeatParams params);

    const DiscreteManifold& manifold() const { return *M_; }
    bool is_spectral() const { return spectral_; }
    int steps() const { return params_.steps; }

    // eigenvalues of H ascending (spectral only)
    const Eigen::VectorXd& eigenvalues() const;
    // vol-orthonormal eigenfields, one per column (spectral only)
    const Eigen::MatrixXd& eigenfields() const;

    ScalarField apply(const ScalarField& f, double t) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& f, double t) const;

    // row p(t, x, .) of the heat kernel; requires the spectral strategy
    Eigen::VectorXd kernel_row(double t, int x) const;

    // integrated kernel sum_y K(t)[x][y] g(y) vol_y with
    // K(t) = int_0^t p(s,.,.) ds, via the eigenexpansion (spectral only)
    Eigen::VectorXd integrated_kernel_apply(double t, const Eigen::VectorXd& g) const;

    // dense H (small instances; used by Monte Carlo oracles)
    Eigen::MatrixXd dense_generator() const;

  private:
    const DiscreteManifold* M_;
    HeatParams params_;
    bool spectral_ = true;
    Eigen::SparseMatrix<double> A_;  // stiffness
    Eigen::VectorXd evals_;
    Eigen::MatrixXd phi_;      // vol-orthonormal eigenfields
    Eigen::MatrixXd phiT_vol_; // phi^T * Vol, cached

    Eigen::VectorXd stepper_apply(const Eigen::VectorXd& f, double t) const;
};

HeatOperator build_heat_operator(const DiscreteManifold& M,
                                 HeatStrategy strategy = HeatStrategy::automatic,
                                 HeatParams params = {});

struct KernelBoundReport {
    std::vector<double> t;
    std::vector<double> sup_diag_scaled;  // sup_x p(t,x,x) t^{m/2}
    std::vector<bool> sub_mesh_scale;     // t below the resolved scale h^2
    double bound = 0.0;
    bool within_bound = true;
};

// Empirical check of sup_x p(t,x,x) t^{m/2} <= C over a t grid.
KernelBoundReport heat_kernel_bound_check(const HeatOperator& op,
                                          const std::vector<double>& t_grid, double C);

}  // namespace bvflow
