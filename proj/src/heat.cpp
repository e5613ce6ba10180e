#include "bvflow/heat.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

namespace bvflow {

HeatOperator::HeatOperator(const DiscreteManifold& M, HeatStrategy strategy, HeatParams params)
    : M_(&M), params_(params) {
    A_ = stiffness_matrix(M);
    const int n = M.num_vertices();
    if (strategy == HeatStrategy::automatic)
        spectral_ = n <= params.spectral_ceiling;
    else
        spectral_ = strategy == HeatStrategy::spectral;

    if (spectral_) {
        Eigen::VectorXd s = M.vol.array().rsqrt();
        Eigen::MatrixXd B = 0.5 * s.asDiagonal() * Eigen::MatrixXd(A_) * s.asDiagonal();
        B = 0.5 * (B + B.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
        if (es.info() != Eigen::Success) throw SolverError("heat: eigensolver failed");
        evals_ = es.eigenvalues().cwiseMax(0.0);
        // clamp the (theoretically zero) ground eigenvalue of the connected manifold
        if (evals_[0] < 1e-12) evals_[0] = 0.0;
        phi_ = s.asDiagonal() * es.eigenvectors();
        phiT_vol_ = phi_.transpose() * M.vol.asDiagonal();
    }
}

const Eigen::VectorXd& HeatOperator::eigenvalues() const {
    if (!spectral_) throw SolverError("heat: eigenvalues need the spectral strategy");
    return evals_;
}

const Eigen::MatrixXd& HeatOperator::eigenfields() const {
    if (!spectral_) throw SolverError("heat: eigenfields need the spectral strategy");
    return phi_;
}

Eigen::VectorXd HeatOperator::stepper_apply(const Eigen::VectorXd& f, double t) const {
    const int n = M_->num_vertices();
    const double tau = t / params_.steps;
    Eigen::SparseMatrix<double> Vol(n, n);
    Vol.setIdentity();
    for (int i = 0; i < n; ++i) Vol.coeffRef(i, i) = M_->vol[i];
    Eigen::SparseMatrix<double> lhs = Vol + (tau / 4.0) * A_;
    Eigen::SparseMatrix<double> rhs = Vol - (tau / 4.0) * A_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lhs);
    if (solver.info() != Eigen::Success)
        throw SolverError("heat: stepper factorization failed (corrupt input?)");
    Eigen::VectorXd u = f;
    for (int k = 0; k < params_.steps; ++k) u = solver.solve(rhs * u);
    return u;
}

Eigen::VectorXd HeatOperator::apply(const Eigen::VectorXd& f, double t) const {
    if (t < 0) throw ValidationError("heat: negative time");
    if (f.size() != M_->num_vertices()) throw ValidationError("heat: field size mismatch");
    if (t == 0) return f;
    if (!spectral_) return stepper_apply(f, t);
    Eigen::VectorXd c = phiT_vol_ * f;
    c.array() *= (-t * evals_.array()).exp();
    return phi_ * c;
}

ScalarField HeatOperator::apply(const ScalarField& f, double t) const {
    Eigen::VectorXd re = apply(Eigen::VectorXd(f.real()), t);
    Eigen::VectorXd im = apply(Eigen::VectorXd(f.imag()), t);
    return re.cast<Complex>() + Complex(0, 1) * im.cast<Complex>();
}

Eigen::VectorXd HeatOperator::kernel_row(double t, int x) const {
    if (t <= 0) throw ValidationError("heat kernel: t must be > 0");
    if (!spectral_) throw SolverError("heat kernel: requires the spectral strategy");
    const int n = M_->num_vertices();
    Eigen::VectorXd w = (-t * evals_.array()).exp() * phi_.row(x).transpose().array();
    Eigen::VectorXd row = phi_ * w;
    (void)n;
    return row;
}

Eigen::VectorXd HeatOperator::integrated_kernel_apply(double t, const Eigen::VectorXd& g) const {
    if (!spectral_) throw SolverError("heat: integrated kernel requires spectral strategy");
    Eigen::VectorXd c = phiT_vol_ * g;
    for (Eigen::Index k = 0; k < evals_.size(); ++k) {
        double lam = evals_[k];
        c[k] *= lam > 1e-12 ? (1.0 - std::exp(-lam * t)) / lam : t;
    }
    return phi_ * c;
}

Eigen::MatrixXd HeatOperator::dense_generator() const {
    return 0.5 * M_->vol.cwiseInverse().asDiagonal() * Eigen::MatrixXd(A_);
}

HeatOperator build_heat_operator(const DiscreteManifold& M, HeatStrategy strategy, HeatParams params) {
    return HeatOperator(M, strategy, params);
}

KernelBoundReport heat_kernel_bound_check(const HeatOperator& op,
                                          const std::vector<double>& t_grid, double C) {
    const DiscreteManifold& M = op.manifold();
    // characteristic length of the discretization
    double h;
    if (M.mode == Mode::graph) {
        h = 0;
        for (const Edge& e : M.edges) h += e.len;
        h /= static_cast<double>(M.edges.size());
    } else {
        double a = 0;
        for (const Triangle& t : M.tris) a += t.area;
        h = std::sqrt(2.0 * a / static_cast<double>(M.tris.size()));
    }
    KernelBoundReport rep;
    rep.bound = C;
    const double half_m = 0.5 * M.dimension;
    for (double t : t_grid) {
        double sup = 0;
        for (int x = 0; x < M.num_vertices(); ++x)
            sup = std::max(sup, op.kernel_row(t, x)[x]);
        double scaled = sup * std::pow(t, half_m);
        rep.t.push_back(t);
        rep.sup_diag_scaled.push_back(scaled);
        rep.sub_mesh_scale.push_back(t < h * h);
        if (t >= h * h && scaled > C) rep.within_bound = false;
    }
    return rep;
}

}  // namespace bvflow
