#pragma once

#include <vector>

#include "bvflow/heat.hpp"
#include "bvflow/manifold.hpp"
#include "bvflow/stochastic.hpp"

namespace bvflow {

// Hermitian m x m matrix per vertex, acting on the covector fiber.
using EndomorphismField = std::vector<Eigen::MatrixXcd>;

void check_hermitian(const EndomorphismField& R, double tol = 1e-12);

// Spectral calculus: R = R_plus - R_minus with R_plus, R_minus >= 0 and
// R_plus R_minus = 0, per vertex.
std::pair<EndomorphismField, EndomorphismField> spectral_parts(const EndomorphismField& R);

struct RicciDecomposition {
    EndomorphismField R1, R2;  // both PSD, R = R1 - R2
};

// w1(x) = min spec(R1(x)/2), w2(x) = max spec(R2(x)/2).
std::pair<Eigen::VectorXd, Eigen::VectorXd> scalar_potentials(const RicciDecomposition& dec);

// Ricci change under g -> e^{2 psi} g, evaluated pointwise:
// T = (2-m)(Hess - dpsi dpsi^T) - (lap + (m-2)|dpsi|^2_g) g
Eigen::MatrixXd conformal_perturbation(int m, const Eigen::MatrixXd& g,
                                       const Eigen::VectorXd& dpsi,
                                       const Eigen::MatrixXd& hess, double lap);

// Edge cochain complex: 1-forms as one value per canonical edge. For graphs
// these are the graph edges; for meshes an auxiliary complex with cotan
// weights on the down inner product (matching the scalar operator) and
// barycentric dual weights where the cotan weight degenerates.
struct EdgeComplex {
    std::vector<Edge> edges;
    Eigen::SparseMatrix<double> d0;  // edges x vertices
    Eigen::SparseMatrix<double> d1;  // triangles x edges (empty for graphs)
    Eigen::VectorXd star0;           // vertex volumes
    Eigen::VectorXd star1;           // down weights w_e / len^2 (graph) or cotan (mesh)
    Eigen::VectorXd star1_up;        // strictly positive weights for the curl term
    Eigen::VectorXd star2;           // 1 / area per triangle
};

EdgeComplex build_edge_complex(const DiscreteManifold& M);

Eigen::VectorXcd d0_apply(const EdgeComplex& ec, const ScalarField& f);
Eigen::VectorXd edge_site_norm(const EdgeComplex& ec, const Eigen::VectorXcd& alpha);

// H1 = (1/2)(d0 d0† + d1† d1) + diag(V) on edge cochains. Immutable; the
// semigroup is evaluated with a dense matrix exponential (instances are small
// wherever 1-form flow is exercised).
class OneFormHeatOperator {
  public:
    OneFormHeatOperator(const DiscreteManifold& M, Eigen::VectorXd V_per_edge);

    const EdgeComplex& complex() const { return ec_; }
    const Eigen::MatrixXd& generator() const { return H1_; }
    const Eigen::VectorXd& potential() const { return V_; }
    const DiscreteManifold& manifold() const { return *M_; }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& alpha, double t) const;

  private:
    const DiscreteManifold* M_;
    EdgeComplex ec_;
    Eigen::MatrixXd H1_;
    Eigen::VectorXd V_;
};

OneFormHeatOperator build_oneform_heat(const DiscreteManifold& M,
                                       const Eigen::VectorXd& V_per_edge);
OneFormHeatOperator build_oneform_heat(const DiscreteManifold& M);  // V = 0

struct DominationSite {
    int edge = -1;
    double lhs = 0;        // |e^{-tH1} alpha|_e (site norm)
    double majorant = 0;   // MC Feynman-Kac estimate
    double upper_ci = 0;
    bool violated = false;
};

struct DominationReport {
    std::vector<DominationSite> sites;
    int violations = 0;
};

// Checks |e^{-tH1} alpha| <= E[e^{int w2} |alpha|(E_t) 1_survive] per edge,
// with the comparison walk on the edge-dual chain. Graph mode (cycle/path).
DominationReport domination_check(const OneFormHeatOperator& op, const Eigen::VectorXd& w2_vertex,
                                  const Eigen::VectorXcd& alpha, double t,
                                  const MonteCarloParams& mc);

}  // namespace bvflow
