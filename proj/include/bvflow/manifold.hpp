#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace bvflow {

using Complex = std::complex<double>;
using ScalarField = Eigen::VectorXcd;  // one complex value per vertex
using RealField = Eigen::VectorXd;

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Mode { graph, mesh };

struct Edge {
    int u = -1, v = -1;   // canonical orientation u < v
    double len = 1.0;     // geometric length
    double w = 1.0;       // site volume
};

// Triangle with explicit corner coordinates (local chart, so periodic meshes
// need no global embedding). grad column i is the P1 basis gradient of corner i.
struct Triangle {
    std::array<int, 3> v{-1, -1, -1};
    Eigen::Matrix<double, 2, 3> corner = Eigen::Matrix<double, 2, 3>::Zero();
    double area = 0.0;                                                   // derived
    Eigen::Matrix<double, 2, 3> grad = Eigen::Matrix<double, 2, 3>::Zero();  // derived
};

// One-form: per gradient site. Graph mode: one complex value per canonical
// edge (antisymmetric under reorientation by convention). Mesh mode: a
// complex covector (2-vector) per triangle.
struct OneForm {
    Mode mode = Mode::graph;
    Eigen::VectorXcd edge;     // graph
    Eigen::Matrix2Xcd tri;     // mesh, one column per triangle
    Eigen::Index sites() const { return mode == Mode::graph ? edge.size() : tri.cols(); }
};

using MetricRescale = Eigen::VectorXd;  // conformal exponent psi per vertex

struct DiscreteManifold {
    Mode mode = Mode::graph;
    int dimension = 1;          // m
    Eigen::VectorXd vol;        // per-vertex volume weight
    std::vector<Edge> edges;    // graph gradient sites
    std::vector<Triangle> tris; // mesh gradient sites

    // derived
    std::vector<std::vector<int>> vertex_sites;  // site indices incident to each vertex

    int num_vertices() const { return static_cast<int>(vol.size()); }
    int num_sites() const {
        return mode == Mode::graph ? static_cast<int>(edges.size())
                                   : static_cast<int>(tris.size());
    }
    double site_volume(int s) const {
        return mode == Mode::graph ? edges[s].w : tris[s].area;
    }
    double total_volume() const { return vol.sum(); }

    // Computes triangle areas/gradients, incidence tables; throws
    // ValidationError on inconsistent or disconnected input.
    void finalize();
};

// d0: graph (df)_{uv} = f(v) - f(u); mesh: constant P1 gradient per triangle.
OneForm exterior_derivative(const DiscreteManifold& M, const ScalarField& f);

// Exact adjoint of exterior_derivative w.r.t. the vol / site inner products.
ScalarField codifferential(const DiscreteManifold& M, const OneForm& alpha);

// Fiberwise Hermitian pairing (a,b)_s. Graph: conj(a)b / len^2 so that
// |df|_e = |f(v)-f(u)| / len is a difference quotient.
Complex fiber_pairing(const DiscreteManifold& M, int s, const Complex& a, const Complex& b);
Complex fiber_pairing(const DiscreteManifold& M, int s, const OneForm& a, const OneForm& b);

// |alpha|_s per gradient site.
Eigen::VectorXd site_norm(const DiscreteManifold& M, const OneForm& alpha);

// <f,g> = sum vol_x conj(f) g
Complex inner_vertices(const DiscreteManifold& M, const ScalarField& f, const ScalarField& g);
// <a,b> = sum w_s (a,b)_s
Complex inner_sites(const DiscreteManifold& M, const OneForm& a, const OneForm& b);

// g -> e^{2 psi} g: vol scales e^{m psi}, lengths e^{psi-bar} with psi-bar the
// mean over the site's vertices, site volumes e^{m psi-bar}.
DiscreteManifold rescale_metric(const DiscreteManifold& M, const MetricRescale& psi);

// Weighted stiffness matrix A with <df,dg>_sites = f^* A g, so H = Vol^{-1} A / 2.
Eigen::SparseMatrix<double> stiffness_matrix(const DiscreteManifold& M);

OneForm zero_one_form(const DiscreteManifold& M);

// Edge list of a triangle mesh: canonical orientation, len from corner
// coordinates, w = summed cotan weight of the opposite angles. Satisfies
// d0^T diag(w) d0 == stiffness_matrix(M) for mesh manifolds.
std::vector<Edge> mesh_cotan_edges(const DiscreteManifold& M);

}  // namespace bvflow
