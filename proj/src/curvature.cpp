#include "bvflow/curvature.hpp"

#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace bvflow {

void check_hermitian(const EndomorphismField& R, double tol) {
    for (const auto& A : R) {
        if (A.rows() != A.cols()) throw ValidationError("endomorphism field: non-square block");
        if ((A - A.adjoint()).cwiseAbs().maxCoeff() > tol)
            throw ValidationError("endomorphism field: non-Hermitian block");
    }
}

std::pair<EndomorphismField, EndomorphismField> spectral_parts(const EndomorphismField& R) {
    check_hermitian(R);
    EndomorphismField P, N;
    P.reserve(R.size());
    N.reserve(R.size());
    for (const auto& A : R) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
        if (es.info() != Eigen::Success) throw SolverError("spectral_parts: eigensolver failed");
        Eigen::VectorXd lp = es.eigenvalues().cwiseMax(0.0);
        Eigen::VectorXd ln = (-es.eigenvalues()).cwiseMax(0.0);
        const Eigen::MatrixXcd& U = es.eigenvectors();
        P.push_back(U * lp.asDiagonal() * U.adjoint());
        N.push_back(U * ln.asDiagonal() * U.adjoint());
    }
    return {P, N};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> scalar_potentials(const RicciDecomposition& dec) {
    if (dec.R1.size() != dec.R2.size())
        throw ValidationError("ricci decomposition: mismatched fields");
    check_hermitian(dec.R1);
    check_hermitian(dec.R2);
    const int n = static_cast<int>(dec.R1.size());
    Eigen::VectorXd w1(n), w2(n);
    for (int x = 0; x < n; ++x) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> e1(dec.R1[x]), e2(dec.R2[x]);
        if (e1.eigenvalues().minCoeff() < -1e-12 || e2.eigenvalues().minCoeff() < -1e-12)
            throw ValidationError("ricci decomposition: parts must be positive semidefinite");
        w1[x] = 0.5 * e1.eigenvalues().minCoeff();
        w2[x] = 0.5 * e2.eigenvalues().maxCoeff();
    }
    return {w1, w2};
}

Eigen::MatrixXd conformal_perturbation(int m, const Eigen::MatrixXd& g,
                                       const Eigen::VectorXd& dpsi,
                                       const Eigen::MatrixXd& hess, double lap) {
    if (g.rows() != m || g.cols() != m || dpsi.size() != m || hess.rows() != m || hess.cols() != m)
        throw ValidationError("conformal_perturbation: dimension mismatch");
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw ValidationError("conformal_perturbation: metric not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw ValidationError("conformal_perturbation: metric not positive definite");
    if ((hess - hess.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw ValidationError("conformal_perturbation: Hessian not symmetric");
    const double md = static_cast<double>(m);
    double grad_sq = dpsi.dot(llt.solve(dpsi));  // |dpsi|^2 in the covector metric
    Eigen::MatrixXd T = (2.0 - md) * (hess - dpsi * dpsi.transpose()) -
                        (lap + (md - 2.0) * grad_sq) * g;
    return 0.5 * (T + T.transpose());
}

EdgeComplex build_edge_complex(const DiscreteManifold& M) {
    EdgeComplex ec;
    ec.star0 = M.vol;
    const int n = M.num_vertices();
    if (M.mode == Mode::graph) {
        ec.edges = M.edges;
        const int E = static_cast<int>(ec.edges.size());
        ec.star1.resize(E);
        for (int e = 0; e < E; ++e)
            ec.star1[e] = ec.edges[e].w / (ec.edges[e].len * ec.edges[e].len);
        ec.star1_up = ec.star1;
        ec.d1.resize(0, E);
        ec.star2.resize(0);
    } else {
        ec.edges = mesh_cotan_edges(M);
        const int E = static_cast<int>(ec.edges.size());
        std::map<std::pair<int, int>, int> idx;
        for (int e = 0; e < E; ++e) idx[{ec.edges[e].u, ec.edges[e].v}] = e;
        ec.star1.resize(E);
        for (int e = 0; e < E; ++e) ec.star1[e] = ec.edges[e].w;
        // barycentric dual lengths for the curl-term inner product
        Eigen::VectorXd dual = Eigen::VectorXd::Zero(E);
        for (const Triangle& t : M.tris) {
            Eigen::Vector2d bc = (t.corner.col(0) + t.corner.col(1) + t.corner.col(2)) / 3.0;
            for (int c = 0; c < 3; ++c) {
                int a = t.v[c], b = t.v[(c + 1) % 3];
                Eigen::Vector2d mid = 0.5 * (t.corner.col(c) + t.corner.col((c + 1) % 3));
                int e = idx.at(std::minmax(a, b));
                dual[e] += (bc - mid).norm();
            }
        }
        ec.star1_up.resize(E);
        for (int e = 0; e < E; ++e) ec.star1_up[e] = dual[e] / ec.edges[e].len;
        // d1: boundary of each triangle in its cyclic vertex order
        std::vector<Eigen::Triplet<double>> trip;
        const int T = static_cast<int>(M.tris.size());
        ec.star2.resize(T);
        for (int s = 0; s < T; ++s) {
            const Triangle& t = M.tris[s];
            ec.star2[s] = 1.0 / t.area;
            for (int c = 0; c < 3; ++c) {
                int a = t.v[c], b = t.v[(c + 1) % 3];
                int e = idx.at(std::minmax(a, b));
                trip.emplace_back(s, e, a < b ? 1.0 : -1.0);
            }
        }
        ec.d1.resize(T, E);
        ec.d1.setFromTriplets(trip.begin(), trip.end());
    }
    // d0 shared by both modes
    std::vector<Eigen::Triplet<double>> trip;
    const int E = static_cast<int>(ec.edges.size());
    for (int e = 0; e < E; ++e) {
        trip.emplace_back(e, ec.edges[e].u, -1.0);
        trip.emplace_back(e, ec.edges[e].v, 1.0);
    }
    ec.d0.resize(E, n);
    ec.d0.setFromTriplets(trip.begin(), trip.end());
    return ec;
}

Eigen::VectorXcd d0_apply(const EdgeComplex& ec, const ScalarField& f) {
    return ec.d0.cast<Complex>() * f;
}

Eigen::VectorXd edge_site_norm(const EdgeComplex& ec, const Eigen::VectorXcd& alpha) {
    const int E = static_cast<int>(ec.edges.size());
    Eigen::VectorXd r(E);
    for (int e = 0; e < E; ++e) r[e] = std::abs(alpha[e]) / ec.edges[e].len;
    return r;
}

OneFormHeatOperator::OneFormHeatOperator(const DiscreteManifold& M, Eigen::VectorXd V_per_edge)
    : M_(&M), ec_(build_edge_complex(M)) {
    const int E = static_cast<int>(ec_.edges.size());
    if (V_per_edge.size() == 0) V_per_edge = Eigen::VectorXd::Zero(E);
    if (V_per_edge.size() != E)
        throw ValidationError("one-form potential size mismatch");
    Eigen::MatrixXd d0 = Eigen::MatrixXd(ec_.d0);
    Eigen::MatrixXd down = 0.5 * d0 * ec_.star0.cwiseInverse().asDiagonal() * d0.transpose() *
                           ec_.star1.asDiagonal();
    H1_ = down;
    if (ec_.d1.rows() > 0) {
        Eigen::MatrixXd d1 = Eigen::MatrixXd(ec_.d1);
        H1_ += 0.5 * ec_.star1_up.cwiseInverse().asDiagonal() * d1.transpose() *
               ec_.star2.asDiagonal() * d1;
    }
    H1_ += Eigen::MatrixXd(V_per_edge.asDiagonal());
    V_ = std::move(V_per_edge);
}

Eigen::VectorXcd OneFormHeatOperator::apply(const Eigen::VectorXcd& alpha, double t) const {
    if (t < 0) throw ValidationError("one-form semigroup: negative time");
    if (alpha.size() != H1_.rows()) throw ValidationError("one-form size mismatch");
    if (t == 0) return alpha;
    Eigen::MatrixXd P = (-t * H1_).exp();
    return P.cast<Complex>() * alpha;
}

OneFormHeatOperator build_oneform_heat(const DiscreteManifold& M, const Eigen::VectorXd& V) {
    return OneFormHeatOperator(M, V);
}

OneFormHeatOperator build_oneform_heat(const DiscreteManifold& M) {
    return OneFormHeatOperator(M, Eigen::VectorXd());
}

DominationReport domination_check(const OneFormHeatOperator& op, const Eigen::VectorXd& w2_vertex,
                                  const Eigen::VectorXcd& alpha, double t,
                                  const MonteCarloParams& mc) {
    const DiscreteManifold& M = op.manifold();
    if (M.mode != Mode::graph)
        throw ValidationError("domination_check: graph mode only");
    if (w2_vertex.minCoeff() < 0)
        throw ValidationError("domination_check: w2 must be >= 0");
    if (mc.samples < 1) throw ValidationError("domination_check: empty sample budget");
    const EdgeComplex& ec = op.complex();
    const int E = static_cast<int>(ec.edges.size());

    // site norms evolve under the length-conjugated generator; its diffusion
    // part drives the comparison walk on the edge-dual chain
    Eigen::VectorXd len(E);
    for (int e = 0; e < E; ++e) len[e] = ec.edges[e].len;
    Eigen::MatrixXd Ht = len.cwiseInverse().asDiagonal() * op.generator() * len.asDiagonal();
    Eigen::VectorXd w2_edge(E);
    for (int e = 0; e < E; ++e)
        w2_edge[e] = std::max(w2_vertex[ec.edges[e].u], w2_vertex[ec.edges[e].v]);
    // strip the potential: H1 = Delta_1/2 + V; the walk runs under the
    // Markovian minorant of Delta_1/2 (off-diagonals replaced by -|.|, which
    // absorbs the orientation signs of the edge complex) and the weight w2
    // enters through the Feynman-Kac functional
    Eigen::MatrixXd A = Ht - Eigen::MatrixXd(op.potential().asDiagonal());
    Eigen::MatrixXd minorant = Eigen::MatrixXd::Zero(E, E);
    Eigen::VectorXd growth = Eigen::VectorXd::Zero(E);
    for (int e = 0; e < E; ++e) {
        double rowsum = 0;
        for (int e2 = 0; e2 < E; ++e2) {
            if (e2 == e) continue;
            minorant(e, e2) = -std::abs(A(e, e2));
            rowsum += std::abs(A(e, e2));
        }
        // negative row deficiency is a growth potential, not killing; it must
        // enter the exponential weight to keep the majorant valid
        growth[e] = std::max(0.0, rowsum - A(e, e));
        minorant(e, e) = std::max(A(e, e), rowsum);
    }

    WalkModel W = walk_from_operator(minorant);
    Eigen::VectorXd term = edge_site_norm(ec, alpha);
    Eigen::VectorXd lhs = edge_site_norm(ec, op.apply(alpha, t));

    DominationReport rep;
    FKOptions opts;
    opts.terminal = term;
    Eigen::VectorXd fkv = w2_edge + growth;
    for (int e = 0; e < E; ++e) {
        FKResult fk = feynman_kac(W, fkv, t, e, mc, opts);
        DominationSite s;
        s.edge = e;
        s.lhs = lhs[e];
        s.majorant = fk.mean;
        s.upper_ci = fk.ci_hi;
        s.violated = s.lhs > s.upper_ci;
        if (s.violated) ++rep.violations;
        rep.sites.push_back(s);
    }
    return rep;
}

}  // namespace bvflow
