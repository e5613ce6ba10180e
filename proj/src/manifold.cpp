#include "bvflow/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

namespace bvflow {

namespace {

void check_finite(const Eigen::VectorXcd& f, const char* what) {
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        if (!std::isfinite(f[i].real()) || !std::isfinite(f[i].imag()))
            throw ValidationError(std::string(what) + ": non-finite entry");
    }
}

}  // namespace

void DiscreteManifold::finalize() {
    const int n = num_vertices();
    if (n <= 0) throw ValidationError("manifold: no vertices");
    for (int i = 0; i < n; ++i)
        if (!(vol[i] > 0.0) || !std::isfinite(vol[i]))
            throw ValidationError("manifold: vertex volume must be > 0 (vertex " +
                                  std::to_string(i) + ")");

    if (mode == Mode::graph) {
        if (!tris.empty()) throw ValidationError("graph manifold carries triangles");
        for (auto& e : edges) {
            if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n || e.u == e.v)
                throw ValidationError("edge references invalid vertex");
            if (e.u > e.v) std::swap(e.u, e.v);  // canonical orientation
            if (!(e.len > 0.0) || !(e.w > 0.0))
                throw ValidationError("edge length and volume must be > 0");
        }
    } else {
        if (!edges.empty()) throw ValidationError("mesh manifold carries loose edges");
        for (auto& t : tris) {
            for (int c = 0; c < 3; ++c)
                if (t.v[c] < 0 || t.v[c] >= n)
                    throw ValidationError("triangle references invalid vertex");
            Eigen::Vector2d e1 = t.corner.col(1) - t.corner.col(0);
            Eigen::Vector2d e2 = t.corner.col(2) - t.corner.col(0);
            double det = e1.x() * e2.y() - e1.y() * e2.x();
            t.area = 0.5 * std::abs(det);
            if (!(t.area > 1e-300))
                throw ValidationError("degenerate triangle (area 0)");
            // P1 basis gradients: solve J^T g_i = e_i for the affine chart.
            Eigen::Matrix2d J;
            J.col(0) = e1;
            J.col(1) = e2;
            Eigen::Matrix2d Jinv = J.inverse();
            // phi_1, phi_2 are the chart coordinates; phi_0 = 1 - phi_1 - phi_2.
            Eigen::Vector2d g1 = Jinv.transpose().col(0);
            Eigen::Vector2d g2 = Jinv.transpose().col(1);
            t.grad.col(1) = g1;
            t.grad.col(2) = g2;
            t.grad.col(0) = -g1 - g2;
        }
    }

    const int ns = num_sites();
    vertex_sites.assign(n, {});
    for (int s = 0; s < ns; ++s) {
        if (mode == Mode::graph) {
            vertex_sites[edges[s].u].push_back(s);
            vertex_sites[edges[s].v].push_back(s);
        } else {
            for (int c = 0; c < 3; ++c) vertex_sites[tris[s].v[c]].push_back(s);
        }
    }

    // connectivity
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
        int x = q.front();
        q.pop();
        for (int s : vertex_sites[x]) {
            auto visit = [&](int y) {
                if (!seen[y]) {
                    seen[y] = 1;
                    ++count;
                    q.push(y);
                }
            };
            if (mode == Mode::graph) {
                visit(edges[s].u);
                visit(edges[s].v);
            } else {
                for (int c = 0; c < 3; ++c) visit(tris[s].v[c]);
            }
        }
    }
    if (count != n) throw ValidationError("manifold is not connected");
}

OneForm exterior_derivative(const DiscreteManifold& M, const ScalarField& f) {
    if (f.size() != M.num_vertices())
        throw ValidationError("field size does not match manifold vertex count");
    check_finite(f, "field");
    OneForm a;
    a.mode = M.mode;
    if (M.mode == Mode::graph) {
        a.edge.resize(M.edges.size());
        for (size_t s = 0; s < M.edges.size(); ++s)
            a.edge[s] = f[M.edges[s].v] - f[M.edges[s].u];
    } else {
        a.tri.resize(2, static_cast<Eigen::Index>(M.tris.size()));
        for (size_t s = 0; s < M.tris.size(); ++s) {
            const Triangle& t = M.tris[s];
            Eigen::Vector2cd g = Eigen::Vector2cd::Zero();
            for (int c = 0; c < 3; ++c) g += f[t.v[c]] * t.grad.col(c);
            a.tri.col(s) = g;
        }
    }
    return a;
}

ScalarField codifferential(const DiscreteManifold& M, const OneForm& alpha) {
    if (alpha.mode != M.mode || alpha.sites() != M.num_sites())
        throw ValidationError("one-form sites do not match manifold");
    ScalarField r = ScalarField::Zero(M.num_vertices());
    if (M.mode == Mode::graph) {
        for (size_t s = 0; s < M.edges.size(); ++s) {
            const Edge& e = M.edges[s];
            Complex c = (e.w / (e.len * e.len)) * alpha.edge[s];
            r[e.v] += c;
            r[e.u] -= c;
        }
    } else {
        for (size_t s = 0; s < M.tris.size(); ++s) {
            const Triangle& t = M.tris[s];
            for (int c = 0; c < 3; ++c) {
                Complex val = t.area * (t.grad(0, c) * alpha.tri(0, s) +
                                        t.grad(1, c) * alpha.tri(1, s));
                r[t.v[c]] += val;
            }
        }
    }
    for (int x = 0; x < M.num_vertices(); ++x) r[x] /= M.vol[x];
    return r;
}

Complex fiber_pairing(const DiscreteManifold& M, int s, const Complex& a, const Complex& b) {
    const double l = M.edges[s].len;
    return std::conj(a) * b / (l * l);
}

Complex fiber_pairing(const DiscreteManifold& M, int s, const OneForm& a, const OneForm& b) {
    if (M.mode == Mode::graph) return fiber_pairing(M, s, a.edge[s], b.edge[s]);
    return a.tri.col(s).dot(b.tri.col(s));  // Eigen dot conjugates the first arg
}

Eigen::VectorXd site_norm(const DiscreteManifold& M, const OneForm& alpha) {
    if (alpha.mode != M.mode || alpha.sites() != M.num_sites())
        throw ValidationError("one-form sites do not match manifold");
    Eigen::VectorXd r(M.num_sites());
    if (M.mode == Mode::graph) {
        for (size_t s = 0; s < M.edges.size(); ++s)
            r[s] = std::abs(alpha.edge[s]) / M.edges[s].len;
    } else {
        for (Eigen::Index s = 0; s < alpha.tri.cols(); ++s) r[s] = alpha.tri.col(s).norm();
    }
    return r;
}

Complex inner_vertices(const DiscreteManifold& M, const ScalarField& f, const ScalarField& g) {
    Complex r = 0;
    for (int x = 0; x < M.num_vertices(); ++x) r += M.vol[x] * std::conj(f[x]) * g[x];
    return r;
}

Complex inner_sites(const DiscreteManifold& M, const OneForm& a, const OneForm& b) {
    Complex r = 0;
    for (int s = 0; s < M.num_sites(); ++s)
        r += M.site_volume(s) * fiber_pairing(M, s, a, b);
    return r;
}

DiscreteManifold rescale_metric(const DiscreteManifold& M, const MetricRescale& psi) {
    if (psi.size() != M.num_vertices())
        throw ValidationError("rescale field size mismatch");
    DiscreteManifold R = M;
    const double m = static_cast<double>(M.dimension);
    for (int x = 0; x < M.num_vertices(); ++x) R.vol[x] = std::exp(m * psi[x]) * M.vol[x];
    if (M.mode == Mode::graph) {
        for (size_t s = 0; s < M.edges.size(); ++s) {
            const Edge& e = M.edges[s];
            double pb = 0.5 * (psi[e.u] + psi[e.v]);
            R.edges[s].len = std::exp(pb) * e.len;
            R.edges[s].w = std::exp(m * pb) * e.w;
        }
    } else {
        for (size_t s = 0; s < M.tris.size(); ++s) {
            const Triangle& t = M.tris[s];
            double pb = (psi[t.v[0]] + psi[t.v[1]] + psi[t.v[2]]) / 3.0;
            R.tris[s].corner = std::exp(pb) * t.corner;
        }
    }
    R.finalize();
    return R;
}

Eigen::SparseMatrix<double> stiffness_matrix(const DiscreteManifold& M) {
    const int n = M.num_vertices();
    std::vector<Eigen::Triplet<double>> trip;
    auto add_edge = [&](int u, int v, double w) {
        trip.emplace_back(u, u, w);
        trip.emplace_back(v, v, w);
        trip.emplace_back(u, v, -w);
        trip.emplace_back(v, u, -w);
    };
    if (M.mode == Mode::graph) {
        for (const Edge& e : M.edges) add_edge(e.u, e.v, e.w / (e.len * e.len));
    } else {
        for (const Edge& e : mesh_cotan_edges(M)) add_edge(e.u, e.v, e.w);
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

std::vector<Edge> mesh_cotan_edges(const DiscreteManifold& M) {
    if (M.mode != Mode::mesh) throw ValidationError("mesh_cotan_edges: graph manifold");
    std::map<std::pair<int, int>, Edge> acc;
    for (const Triangle& t : M.tris) {
        for (int c = 0; c < 3; ++c) {
            int a = t.v[(c + 1) % 3], b = t.v[(c + 2) % 3];
            Eigen::Vector2d pa = t.corner.col((c + 1) % 3);
            Eigen::Vector2d pb = t.corner.col((c + 2) % 3);
            Eigen::Vector2d pc = t.corner.col(c);
            Eigen::Vector2d u = pa - pc, v = pb - pc;
            double cross = std::abs(u.x() * v.y() - u.y() * v.x());
            double cot = u.dot(v) / cross;
            auto key = std::minmax(a, b);
            Edge& e = acc[key];
            if (e.u < 0) {
                e.u = key.first;
                e.v = key.second;
                e.len = (pa - pb).norm();
                e.w = 0.0;
            }
            e.w += 0.5 * cot;
        }
    }
    std::vector<Edge> out;
    out.reserve(acc.size());
    for (auto& [k, e] : acc) out.push_back(e);
    return out;
}

OneForm zero_one_form(const DiscreteManifold& M) {
    OneForm a;
    a.mode = M.mode;
    if (M.mode == Mode::graph)
        a.edge = Eigen::VectorXcd::Zero(M.num_sites());
    else
        a.tri = Eigen::Matrix2Xcd::Zero(2, M.num_sites());
    return a;
}

}  // namespace bvflow
