#include "bvflow/builtins.hpp"

#include <cmath>

#include "bvflow/rng.hpp"

namespace bvflow {

namespace {
constexpr double kPi = 3.141592653589793238462643383279;
}

DiscreteManifold make_cycle(int N) {
    if (N < 3) throw ValidationError("cycle needs N >= 3");
    DiscreteManifold M;
    M.mode = Mode::graph;
    M.dimension = 1;
    M.vol = Eigen::VectorXd::Constant(N, 1.0 / N);
    for (int i = 0; i < N; ++i) {
        Edge e;
        e.u = i;
        e.v = (i + 1) % N;
        e.len = e.w = 1.0 / N;
        M.edges.push_back(e);
    }
    M.finalize();
    return M;
}

DiscreteManifold make_path(int N) {
    if (N < 2) throw ValidationError("path needs N >= 2");
    DiscreteManifold M;
    M.mode = Mode::graph;
    M.dimension = 1;
    const double h = 1.0 / (N - 1);
    M.vol = Eigen::VectorXd::Constant(N, h);
    M.vol[0] = M.vol[N - 1] = h / 2;
    for (int i = 0; i + 1 < N; ++i) {
        Edge e;
        e.u = i;
        e.v = i + 1;
        e.len = e.w = h;
        M.edges.push_back(e);
    }
    M.finalize();
    return M;
}

DiscreteManifold make_flat_torus(int N) {
    if (N < 2) throw ValidationError("flat_torus needs N >= 2");
    DiscreteManifold M;
    M.mode = Mode::mesh;
    M.dimension = 2;
    const int n = N * N;
    const double h = 1.0 / N;
    M.vol = Eigen::VectorXd::Constant(n, h * h);  // lumped: 6 triangles / 3
    auto vid = [&](int i, int j) { return ((i % N + N) % N) * N + ((j % N + N) % N); };
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            double x = i * h, y = j * h;
            // cell corners: a=(i,j) b=(i+1,j) c=(i+1,j+1) d=(i,j+1)
            Triangle t1;
            t1.v = {vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)};
            t1.corner.col(0) << x, y;
            t1.corner.col(1) << x + h, y;
            t1.corner.col(2) << x + h, y + h;
            M.tris.push_back(t1);
            Triangle t2;
            t2.v = {vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)};
            t2.corner.col(0) << x, y;
            t2.corner.col(1) << x + h, y + h;
            t2.corner.col(2) << x, y + h;
            M.tris.push_back(t2);
        }
    }
    M.finalize();
    return M;
}

DiscreteManifold make_parametric_torus(int N, const std::function<Eigen::Vector3d(double, double)>& embed) {
    if (N < 2) throw ValidationError("parametric_torus needs N >= 2");
    DiscreteManifold M;
    M.mode = Mode::mesh;
    M.dimension = 2;
    const int n = N * N;
    const double h = 1.0 / N;
    auto vid = [&](int i, int j) { return ((i % N + N) % N) * N + ((j % N + N) % N); };
    auto pt = [&](int i, int j) { return embed(i * h, j * h); };
    auto add_tri = [&](std::array<std::pair<int, int>, 3> ij) {
        Triangle t;
        Eigen::Vector3d p0 = pt(ij[0].first, ij[0].second);
        Eigen::Vector3d p1 = pt(ij[1].first, ij[1].second);
        Eigen::Vector3d p2 = pt(ij[2].first, ij[2].second);
        // intrinsic 2D chart from embedded edge lengths
        double a = (p1 - p0).norm(), b = (p2 - p0).norm(), c = (p2 - p1).norm();
        double cx = (a * a + b * b - c * c) / (2 * a);
        double cy2 = b * b - cx * cx;
        if (!(a > 0) || cy2 <= 0) throw ValidationError("degenerate embedded triangle");
        t.corner.col(0) << 0, 0;
        t.corner.col(1) << a, 0;
        t.corner.col(2) << cx, std::sqrt(cy2);
        for (int k = 0; k < 3; ++k) t.v[k] = vid(ij[k].first, ij[k].second);
        M.tris.push_back(t);
    };
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            add_tri({{{i, j}, {i + 1, j}, {i + 1, j + 1}}});
            add_tri({{{i, j}, {i + 1, j + 1}, {i, j + 1}}});
        }
    }
    // lumped vertex volumes from incident triangle areas (need finalize to get
    // areas, so assemble in two passes)
    M.vol = Eigen::VectorXd::Ones(n);  // placeholder for finalize validation
    M.finalize();
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (const Triangle& t : M.tris)
        for (int k = 0; k < 3; ++k) v[t.v[k]] += t.area / 3.0;
    M.vol = v;
    M.finalize();
    return M;
}

DiscreteManifold make_parametric_torus(int N, const std::string& callback_id) {
    if (callback_id == "flat") return make_flat_torus(N);
    if (callback_id == "ring") {
        const double R = 0.5, r = 0.25;
        return make_parametric_torus(N, [=](double u, double v) {
            double cu = std::cos(2 * kPi * u), su = std::sin(2 * kPi * u);
            double cv = std::cos(2 * kPi * v), sv = std::sin(2 * kPi * v);
            return Eigen::Vector3d((R + r * cv) * cu, (R + r * cv) * su, r * sv);
        });
    }
    throw ValidationError("unknown metric callback: " + callback_id);
}

ScalarField field_step(const DiscreteManifold& M) {
    const int n = M.num_vertices();
    ScalarField f = ScalarField::Zero(n);
    for (int i = 0; i < n / 2; ++i) f[i] = 1.0;
    return f;
}

ScalarField field_sinusoid(const DiscreteManifold& M) {
    const int n = M.num_vertices();
    ScalarField f(n);
    for (int i = 0; i < n; ++i) f[i] = std::sin(2 * kPi * i / n);
    return f;
}

ScalarField field_disk_indicator(const DiscreteManifold& M, int N, double r) {
    if (M.num_vertices() != N * N)
        throw ValidationError("disk_indicator: manifold is not an N x N torus grid");
    ScalarField f = ScalarField::Zero(N * N);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            double dx = std::abs(static_cast<double>(i) / N - 0.5);
            double dy = std::abs(static_cast<double>(j) / N - 0.5);
            dx = std::min(dx, 1.0 - dx);
            dy = std::min(dy, 1.0 - dy);
            if (dx * dx + dy * dy <= r * r) f[i * N + j] = 1.0;
        }
    }
    return f;
}

ScalarField field_random(const DiscreteManifold& M, std::uint64_t seed) {
    Rng rng(seed, 0x5eedf1e1dULL);
    ScalarField f(M.num_vertices());
    for (int i = 0; i < M.num_vertices(); ++i) {
        double re = rng.next_normal();
        double im = rng.next_normal();
        f[i] = Complex(re, im);
    }
    return f;
}

}  // namespace bvflow
