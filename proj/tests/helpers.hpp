#pragma once

#include <vector>

#include "bvflow/builtins.hpp"
#include "bvflow/manifold.hpp"
#include "bvflow/rng.hpp"

namespace bvflow::testing {

// 2-vertex unit graph: vol = 1, one edge with len = w = 1. H has spectrum {0,1}.
inline DiscreteManifold two_vertex_graph() {
    DiscreteManifold M;
    M.mode = Mode::graph;
    M.dimension = 1;
    M.vol = Eigen::Vector2d(1.0, 1.0);
    M.edges.push_back({0, 1, 1.0, 1.0});
    M.finalize();
    return M;
}

inline DiscreteManifold graph_from_edges(int n, const std::vector<std::array<int, 2>>& ed,
                                         std::uint64_t seed = 0) {
    DiscreteManifold M;
    M.mode = Mode::graph;
    M.dimension = 1;
    Rng rng(seed, 77);
    M.vol.resize(n);
    for (int i = 0; i < n; ++i) M.vol[i] = 0.5 + rng.next_double();
    for (auto& e : ed) {
        Edge E;
        E.u = e[0];
        E.v = e[1];
        E.len = 0.5 + rng.next_double();
        E.w = 0.5 + rng.next_double();
        M.edges.push_back(E);
    }
    M.finalize();
    return M;
}

inline ScalarField random_complex_field(const DiscreteManifold& M, std::uint64_t seed) {
    return field_random(M, seed);
}

inline ScalarField random_real_field(const DiscreteManifold& M, std::uint64_t seed) {
    ScalarField f = field_random(M, seed);
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = f[i].real();
    return f;
}

inline OneForm random_one_form(const DiscreteManifold& M, std::uint64_t seed) {
    Rng rng(seed, 99);
    OneForm a = zero_one_form(M);
    if (M.mode == Mode::graph) {
        for (int s = 0; s < M.num_sites(); ++s)
            a.edge[s] = Complex(rng.next_normal(), rng.next_normal());
    } else {
        for (int s = 0; s < M.num_sites(); ++s)
            a.tri.col(s) << Complex(rng.next_normal(), rng.next_normal()),
                Complex(rng.next_normal(), rng.next_normal());
    }
    return a;
}

}  // namespace bvflow::testing
