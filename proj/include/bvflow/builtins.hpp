#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "bvflow/manifold.hpp"

namespace bvflow {

// Unit-circumference cycle: N vertices, len = vol = w = 1/N, m = 1.
DiscreteManifold make_cycle(int N);

// Unit-length path: N vertices, N-1 edges of length 1/(N-1), lumped vertex
// volumes (half intervals at the ends), m = 1.
DiscreteManifold make_path(int N);

// Unit-area flat torus, N x N grid, each cell split into two triangles
// (2 N^2 triangles), lumped vertex volumes, m = 2.
DiscreteManifold make_flat_torus(int N);

// Torus parametrized over an N x N periodic grid with a user metric: the
// callback maps (u,v) in [0,1)^2 to a 3D point; triangles get intrinsic
// corner coordinates from the embedded edge lengths.
DiscreteManifold make_parametric_torus(int N, const std::function<Eigen::Vector3d(double, double)>& embed);

// Named embeddings for the CLI ("ring": standard torus with radii R=2r=0.5).
DiscreteManifold make_parametric_torus(int N, const std::string& callback_id);

// Builtin fields -------------------------------------------------------------

// Indicator of the first half of the vertex range (arc indicator on a cycle).
ScalarField field_step(const DiscreteManifold& M);

// sin(2 pi s) with s the normalized arclength position (1-D manifolds).
ScalarField field_sinusoid(const DiscreteManifold& M);

// Indicator of the metric disk of radius r around (0.5, 0.5) on a flat torus.
ScalarField field_disk_indicator(const DiscreteManifold& M, int N, double r);

// Complex standard-normal entries, deterministic in the seed.
ScalarField field_random(const DiscreteManifold& M, std::uint64_t seed);

}  // namespace bvflow
