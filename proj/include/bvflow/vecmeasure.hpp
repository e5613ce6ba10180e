#pragma once

#include <map>

#include "bvflow/manifold.hpp"

namespace bvflow {

// Atomic K^m-valued measure on a finite point set.
struct FiniteVectorMeasure {
    int m = 1;
    bool real = false;  // K = R when true (imaginary parts must vanish)
    std::map<int, Eigen::VectorXcd> atoms;
};

// |nu|(X) = sum over atoms of the K^m norm.
double total_variation(const FiniteVectorMeasure& nu);

// (Re nu, Im nu): C^m -> R^{2m}; preserves total variation.
FiniteVectorMeasure complex_to_real(const FiniteVectorMeasure& nu);

struct MeasurePolar {
    std::map<int, double> mass;              // |nu| per atom, zero atoms dropped
    std::map<int, Eigen::VectorXcd> sigma;   // unit vectors, d nu = sigma d|nu|
};

MeasurePolar polar_decomposition_measure(const FiniteVectorMeasure& nu);

}  // namespace bvflow
