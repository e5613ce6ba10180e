#include "bvflow/vecmeasure.hpp"

namespace bvflow {

double total_variation(const FiniteVectorMeasure& nu) {
    double tv = 0;
    for (const auto& [id, v] : nu.atoms) {
        if (v.size() != nu.m) throw ValidationError("measure atom dimension mismatch");
        if (nu.real && v.imag().cwiseAbs().maxCoeff() != 0.0)
            throw ValidationError("real-valued measure has a nonzero imaginary part");
        tv += v.norm();
    }
    return tv;
}

FiniteVectorMeasure complex_to_real(const FiniteVectorMeasure& nu) {
    FiniteVectorMeasure r;
    r.m = 2 * nu.m;
    r.real = true;
    for (const auto& [id, v] : nu.atoms) {
        Eigen::VectorXcd w(2 * nu.m);
        for (int i = 0; i < nu.m; ++i) {
            w[i] = v[i].real();
            w[nu.m + i] = v[i].imag();
        }
        r.atoms[id] = w;
    }
    return r;
}

MeasurePolar polar_decomposition_measure(const FiniteVectorMeasure& nu) {
    MeasurePolar p;
    for (const auto& [id, v] : nu.atoms) {
        double n = v.norm();
        if (n > 0) {
            p.mass[id] = n;
            p.sigma[id] = v / n;
        }
    }
    return p;
}

}  // namespace bvflow
