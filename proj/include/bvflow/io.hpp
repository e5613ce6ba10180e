#pragma once

#include <string>

#include <json.hpp>

#include "bvflow/curvature.hpp"
#include "bvflow/manifold.hpp"
#include "bvflow/vecmeasure.hpp"

namespace bvflow {

using Json = nlohmann::json;

// Structured manifold records. Mesh vertex volumes may be omitted, in which
// case each vertex receives one third of its incident triangle areas.
Json manifold_to_json(const DiscreteManifold& M);
DiscreteManifold manifold_from_json(const Json& j);
DiscreteManifold load_manifold_json(const std::string& path);

// OFF-style vertex/face list; volumes derived from areas (area/3 per corner).
DiscreteManifold load_manifold_off(const std::string& path);

// Field CSV: vertex_id,re,im (im optional; an initial header line is skipped).
ScalarField load_field_csv(const std::string& path, int num_vertices);
void save_field_csv(const std::string& path, const ScalarField& f);

// Endomorphism CSV: vertex_id followed by 2 m^2 values (re,im interleaved,
// row-major blocks).
EndomorphismField load_endomorphism_csv(const std::string& path, int m);

Json measure_to_json(const FiniteVectorMeasure& nu);
FiniteVectorMeasure measure_from_json(const Json& j);

struct ManifoldSource {
    std::string builtin;   // cycle | path | flat_torus | parametric_torus (empty: file)
    int n = 0;
    std::string callback;  // parametric_torus metric callback id
    std::string file;      // .json or .off
};

struct FieldSource {
    std::string builtin;  // step | disk_indicator | sinusoid | random (empty: csv)
    double radius = 0.2;
    std::uint64_t seed = 0;
    std::string csv;
};

struct ExperimentConfig {
    int schema_version = 1;
    ManifoldSource manifold;
    FieldSource field;
    std::string task;  // var | curve | polar | kato | kasminskii | dominate | conformal | suite
    Json params = Json::object();
    std::uint64_t seed = 1;
    std::string out;
};

Json config_to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const Json& j);

DiscreteManifold realize_manifold(const ManifoldSource& src);
ScalarField realize_field(const FieldSource& src, const DiscreteManifold& M,
                          const ManifoldSource& msrc);

}  // namespace bvflow
