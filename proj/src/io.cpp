#include "bvflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "bvflow/builtins.hpp"

namespace bvflow {

namespace {

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ValidationError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

void lump_mesh_volumes(DiscreteManifold& M, int n) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    M.vol = Eigen::VectorXd::Ones(n);
    M.finalize();  // computes areas
    for (const Triangle& t : M.tris)
        for (int k = 0; k < 3; ++k) v[t.v[k]] += t.area / 3.0;
    M.vol = v;
    M.finalize();
}

}  // namespace

Json manifold_to_json(const DiscreteManifold& M) {
    Json j;
    j["schema_version"] = 1;
    j["mode"] = M.mode == Mode::graph ? "graph" : "mesh";
    j["dimension"] = M.dimension;
    Json verts = Json::array();
    for (int i = 0; i < M.num_vertices(); ++i)
        verts.push_back({{"id", i}, {"vol", M.vol[i]}});
    j["vertices"] = verts;
    if (M.mode == Mode::graph) {
        Json edges = Json::array();
        for (const Edge& e : M.edges)
            edges.push_back({{"u", e.u}, {"v", e.v}, {"len", e.len}, {"w", e.w}});
        j["edges"] = edges;
    } else {
        Json tris = Json::array();
        for (const Triangle& t : M.tris) {
            Json c = Json::array();
            for (int k = 0; k < 3; ++k)
                c.push_back({t.corner(0, k), t.corner(1, k)});
            tris.push_back({{"v", {t.v[0], t.v[1], t.v[2]}}, {"coords", c}});
        }
        j["triangles"] = tris;
    }
    return j;
}

DiscreteManifold manifold_from_json(const Json& j) {
    DiscreteManifold M;
    try {
        if (j.value("schema_version", 1) != 1)
            throw ValidationError("manifold: unsupported schema_version");
        std::string mode = j.at("mode");
        if (mode == "graph")
            M.mode = Mode::graph;
        else if (mode == "mesh")
            M.mode = Mode::mesh;
        else
            throw ValidationError("manifold: unknown mode '" + mode + "'");
        M.dimension = j.value("dimension", M.mode == Mode::graph ? 1 : 2);
        int n = 0;
        bool have_vols = false;
        if (j.contains("vertices")) {
            const Json& verts = j.at("vertices");
            n = static_cast<int>(verts.size());
            M.vol = Eigen::VectorXd::Constant(n, -1.0);
            have_vols = true;
            for (const Json& v : verts) {
                int id = v.at("id");
                if (id < 0 || id >= n) throw ValidationError("manifold: vertex id out of range");
                if (v.contains("vol"))
                    M.vol[id] = v.at("vol");
                else
                    have_vols = false;
            }
        } else if (M.mode == Mode::mesh && j.contains("triangles")) {
            // vertex count from the largest index; volumes lumped from areas
            for (const Json& t : j.at("triangles"))
                for (int k = 0; k < 3; ++k) n = std::max(n, t.at("v").at(k).get<int>() + 1);
        } else {
            throw ValidationError("manifold: missing vertices");
        }
        if (M.mode == Mode::graph) {
            if (!have_vols) throw ValidationError("manifold: graph vertices need explicit vol");
            for (const Json& e : j.at("edges")) {
                Edge ed;
                ed.u = e.at("u");
                ed.v = e.at("v");
                ed.len = e.at("len");
                ed.w = e.at("w");
                M.edges.push_back(ed);
            }
            M.finalize();
        } else {
            for (const Json& t : j.at("triangles")) {
                Triangle tr;
                const Json& vv = t.at("v");
                for (int k = 0; k < 3; ++k) tr.v[k] = vv.at(k);
                const Json& cc = t.at("coords");
                for (int k = 0; k < 3; ++k) {
                    tr.corner(0, k) = cc.at(k).at(0);
                    tr.corner(1, k) = cc.at(k).at(1);
                }
                M.tris.push_back(tr);
            }
            if (have_vols)
                M.finalize();
            else
                lump_mesh_volumes(M, n);
        }
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("manifold JSON: ") + e.what());
    }
    return M;
}

DiscreteManifold load_manifold_json(const std::string& path) {
    return manifold_from_json(load_json_file(path));
}

DiscreteManifold load_manifold_off(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::string tok;
    in >> tok;
    if (tok != "OFF") throw ValidationError("OFF file must start with 'OFF'");
    int nv = 0, nf = 0, ne = 0;
    in >> nv >> nf >> ne;
    if (!in || nv <= 0 || nf <= 0) throw ValidationError("OFF: bad counts");
    std::vector<Eigen::Vector3d> pts(nv);
    for (int i = 0; i < nv; ++i) in >> pts[i].x() >> pts[i].y() >> pts[i].z();
    DiscreteManifold M;
    M.mode = Mode::mesh;
    M.dimension = 2;
    for (int f = 0; f < nf; ++f) {
        int k;
        in >> k;
        if (k != 3) throw ValidationError("OFF: only triangle faces are supported");
        Triangle t;
        in >> t.v[0] >> t.v[1] >> t.v[2];
        // intrinsic chart from embedded edge lengths
        Eigen::Vector3d p0 = pts.at(t.v[0]), p1 = pts.at(t.v[1]), p2 = pts.at(t.v[2]);
        double a = (p1 - p0).norm(), b = (p2 - p0).norm(), c = (p2 - p1).norm();
        double cx = (a * a + b * b - c * c) / (2 * a);
        double cy2 = b * b - cx * cx;
        if (!(a > 0) || cy2 <= 0) throw ValidationError("OFF: degenerate triangle");
        t.corner.col(0) << 0, 0;
        t.corner.col(1) << a, 0;
        t.corner.col(2) << cx, std::sqrt(cy2);
        M.tris.push_back(t);
    }
    if (!in) throw ValidationError("OFF: truncated file");
    lump_mesh_volumes(M, nv);
    return M;
}

ScalarField load_field_csv(const std::string& path, int num_vertices) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    ScalarField f = ScalarField::Zero(num_vertices);
    std::vector<char> seen(num_vertices, 0);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        long id;
        double re, im = 0;
        if (!(ls >> id >> re)) {
            if (first) {
                first = false;
                continue;  // header
            }
            throw ValidationError("field CSV: malformed line: " + line);
        }
        ls >> im;
        first = false;
        if (id < 0 || id >= num_vertices)
            throw ValidationError("field CSV: vertex id out of range: " + std::to_string(id));
        f[id] = Complex(re, im);
        seen[id] = 1;
    }
    for (int i = 0; i < num_vertices; ++i)
        if (!seen[i])
            throw ValidationError("field CSV: missing vertex " + std::to_string(i));
    return f;
}

void save_field_csv(const std::string& path, const ScalarField& f) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << "vertex_id,re,im\n";
    out.precision(17);
    for (Eigen::Index i = 0; i < f.size(); ++i)
        out << i << ',' << f[i].real() << ',' << f[i].imag() << '\n';
}

EndomorphismField load_endomorphism_csv(const std::string& path, int m) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::map<long, Eigen::MatrixXcd> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        long id;
        if (!(ls >> id)) continue;  // header
        Eigen::MatrixXcd A(m, m);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) {
                double re, im;
                if (!(ls >> re >> im))
                    throw ValidationError("endomorphism CSV: truncated row for vertex " +
                                          std::to_string(id));
                A(r, c) = Complex(re, im);
            }
        rows[id] = A;
    }
    EndomorphismField R;
    long expect = 0;
    for (auto& [id, A] : rows) {
        if (id != expect++)
            throw ValidationError("endomorphism CSV: vertex ids must be 0..n-1 contiguous");
        R.push_back(A);
    }
    if (R.empty()) throw ValidationError("endomorphism CSV: no rows");
    return R;
}

Json measure_to_json(const FiniteVectorMeasure& nu) {
    Json j;
    j["m"] = nu.m;
    j["field"] = nu.real ? "R" : "C";
    Json atoms = Json::array();
    for (const auto& [id, v] : nu.atoms) {
        Json comp = Json::array();
        for (int i = 0; i < nu.m; ++i) comp.push_back({v[i].real(), v[i].imag()});
        atoms.push_back({{"point", id}, {"value", comp}});
    }
    j["atoms"] = atoms;
    return j;
}

FiniteVectorMeasure measure_from_json(const Json& j) {
    FiniteVectorMeasure nu;
    try {
        nu.m = j.at("m");
        nu.real = j.value("field", "C") == "R";
        for (const Json& a : j.at("atoms")) {
            Eigen::VectorXcd v(nu.m);
            const Json& comp = a.at("value");
            for (int i = 0; i < nu.m; ++i)
                v[i] = Complex(comp.at(i).at(0), comp.at(i).at(1));
            nu.atoms[a.at("point").get<int>()] = v;
        }
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("measure JSON: ") + e.what());
    }
    return nu;
}

Json config_to_json(const ExperimentConfig& c) {
    Json j;
    j["schema_version"] = c.schema_version;
    Json m;
    if (!c.manifold.builtin.empty()) {
        m["builtin"] = c.manifold.builtin;
        m["n"] = c.manifold.n;
        if (!c.manifold.callback.empty()) m["callback"] = c.manifold.callback;
    } else {
        m["file"] = c.manifold.file;
    }
    j["manifold"] = m;
    Json f;
    if (!c.field.builtin.empty()) {
        f["builtin"] = c.field.builtin;
        if (c.field.builtin == "disk_indicator") f["radius"] = c.field.radius;
        if (c.field.builtin == "random") f["seed"] = c.field.seed;
    } else if (!c.field.csv.empty()) {
        f["csv"] = c.field.csv;
    }
    j["field"] = f;
    j["task"] = c.task;
    j["params"] = c.params;
    j["seed"] = c.seed;
    if (!c.out.empty()) j["out"] = c.out;
    return j;
}

ExperimentConfig config_from_json(const Json& j) {
    ExperimentConfig c;
    try {
        c.schema_version = j.value("schema_version", 1);
        if (c.schema_version != 1)
            throw ValidationError("config: unsupported schema_version");
        const Json& m = j.at("manifold");
        c.manifold.builtin = m.value("builtin", "");
        c.manifold.n = m.value("n", 0);
        c.manifold.callback = m.value("callback", "");
        c.manifold.file = m.value("file", "");
        if (j.contains("field")) {
            const Json& f = j.at("field");
            c.field.builtin = f.value("builtin", "");
            c.field.radius = f.value("radius", 0.2);
            c.field.seed = f.value("seed", std::uint64_t(0));
            c.field.csv = f.value("csv", "");
        }
        c.task = j.at("task");
        c.params = j.value("params", Json::object());
        c.seed = j.value("seed", std::uint64_t(1));
        c.out = j.value("out", "");
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("config JSON: ") + e.what());
    }
    return c;
}

DiscreteManifold realize_manifold(const ManifoldSource& src) {
    if (!src.builtin.empty()) {
        if (src.builtin == "cycle") return make_cycle(src.n);
        if (src.builtin == "path") return make_path(src.n);
        if (src.builtin == "flat_torus") return make_flat_torus(src.n);
        if (src.builtin == "parametric_torus")
            return make_parametric_torus(src.n, src.callback.empty() ? "ring" : src.callback);
        throw ValidationError("unknown builtin manifold: " + src.builtin);
    }
    if (src.file.empty()) throw ValidationError("config: manifold needs builtin or file");
    if (src.file.size() > 4 && src.file.substr(src.file.size() - 4) == ".off")
        return load_manifold_off(src.file);
    return load_manifold_json(src.file);
}

ScalarField realize_field(const FieldSource& src, const DiscreteManifold& M,
                          const ManifoldSource& msrc) {
    if (!src.builtin.empty()) {
        if (src.builtin == "step") return field_step(M);
        if (src.builtin == "sinusoid") return field_sinusoid(M);
        if (src.builtin == "random") return field_random(M, src.seed);
        if (src.builtin == "disk_indicator") {
            if (msrc.n <= 0)
                throw ValidationError("disk_indicator needs a builtin torus manifold");
            return field_disk_indicator(M, msrc.n, src.radius);
        }
        throw ValidationError("unknown builtin field: " + src.builtin);
    }
    if (src.csv.empty()) throw ValidationError("config: field needs builtin or csv");
    return load_field_csv(src.csv, M.num_vertices());
}

}  // namespace bvflow
