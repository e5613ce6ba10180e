#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "bvflow/builtins.hpp"
#include "bvflow/curvature.hpp"
#include "bvflow/heat.hpp"
#include "bvflow/io.hpp"
#include "bvflow/stochastic.hpp"
#include "bvflow/suite.hpp"
#include "bvflow/variation.hpp"

using namespace bvflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitAcceptance = 4;

void emit(const Json& report, const std::string& out) {
    if (out.empty()) {
        std::cout << report.dump(2) << std::endl;
    } else {
        std::ofstream f(out);
        if (!f) throw ValidationError("cannot write output file: " + out);
        f << report.dump(2) << '\n';
    }
}

Json curve_to_json(const HeatflowCurve& c) {
    Json j;
    j["t"] = c.t;
    j["V"] = c.V;
    j["limit_last"] = c.limit_last;
    j["limit_richardson"] = c.limit_richardson;
    return j;
}

Json variation_to_json(const VariationResult& v) {
    Json j;
    j["value"] = v.value;
    j["method"] = v.method == VariationMethod::dual
                      ? "dual"
                      : (v.method == VariationMethod::gradient_l1 ? "gradient_l1" : "heatflow");
    j["iterations"] = v.iterations;
    j["duality_gap"] = v.duality_gap;
    j["converged"] = v.converged;
    return j;
}

Json fk_to_json(const FKResult& r) {
    Json j;
    j["mean"] = r.mean;
    j["std_error"] = r.std_error;
    j["ci_lo"] = r.ci_lo;
    j["ci_hi"] = r.ci_hi;
    j["survival"] = r.survival;
    j["overflow"] = r.overflow;
    return j;
}

int run_suite(int threads, const std::string& out) {
    int failures = 0;
    Json rows = Json::array();
    auto results = run_acceptance_suite(threads, [&](const CriterionResult& r) {
        std::printf("%s  criterion %2d: %s (%s) [%.1f s]\n", r.pass ? "PASS" : "FAIL",
                    r.id, r.name.c_str(), r.detail.c_str(), r.seconds);
        std::fflush(stdout);
        if (!r.pass) ++failures;
    });
    for (const auto& r : results)
        rows.push_back({{"id", r.id},
                        {"name", r.name},
                        {"pass", r.pass},
                        {"seconds", r.seconds},
                        {"detail", r.detail}});
    std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures,
                results.size());
    if (!out.empty()) emit(Json{{"criteria", rows}, {"failures", failures}}, out);
    return failures == 0 ? kExitOk : kExitAcceptance;
}

std::vector<double> parse_schedule(const std::string& spec, const DiscreteManifold& M) {
    if (spec.empty()) return default_t_schedule(M);
    std::vector<double> t;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) t.push_back(std::stod(tok));
    return t;
}

int run_config(const ExperimentConfig& cfg, int threads) {
    DiscreteManifold M = realize_manifold(cfg.manifold);
    Json report;
    report["task"] = cfg.task;
    if (cfg.task == "suite") return run_suite(threads, cfg.out);

    MonteCarloParams mc;
    mc.seed = cfg.seed;
    mc.threads = threads;
    if (cfg.params.contains("samples")) mc.samples = cfg.params.at("samples");

    if (cfg.task == "var" || cfg.task == "curve" || cfg.task == "polar") {
        ScalarField f = realize_field(cfg.field, M, cfg.manifold);
        if (cfg.task == "var") {
            report["gradient_l1"] = variation_to_json(variation_gradient_l1(M, f));
            report["dual"] = variation_to_json(variation_dual(M, f));
        } else if (cfg.task == "curve") {
            HeatOperator H = build_heat_operator(M);
            std::vector<double> sched = cfg.params.contains("schedule")
                                            ? cfg.params.at("schedule").get<std::vector<double>>()
                                            : default_t_schedule(M);
            report["curve"] = curve_to_json(variation_heatflow(M, H, f, sched));
        } else {
            VectorMeasure nu = polar_decompose(M, f);
            Json sites = Json::array();
            for (int s = 0; s < M.num_sites(); ++s) {
                Json rec{{"site", s}, {"mass", nu.mass[s]}};
                if (M.mode == Mode::graph)
                    rec["sigma"] = {nu.sigma.edge[s].real(), nu.sigma.edge[s].imag()};
                else
                    rec["sigma"] = {nu.sigma.tri(0, s).real(), nu.sigma.tri(0, s).imag(),
                                    nu.sigma.tri(1, s).real(), nu.sigma.tri(1, s).imag()};
                sites.push_back(rec);
            }
            report["total_mass"] = nu.mass.sum();
            report["sites"] = sites;
        }
    } else if (cfg.task == "kato" || cfg.task == "kasminskii") {
        HeatOperator H = build_heat_operator(M, HeatStrategy::spectral);
        Eigen::VectorXd w;
        if (cfg.params.contains("modulus_csv")) {
            ScalarField wf = load_field_csv(cfg.params.at("modulus_csv"), M.num_vertices());
            w = wf.real();
        } else {
            w = Eigen::VectorXd::Constant(M.num_vertices(),
                                          cfg.params.value("modulus_const", 1.0));
        }
        std::vector<double> grid =
            cfg.params.value("t_grid", std::vector<double>{0.01, 0.05, 0.1, 0.2, 0.4});
        if (cfg.task == "kato") {
            KatoReport k = kato_modulus(M, H, w, grid);
            report["t"] = k.t;
            report["D"] = k.D;
            report["argmax_x"] = k.argmax_x;
            report["decay_exponent"] = k.decay_exponent;
        } else {
            WalkModel W = build_walk(M, H);
            double delta = cfg.params.value("delta", 2.0);
            std::vector<double> tests =
                cfg.params.value("t_tests", std::vector<double>{0.5, 1.0, 2.0});
            KasminskiiCertificate cert =
                kasminskii_certify(M, W, H, w, delta, grid, tests, mc);
            report["refused"] = cert.refused;
            report["valid"] = cert.valid;
            report["s"] = cert.s;
            report["D_at_s"] = cert.D_at_s;
            report["C"] = cert.C;
            Json tj = Json::array();
            for (const auto& t : cert.tests)
                tj.push_back({{"t", t.t},
                              {"sup_estimate", t.sup_estimate},
                              {"sup_upper_ci", t.sup_upper_ci},
                              {"bound", t.bound},
                              {"pass", t.pass}});
            report["tests"] = tj;
        }
    } else {
        throw ValidationError("config: unknown task '" + cfg.task + "'");
    }
    emit(report, cfg.out);
    return kExitOk;
}

DiscreteManifold manifold_from_flags(const std::string& builtin, int n,
                                     const std::string& file, const std::string& callback) {
    ManifoldSource src;
    src.builtin = builtin;
    src.n = n;
    src.file = file;
    src.callback = callback;
    return realize_manifold(src);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"variation, heat semigroups and stochastic certificates on "
                 "discrete manifolds"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "worker threads for Monte Carlo (0 = auto)");

    // shared manifold/field flags, reused by several subcommands
    struct Common {
        std::string manifold = "cycle";
        int n = 64;
        std::string file, callback;
        std::string field = "step";
        std::string field_csv;
        double radius = 0.2;
        std::uint64_t seed = 1;
        std::string out;
    };
    auto add_common = [](CLI::App* c, Common& o) {
        c->add_option("--manifold", o.manifold,
                      "builtin: cycle|path|flat_torus|parametric_torus (empty with --file)");
        c->add_option("--n", o.n, "builtin size parameter");
        c->add_option("--file", o.file, "manifold file (.json or .off)");
        c->add_option("--callback", o.callback, "parametric_torus embedding id");
        c->add_option("--field", o.field, "builtin: step|sinusoid|disk_indicator|random");
        c->add_option("--field-csv", o.field_csv, "field CSV (overrides --field)");
        c->add_option("--radius", o.radius, "disk_indicator radius");
        c->add_option("--seed", o.seed, "random seed");
        c->add_option("--out", o.out, "output JSON path (default: stdout)");
    };
    auto realize = [](const Common& o, DiscreteManifold& M, ScalarField& f) {
        ManifoldSource ms;
        ms.builtin = o.file.empty() ? o.manifold : "";
        ms.n = o.n;
        ms.file = o.file;
        ms.callback = o.callback;
        M = realize_manifold(ms);
        FieldSource fs;
        if (o.field_csv.empty()) {
            fs.builtin = o.field;
            fs.radius = o.radius;
            fs.seed = o.seed;
        } else {
            fs.csv = o.field_csv;
        }
        f = realize_field(fs, M, ms);
    };

    // bv ----------------------------------------------------------------
    Common bv_opt;
    std::string bv_task = "var";
    std::string bv_schedule;
    auto* bv = app.add_subcommand("bv", "variation, heat-flow curves, polar decomposition");
    add_common(bv, bv_opt);
    bv->add_option("--task", bv_task, "var | curve | polar");
    bv->add_option("--schedule", bv_schedule, "comma-separated decreasing t values");

    // heat --------------------------------------------------------------
    Common heat_opt;
    double heat_t = 0.1;
    int heat_kernel_row = -1;
    auto* heat = app.add_subcommand("heat", "apply the heat semigroup / kernel rows");
    add_common(heat, heat_opt);
    heat->add_option("--t", heat_t, "diffusion time");
    heat->add_option("--kernel-row", heat_kernel_row, "emit p(t, x, .) for this vertex");

    // curv --------------------------------------------------------------
    std::string curv_endo_csv, curv_out;
    int curv_m = 2;
    auto* curv = app.add_subcommand("curv", "curvature endomorphism decomposition");
    curv->add_option("--endo-csv", curv_endo_csv, "endomorphism field CSV")->required();
    curv->add_option("--m", curv_m, "fiber dimension");
    curv->add_option("--out", curv_out, "output JSON path");

    // mc ----------------------------------------------------------------
    Common mc_opt;
    std::string mc_task = "fk";
    double mc_t = 0.5, mc_delta = 2.0;
    int mc_start = 0;
    std::int64_t mc_samples = 100000;
    double mc_modulus_const = 1.0;
    std::string mc_modulus_csv;
    auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo: Feynman-Kac, Kato, Khas'minskii");
    add_common(mc_cmd, mc_opt);
    mc_cmd->add_option("--task", mc_task, "fk | kato | kasminskii");
    mc_cmd->add_option("--t", mc_t, "time horizon");
    mc_cmd->add_option("--start", mc_start, "start vertex (fk)");
    mc_cmd->add_option("--samples", mc_samples, "Monte Carlo samples");
    mc_cmd->add_option("--delta", mc_delta, "Khas'minskii delta > 1");
    mc_cmd->add_option("--modulus-const", mc_modulus_const, "constant potential modulus");
    mc_cmd->add_option("--modulus-csv", mc_modulus_csv, "per-vertex modulus CSV");

    // suite / run -------------------------------------------------------
    std::string suite_out;
    auto* suite = app.add_subcommand("suite", "run the acceptance battery");
    suite->add_option("--out", suite_out, "write the JSON report here");

    std::string run_config_path;
    auto* runc = app.add_subcommand("run", "execute a JSON experiment config");
    runc->add_option("--config", run_config_path, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (suite->parsed()) return run_suite(threads, suite_out);

        if (runc->parsed()) {
            std::ifstream in(run_config_path);
            if (!in) throw ValidationError("cannot open config: " + run_config_path);
            Json j;
            try {
                in >> j;
            } catch (const std::exception& e) {
                throw ValidationError(std::string("malformed config JSON: ") + e.what());
            }
            return run_config(config_from_json(j), threads);
        }

        if (bv->parsed()) {
            DiscreteManifold M;
            ScalarField f;
            realize(bv_opt, M, f);
            Json report{{"task", bv_task}};
            if (bv_task == "var") {
                report["gradient_l1"] = variation_to_json(variation_gradient_l1(M, f));
                report["dual"] = variation_to_json(variation_dual(M, f));
            } else if (bv_task == "curve") {
                HeatOperator H = build_heat_operator(M);
                report["curve"] = curve_to_json(
                    variation_heatflow(M, H, f, parse_schedule(bv_schedule, M)));
            } else if (bv_task == "polar") {
                VectorMeasure nu = polar_decompose(M, f);
                report["total_mass"] = nu.mass.sum();
                report["bv_norm"] = bv_norm(M, f);
            } else {
                throw ValidationError("bv: unknown task '" + bv_task + "'");
            }
            emit(report, bv_opt.out);
            return kExitOk;
        }

        if (heat->parsed()) {
            DiscreteManifold M;
            ScalarField f;
            realize(heat_opt, M, f);
            HeatOperator H = build_heat_operator(M);
            Json report{{"t", heat_t}};
            if (heat_kernel_row >= 0) {
                Eigen::VectorXd row = H.kernel_row(heat_t, heat_kernel_row);
                report["kernel_row"] = std::vector<double>(row.data(), row.data() + row.size());
            } else {
                ScalarField g = H.apply(f, heat_t);
                Json field = Json::array();
                for (Eigen::Index i = 0; i < g.size(); ++i)
                    field.push_back({g[i].real(), g[i].imag()});
                report["field"] = field;
            }
            emit(report, heat_opt.out);
            return kExitOk;
        }

        if (curv->parsed()) {
            EndomorphismField R = load_endomorphism_csv(curv_endo_csv, curv_m);
            auto [P, N] = spectral_parts(R);
            RicciDecomposition dec{P, N};
            auto [w1, w2] = scalar_potentials(dec);
            Json report;
            report["w1"] = std::vector<double>(w1.data(), w1.data() + w1.size());
            report["w2"] = std::vector<double>(w2.data(), w2.data() + w2.size());
            emit(report, curv_out);
            return kExitOk;
        }

        if (mc_cmd->parsed()) {
            DiscreteManifold M;
            ScalarField f;
            realize(mc_opt, M, f);
            HeatOperator H = build_heat_operator(M, HeatStrategy::spectral);
            Eigen::VectorXd w;
            if (!mc_modulus_csv.empty())
                w = load_field_csv(mc_modulus_csv, M.num_vertices()).real();
            else
                w = Eigen::VectorXd::Constant(M.num_vertices(), mc_modulus_const);
            MonteCarloParams params;
            params.samples = mc_samples;
            params.seed = mc_opt.seed;
            params.threads = threads > 0
                                 ? threads
                                 : static_cast<int>(std::thread::hardware_concurrency());
            Json report{{"task", mc_task}};
            if (mc_task == "fk") {
                WalkModel W = build_walk(M, H);
                report["result"] = fk_to_json(feynman_kac(W, w, mc_t, mc_start, params));
            } else if (mc_task == "kato") {
                KatoReport k = kato_modulus(M, H, w, {mc_t / 8, mc_t / 4, mc_t / 2, mc_t});
                report["t"] = k.t;
                report["D"] = k.D;
                report["decay_exponent"] = k.decay_exponent;
            } else if (mc_task == "kasminskii") {
                WalkModel W = build_walk(M, H);
                std::vector<double> grid{mc_t / 16, mc_t / 8, mc_t / 4, mc_t / 2, mc_t};
                KasminskiiCertificate cert = kasminskii_certify(
                    M, W, H, w, mc_delta, grid, {mc_t, 2 * mc_t, 4 * mc_t}, params);
                report["refused"] = cert.refused;
                report["valid"] = cert.valid;
                report["C"] = cert.C;
                report["s"] = cert.s;
                report["D_at_s"] = cert.D_at_s;
            } else {
                throw ValidationError("mc: unknown task '" + mc_task + "'");
            }
            emit(report, mc_opt.out);
            return kExitOk;
        }
    } catch (const ValidationError& e) {
        Json err{{"error", "validation"}, {"message", e.what()}};
        std::cerr << err.dump() << std::endl;
        return kExitValidation;
    } catch (const SolverError& e) {
        Json err{{"error", "solver"}, {"message", e.what()}};
        std::cerr << err.dump() << std::endl;
        return kExitSolver;
    }
    return kExitOk;
}
