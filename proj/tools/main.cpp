#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gldeg/acceptance.hpp"
#include "gldeg/elliptic.hpp"
#include "gldeg/energy.hpp"
#include "gldeg/errors.hpp"
#include "gldeg/fields.hpp"
#include "gldeg/mesh.hpp"
#include "gldeg/mutation.hpp"
#include "gldeg/parallel.hpp"
#include "gldeg/relax.hpp"
#include "gldeg/series.hpp"

using json = nlohmann::json;
using namespace gldeg;

namespace {

constexpr const char* kVersion = "gldeg 1.0.0";
constexpr double kPi = std::numbers::pi;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitAcceptance = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All output goes through here: temp file in the same directory, then rename,
// so readers never observe a partial file.
void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + tmp.string());
        os << content;
    }
    std::filesystem::rename(tmp, path);
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream is(path);
    if (!is) throw ConfigError("config file not found: " + path);
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
}

template <typename T>
T get_field(const json& cfg, const std::string& path, const T& fallback) {
    const json* node = &cfg;
    std::istringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) {
        if (!node->is_object() || !node->contains(part)) return fallback;
        node = &(*node)[part];
    }
    try {
        return node->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config field '" + path + "' has the wrong type");
    }
}

template <typename T>
T require_field(const json& cfg, const std::string& path) {
    const json* node = &cfg;
    std::istringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) {
        if (!node->is_object() || !node->contains(part))
            throw ConfigError("missing config field '" + path + "'");
        node = &(*node)[part];
    }
    try {
        return node->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config field '" + path + "' has the wrong type");
    }
}

Circle parse_circle(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("center") || !j.contains("radius"))
        throw ConfigError("config field '" + where + "' needs {center:[x,y], radius}");
    auto c = j["center"].get<std::vector<double>>();
    if (c.size() != 2) throw ConfigError("config field '" + where + ".center' needs two numbers");
    return {{c[0], c[1]}, j["radius"].get<double>()};
}

// Domain object: {outer:{center,radius}, holes:[...], edge, refine:[{center,h}],
// pockets:[{loop, eta, angle, divisor}]}. Pocket entries add a refinement patch
// sized for the degree-mutation feature on that boundary loop.
DomainSpec parse_domain(const json& cfg) {
    if (!cfg.contains("domain")) throw ConfigError("missing config field 'domain'");
    const json& d = cfg["domain"];
    if (!d.is_object()) throw ConfigError("config field 'domain' must be an object");
    DomainSpec spec;
    spec.outer = parse_circle(d.value("outer", json::object()), "domain.outer");
    for (const auto& h : d.value("holes", json::array()))
        spec.holes.push_back(parse_circle(h, "domain.holes[]"));
    spec.target_edge_length = d.value("edge", 0.05);
    for (const auto& r : d.value("refine", json::array())) {
        auto c = r.at("center").get<std::vector<double>>();
        if (c.size() != 2) throw ConfigError("config field 'domain.refine[].center' needs two numbers");
        spec.refine.push_back({{c[0], c[1]}, r.at("h").get<double>()});
    }
    if (d.contains("pockets")) {
        DomainSpec coarse_spec = spec;
        coarse_spec.refine.clear();
        Mesh coarse = build_mesh(coarse_spec);
        for (const auto& p : d["pockets"]) {
            int loop = p.value("loop", 0);
            double eta = p.value("eta", 0.3);
            double angle = p.value("angle", 0.0);
            double divisor = p.value("divisor", 25.0);
            double rp = eta * std::sqrt(2.0 / kPi);
            DiskBump mb = build_M_eta_delta(0.25 * eta, 0.9);
            double feature = 2.0 * mb.t * rp / kPi;
            PocketSpec pk = pocket_for(coarse, loop, eta, angle);
            spec.refine.push_back({pk.center, std::max(feature / divisor, 5e-5)});
        }
    }
    spec.validate();
    return spec;
}

// product of unit windings around each hole, degree d_i on hole i
ComplexField winding_product(const Mesh& m, const std::vector<int>& d) {
    if (d.size() + 1 != static_cast<std::size_t>(m.loop_count()))
        throw ConfigError("config field 'd' needs one entry per hole");
    ComplexField u(m, cplx(1.0, 0.0));
    for (std::size_t i = 0; i < d.size(); ++i) {
        double cx = 0, cy = 0;
        const auto& loop = m.boundary_loops[i + 1];
        for (int v : loop) {
            cx += m.vertices[v].x;
            cy += m.vertices[v].y;
        }
        cx /= loop.size();
        cy /= loop.size();
        for (int v = 0; v < m.vertex_count(); ++v) {
            double phi = std::atan2(m.vertices[v].y - cy, m.vertices[v].x - cx);
            u.values[v] *= std::polar(1.0, d[i] * phi);
        }
    }
    return u;
}

struct Run {
    std::string subcommand;
    json config;
    std::filesystem::path out;
    long seed = 0;
    std::vector<std::string> outputs;

    void emit(const std::string& name, const std::string& content) {
        atomic_write(out / name, content);
        outputs.push_back(name);
    }

    void manifest(const std::string& status, json extra = json::object()) {
        json m;
        m["version"] = kVersion;
        m["subcommand"] = subcommand;
        m["config"] = config;
        m["seed"] = seed;
        m["status"] = status;
        m["outputs"] = outputs;
        for (auto& [k, v] : extra.items()) m[k] = v;
        atomic_write(out / "manifest.json", m.dump(2) + "\n");
    }
};

std::string fmt_row(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

int cmd_mesh(Run& run) {
    Mesh m = build_mesh(parse_domain(run.config));
    run.emit("mesh.txt", mesh_to_text(m));
    run.manifest("ok", {{"vertices", m.vertex_count()},
                        {"triangles", m.triangle_count()},
                        {"loops", m.loop_count()}});
    return kExitOk;
}

int cmd_harmonic(Run& run) {
    Mesh m = build_mesh(parse_domain(run.config));
    auto dvec = get_field<std::vector<int>>(run.config, "d",
                                            std::vector<int>(m.loop_count() - 1, 1));
    auto V = solve_all_V(m);
    for (std::size_t i = 0; i < V.size(); ++i)
        run.emit("V" + std::to_string(i + 1) + ".csv", scalar_field_to_csv(V[i]));
    H0Result h0 = solve_h0(m, dvec);
    run.emit("h0.csv", scalar_field_to_csv(h0.h0));
    ConjugateResult conj = harmonic_conjugate(winding_product(m, dvec));
    run.emit("conjugate.csv", scalar_field_to_csv(conj.h));
    json extra;
    extra["h0_hole_constants"] = h0.hole_constants;
    extra["h0_fluxes"] = h0.fluxes;
    run.manifest("ok", extra);
    return kExitOk;
}

int cmd_energy(Run& run) {
    Mesh m = build_mesh(parse_domain(run.config));
    auto dvec = get_field<std::vector<int>>(run.config, "d",
                                            std::vector<int>(m.loop_count() - 1, 1));
    double eps = get_field<double>(run.config, "eps", 0.1);
    ComplexField u = winding_product(m, dvec);
    EnergyReport rep = energy_GL(u, eps);
    double i0 = I0(m, dvec);
    std::string csv = "dirichlet,potential,total,I0\n" +
                      fmt_row("%.12e,%.12e,%.12e,%.12e\n", rep.dirichlet, rep.potential,
                              rep.total, i0);
    run.emit("energy.csv", csv);
    run.manifest("ok");
    return kExitOk;
}

int cmd_abdeg(Run& run) {
    Mesh m = build_mesh(parse_domain(run.config));
    auto dvec = get_field<std::vector<int>>(run.config, "d",
                                            std::vector<int>(m.loop_count() - 1, 1));
    ComplexField u = winding_product(m, dvec);
    auto ab = abdeg(u, solve_all_V(m));
    std::string csv = "hole,target,abdeg\n";
    for (std::size_t i = 0; i < ab.size(); ++i)
        csv += fmt_row("%zu,%d,%.12e\n", i + 1, dvec[i], ab[i]);
    run.emit("abdeg.csv", csv);
    run.manifest("ok");
    return kExitOk;
}

int cmd_mutate(Run& run) {
    Mesh m = build_mesh(parse_domain(run.config));
    auto dvec = require_field<std::vector<int>>(run.config, "dvec");
    double eta = get_field<double>(run.config, "eta", 0.3);
    double eps = get_field<double>(run.config, "eps", 0.1);
    auto base = get_field<std::vector<int>>(run.config, "d",
                                            std::vector<int>(m.loop_count() - 1, 0));
    ComplexField u = winding_product(m, base);
    BumpResult r = mutate_degrees(u, dvec, eta, eps);
    std::string csv = "extra_energy,l2_drift,budget\n" +
                      fmt_row("%.12e,%.12e,%.12e\n", r.extra_energy, r.l2_drift,
                              kPi * [&] {
                                  int s = 0;
                                  for (int x : dvec) s += std::abs(x);
                                  return s;
                              }() + eta);
    run.emit("mutation.csv", csv);
    run.emit("field.csv", complex_field_to_csv(r.u));
    run.manifest("ok");
    return kExitOk;
}

int cmd_testfn(Run& run) {
    int d = get_field<int>(run.config, "d", 1);
    double r = get_field<double>(run.config, "r", 0.3);
    double eps = get_field<double>(run.config, "eps", 0.05);
    TestFnParams base;
    base.delta = get_field<double>(run.config, "delta", 0.5);
    base.K = get_field<int>(run.config, "K", 512);
    std::vector<double> ts;
    if (run.config.contains("t") && run.config["t"].is_array())
        ts = run.config["t"].get<std::vector<double>>();
    else
        ts = {get_field<double>(run.config, "t", 0.02)};
    std::string csv = "t,M_lambda,bound,pi_margin,deg_outer\n";
    bool all_chain = true;
    for (double t : ts) {
        TestFnParams p = base;
        p.t = t;
        TestFnReport rep = verify_testfn(d, r, p, eps);
        csv += fmt_row("%.6g,%.12e,%.12e,%.12e,%d\n", t, rep.M_raw, rep.bound, rep.pi_margin,
                       rep.deg_outer);
        all_chain = all_chain && rep.chain_ok;
    }
    run.emit("testfn.csv", csv);
    run.manifest(all_chain ? "ok" : "chain_failed", {{"chain_ok", all_chain}});
    return all_chain ? kExitOk : kExitAcceptance;
}

int cmd_verify_series(Run& run) {
    auto checks = default_series_suite();
    run.emit("series.csv", series_checks_to_csv(checks));
    int fails = 0;
    for (const auto& c : checks) fails += c.pass ? 0 : 1;
    run.manifest(fails == 0 ? "ok" : "failed",
                 {{"rows", checks.size()}, {"failures", fails}});
    return fails == 0 ? kExitOk : kExitAcceptance;
}

int cmd_minimize(Run& run) {
    Mesh m = build_mesh(parse_domain(run.config));
    auto p = require_field<std::vector<int>>(run.config, "p");
    int q = require_field<int>(run.config, "q");
    auto d = require_field<std::vector<int>>(run.config, "d");
    double eps = get_field<double>(run.config, "eps", 0.05);
    FlowOptions opts;
    opts.max_steps = get_field<int>(run.config, "max_steps", 600);
    opts.tol = get_field<double>(run.config, "tol", 1e-3);
    opts.checkpoint_every = get_field<int>(run.config, "checkpoint_every", 2);
    LocalMinReport rep = local_min_experiment(p, q, d, eps, m, opts);

    std::string conv = "step,energy,residual\n";
    const auto& hist = rep.flow.energy_history;
    for (std::size_t s = 0; s < hist.size(); ++s)
        conv += fmt_row("%zu,%.12e,%s\n", s, hist[s],
                        s + 1 == hist.size() ? fmt_row("%.12e", rep.flow.residual.interior).c_str()
                                             : "");
    run.emit("convergence.csv", conv);
    run.emit("field.csv", complex_field_to_csv(rep.flow.u));

    std::string ckpt = "step,energy,l2_increment,min_edge_modulus,q,abdeg0\n";
    for (const auto& c : rep.flow.checkpoints)
        ckpt += fmt_row("%d,%.12e,%.12e,%.6f,%d,%.6f\n", c.step, c.energy, c.l2_increment,
                        c.min_edge_modulus, c.spec.q, c.spec.abdeg.empty() ? 0.0 : c.spec.abdeg[0]);
    run.emit("checkpoints.csv", ckpt);

    json extra;
    extra["converged"] = rep.flow.converged;
    extra["crossing_detected"] = rep.flow.crossing_detected;
    extra["I0"] = rep.I0_value;
    extra["ae"] = rep.ae;
    extra["target_energy"] = rep.target_energy;
    extra["converged_energy"] = rep.converged_energy;
    extra["ratio"] = rep.ratio;
    extra["member"] = rep.member;
    extra["class_escape"] = rep.class_escape;
    extra["vortex_count"] = rep.vortices.size();
    run.manifest("ok", extra);
    return kExitOk;
}

int cmd_suite(Run& run) {
    auto results = run_acceptance();
    run.emit("acceptance.txt", acceptance_to_text(results));
    json crits = json::array();
    int fails = 0;
    for (const auto& r : results) {
        crits.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
        fails += r.pass ? 0 : 1;
    }
    run.manifest(fails == 0 ? "ok" : "failed", {{"criteria", crits}, {"failures", fails}});
    return fails == 0 ? kExitOk : kExitAcceptance;
}

} // namespace

int main(int argc, char** argv) {
    init_threads();
    CLI::App app{"Ginzburg-Landau boundary-degree toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir = ".";
    long seed = 0;
    app.add_option("--config,-c", config_path, "JSON parameter file")->capture_default_str();
    app.add_option("--out,-o", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seed, "run seed, echoed in the manifest")->capture_default_str();

    struct Entry {
        const char* name;
        const char* help;
        int (*fn)(Run&);
    };
    const Entry entries[] = {
        {"mesh", "triangulate the domain and export it", cmd_mesh},
        {"harmonic", "harmonic weights V_i, h0 field, and conjugate", cmd_harmonic},
        {"energy", "Ginzburg-Landau energy of the winding state", cmd_energy},
        {"abdeg", "approximate bulk degrees of the winding state", cmd_abdeg},
        {"mutate", "shift boundary degrees by pocket insertion", cmd_mutate},
        {"testfn", "chart functional of the boundary test function", cmd_testfn},
        {"verify-series", "run the power-series oracle battery", cmd_verify_series},
        {"minimize", "gradient flow in a prescribed degree class", cmd_minimize},
        {"suite", "full acceptance battery", cmd_suite},
    };
    for (const Entry& e : entries) app.add_subcommand(e.name, e.help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kExitConfig : kExitOk;
    }

    Run run;
    run.subcommand = app.get_subcommands().front()->get_name();
    run.out = out_dir;
    run.seed = seed;
    try {
        std::filesystem::create_directories(run.out);
        run.config = load_config(config_path);
        for (const Entry& e : entries)
            if (run.subcommand == e.name) return e.fn(run);
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        run.manifest("config_error", {{"error", e.what()}, {"error_class", "config"}});
        return kExitConfig;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        run.manifest("config_error", {{"error", e.what()}, {"error_class", "config"}});
        return kExitConfig;
    } catch (const ParameterError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        run.manifest("config_error", {{"error", e.what()}, {"error_class", "parameter"}});
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        run.manifest("numeric_error", {{"error", e.what()}, {"error_class", "numeric"}});
        return kExitNumeric;
    }
}
