#include "critns/cli.hpp"

#include <fftw3.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "critns/field_io.hpp"
#include "critns/fields.hpp"
#include "critns/littlewood_paley.hpp"
#include "critns/spectral.hpp"
#include "critns/trajectory_io.hpp"

namespace critns {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

double num(const json& j, const char* key, double def) { return j.contains(key) ? json_to_double(j.at(key)) : def; }

double num_req(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    return json_to_double(j.at(key));
}

const json& req(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    return j.at(key);
}

Vec3 vec3(const json& j, Vec3 def = {0.0, 0.0, 0.0}) {
    if (j.is_null()) return def;
    if (!j.is_array() || j.size() > 3) throw ConfigError("expected an array of up to 3 numbers");
    Vec3 v{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = json_to_double(j[i]);
    return v;
}

json vec_json(const Vec3& v, int d) {
    json a = json::array();
    for (int i = 0; i < d; ++i) a.push_back(v[i]);
    return a;
}

json warnings_json(const std::vector<std::string>& w) { return json(w); }

std::string iso_now() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void write_json(const json& j, const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot write " + path.string());
    os << j.dump(2) << '\n';
}

const Grid* optional_grid(const json& cfg, Grid& storage) {
    if (!cfg.contains("grid")) return nullptr;
    storage = grid_from_json(cfg.at("grid"));
    return &storage;
}

struct Run {
    fs::path out;
    std::vector<std::string> artifacts;
    json results = json::object();

    void emit(const std::string& name, const json& j) {
        write_json(j, out / name);
        artifacts.push_back(name);
    }
    void emit_field(const std::string& name, const RealField& f) {
        write_cfd(f, out / name);
        artifacts.push_back(name);
    }
};

int status_exit(RunStatus s) { return s == RunStatus::NonFinite ? 2 : 0; }

// ---- commands ----

int cmd_norm(const json& cfg, const ConfigContext& ctx, Run& run, std::ostream& out) {
    check_keys(cfg, {"field", "grid", "norm"}, "norm");
    Grid gs;
    const Grid* g = optional_grid(cfg, gs);
    RealField f = field_from_json(req(cfg, "field", "norm"), g, ctx);
    const json spec = cfg.value("norm", json{{"kind", "lebesgue"}});
    check_keys(spec, {"kind", "p", "q", "s"}, "norm.norm");
    const std::string kind = spec.value("kind", "lebesgue");
    const int d = f.grid().dim();
    const double p = num(spec, "p", d);
    const double q = num(spec, "q", p);
    const double s = num(spec, "s", critical_exponent(d, p));
    json rep{{"norm_name", kind}};
    NormResult r;
    if (kind == "lebesgue") {
        r.value = lebesgue_norm(f, p);
        rep["parameters"] = {{"p", json_number(p)}};
    } else if (kind == "besov") {
        r = besov_norm(f, {s, p, q});
        rep["parameters"] = {{"s", s}, {"p", json_number(p)}, {"q", json_number(q)}};
    } else if (kind == "heat_besov") {
        r = heat_besov_norm(f, {s, p, q});
        rep["parameters"] = {{"s", s}, {"p", json_number(p)}, {"q", json_number(q)}};
    } else if (kind == "L3") {
        r.value = critical_norm(f, CriticalNormKind::L3);
        rep["parameters"] = json::object();
    } else {
        throw ConfigError("norm: unknown kind '" + kind + "'");
    }
    rep["value"] = json_number(r.value);
    rep["warnings"] = warnings_json(r.warnings);
    run.emit("norm.json", rep);
    run.results = rep;
    out << rep.dump(2) << '\n';
    return 0;
}

int cmd_lp(const json& cfg, const ConfigContext& ctx, Run& run, std::ostream& out) {
    check_keys(cfg, {"field", "grid", "p", "bands"}, "lp");
    Grid gs;
    const Grid* g = optional_grid(cfg, gs);
    RealField f = field_from_json(req(cfg, "field", "lp"), g, ctx);
    const double p = num(cfg, "p", 2.0);
    LPBandSet set = lp_decompose(f);
    std::vector<int> bands;
    if (cfg.contains("bands")) {
        for (const auto& b : cfg.at("bands")) {
            int j = b.get<int>();
            if (!set.range.contains(j)) throw DomainError("lp: band " + std::to_string(j) + " outside the resolvable range");
            bands.push_back(j);
        }
    } else {
        for (int j = set.range.j_min; j <= set.range.j_max; ++j) bands.push_back(j);
    }
    json rows = json::array();
    for (int j : bands) {
        const RealField& b = set.band(j);
        std::string name = "band_" + std::to_string(j) + ".cfd";
        run.emit_field(name, b);
        rows.push_back({{"j", j}, {"norm", lebesgue_norm(b, p)}, {"file", name}, {"empty", b.max_abs() == 0.0}});
    }
    run.emit_field("mean.cfd", set.below);
    json rep{{"j_min", set.range.j_min}, {"j_max", set.range.j_max}, {"p", p}, {"bands", rows}};
    run.emit("lp.json", rep);
    run.results = {{"j_min", set.range.j_min}, {"j_max", set.range.j_max}, {"bands_written", bands.size()}};
    out << rep.dump(2) << '\n';
    return 0;
}

json trajectory_summary(const Trajectory& tr) {
    return {{"status", to_string(tr.status)},
            {"end_time", tr.end_time},
            {"detail", tr.detail},
            {"snapshots", tr.size()}};
}

int cmd_evolve(const json& cfg, const ConfigContext& ctx, Run& run, std::ostream& out) {
    check_keys(cfg, {"field", "grid", "solver", "reference"}, "evolve");
    Grid gs;
    const Grid* g = optional_grid(cfg, gs);
    RealField u0 = field_from_json(req(cfg, "field", "evolve"), g, ctx);
    SolverConfig sc = solver_from_json(cfg.value("solver", json::object()));
    Trajectory tr = evolve(u0, sc);
    save_trajectory(tr, run.out / "trajectory", cfg);
    run.artifacts.push_back("trajectory/");
    json rep = trajectory_summary(tr);
    if (cfg.contains("reference")) {
        const json& ref = cfg.at("reference");
        check_keys(ref, {"type", "amplitude"}, "evolve.reference");
        if (ref.value("type", "") != "taylor_green") throw ConfigError("evolve.reference: only taylor_green is known");
        if (tr.status == RunStatus::Completed) {
            const Grid& gg = u0.grid();
            const double kf = 2.0 * std::numbers::pi / gg.length();
            const double t = tr.finish();
            RealField exact = taylor_green_2d(gg, num(ref, "amplitude", 1.0) * std::exp(-2.0 * kf * kf * t));
            RealField err = tr.snapshots.back() - exact;
            run.emit_field("final_error.cfd", err);
            rep["final_error_max"] = err.max_abs();
            rep["final_error_time"] = t;
        }
    }
    run.emit("evolve.json", rep);
    run.results = rep;
    out << rep.dump(2) << '\n';
    return status_exit(tr.status);
}

// Profile j at index n runs in its own frame: horizon and step scaled by lambda^-2, sup cap by lambda.
SolverConfig profile_config(const SolverConfig& base, double lambda) {
    SolverConfig c = base;
    const double l2 = lambda * lambda;
    c.T = base.T / l2;
    c.dt = base.dt / l2;
    c.max_sup = base.max_sup * lambda;
    return c;
}

int cmd_superpose(const json& cfg, const ConfigContext& ctx, Run& run, std::ostream& out) {
    check_keys(cfg, {"grid", "system", "solver", "n_values", "p", "validate", "diagnostics"}, "superpose");
    Grid gs;
    const Grid* g = optional_grid(cfg, gs);
    ProfileSystem sys = profile_system_from_json(req(cfg, "system", "superpose"), g, ctx);
    if (cfg.value("validate", true)) sys.validate();
    const SolverConfig sc = solver_from_json(cfg.value("solver", json::object()));
    const double p = num(cfg, "p", 3.0);
    const bool diag = cfg.value("diagnostics", false);
    std::vector<int> ns;
    for (const auto& v : req(cfg, "n_values", "superpose")) ns.push_back(v.get<int>());
    if (ns.empty()) throw ConfigError("superpose: n_values is empty");

    json rows = json::array();
    int code = 0;
    std::vector<double> enorms;
    for (int n : ns) {
        std::vector<SolverConfig> cfgs;
        for (int j = 0; j <= sys.J(); ++j) cfgs.push_back(profile_config(sc, sys.core(j, n).lambda));
        EvolvedSystem ev = evolve_profiles(sys, cfgs);
        Trajectory u = evolve(synthesize_datum(sys, n), sc);
        double cover = u.finish();
        json statuses = json::array();
        for (int j = 0; j <= sys.J(); ++j) {
            const double l = sys.core(j, n).lambda;
            cover = std::min(cover, l * l * ev.U[static_cast<std::size_t>(j)].finish());
            statuses.push_back(to_string(ev.U[static_cast<std::size_t>(j)].status));
            if (ev.U[static_cast<std::size_t>(j)].status == RunStatus::NonFinite) code = 2;
        }
        if (u.status == RunStatus::NonFinite) code = 2;
        Trajectory uc = restrict(u, 0.0, cover, 1e-9);
        RemainderResult rr = remainder(uc, ev, sys, n, p);
        Ordering ord = order_profiles(sys, ev.lifespans, n);
        json row{{"n", n},
                 {"remainder_e_norm", json_number(rr.e_norm)},
                 {"horizon", cover},
                 {"u_status", to_string(u.status)},
                 {"profile_status", statuses},
                 {"ordering", ord.permutation},
                 {"tau", json_number(ord.tau)},
                 {"warnings", warnings_json(rr.warnings)}};
        if (diag && uc.size() >= 2) {
            SourceNorms sn = source_norms(ev, sys, n, uc.times, p);
            row["source"] = {{"part1", sn.part1}, {"part2", sn.part2}, {"cross", sn.cross},
                             {"zeta", sn.zeta},   {"ww", sn.ww},       {"upper_bound", sn.upper_bound()}};
            row["drift_norm"] = drift_norm(ev, sys, n, uc.times, p).value;
        }
        rows.push_back(row);
        enorms.push_back(rr.e_norm);
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < enorms.size(); ++i) decreasing = decreasing && enorms[i] < enorms[i - 1];
    json rep{{"p", p}, {"rows", rows}, {"strictly_decreasing", decreasing}};
    run.emit("superpose.json", rep);
    run.results = {{"strictly_decreasing", decreasing}, {"remainder_e_norm", enorms}};
    out << rep.dump(2) << '\n';
    return code;
}

int cmd_ortho(const json& cfg, const ConfigContext& ctx, Run& run, std::ostream& out) {
    check_keys(cfg, {"grid", "field_a", "field_b", "sequence_a", "sequence_b", "p", "K", "thresholds"}, "ortho");
    Grid gs;
    const Grid* g = optional_grid(cfg, gs);
    RealField fa = field_from_json(req(cfg, "field_a", "ortho"), g, ctx);
    RealField fb = field_from_json(req(cfg, "field_b", "ortho"), g, ctx);
    ScaleCoreSequence sa = cores_from_json(req(cfg, "sequence_a", "ortho"));
    ScaleCoreSequence sb = cores_from_json(req(cfg, "sequence_b", "ortho"));
    if (sa.size() != sb.size()) throw ConfigError("ortho: sequences differ in length");
    const double p = num(cfg, "p", fa.grid().dim());
    OrthogonalityThresholds th;
    if (cfg.contains("thresholds")) {
        check_keys(cfg.at("thresholds"), {"theta_lambda", "theta_x"}, "ortho.thresholds");
        th.theta_lambda = num(cfg.at("thresholds"), "theta_lambda", th.theta_lambda);
        th.theta_x = num(cfg.at("thresholds"), "theta_x", th.theta_x);
    }
    const int K = cfg.value("K", 3);
    json rows = json::array();
    std::vector<double> ct, df;
    for (std::size_t n = 0; n < sa.size(); ++n) {
        double c = cross_term_symmetric(fa, fb, sa[n], sb[n], p);
        double dd = std::abs(norm_additivity_defect(fa, fb, sa[n], sb[n], p));
        ct.push_back(c);
        df.push_back(dd);
        rows.push_back({{"n", n}, {"cross_term", c}, {"defect", dd}});
    }
    auto strictly = [](const std::vector<double>& v) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (!(v[i] < v[i - 1])) return false;
        return true;
    };
    json rep{{"p", p}, {"rows", rows}, {"cross_decreasing", strictly(ct)}, {"defect_decreasing", strictly(df)}};
    if (static_cast<int>(sa.size()) >= K && K >= 3) rep["verdict"] = to_string(orthogonality_check(sa, sb, K, th));
    run.emit("ortho.json", rep);
    run.results = {{"cross_decreasing", strictly(ct)}, {"defect_decreasing", strictly(df)}};
    out << rep.dump(2) << '\n';
    return 0;
}

FieldFn constant_field(RealField f) {
    return [f = std::move(f)](double) { return f; };
}

int cmd_perturb(const json& cfg, const ConfigContext& ctx, Run& run, std::ostream& out) {
    check_keys(cfg, {"grid", "solver", "p", "w0", "drift", "force_part1", "force_part2"}, "perturb");
    Grid gs;
    const Grid* g = optional_grid(cfg, gs);
    PerturbationProblem prob;
    prob.w0 = field_from_json(req(cfg, "w0", "perturb"), g, ctx);
    const Grid& grid = prob.w0.grid();
    if (cfg.contains("drift")) {
        const json& dj = cfg.at("drift");
        check_keys(dj, {"field", "flow"}, "perturb.drift");
        RealField f = field_from_json(req(dj, "field", "perturb.drift"), &grid, ctx);
        const std::string flow = dj.value("flow", "heat");
        if (flow == "heat")
            prob.drift = [f](double t) { return heat_semigroup(f, t); };
        else if (flow == "frozen")
            prob.drift = constant_field(f);
        else
            throw ConfigError("perturb.drift.flow must be 'heat' or 'frozen'");
    }
    if (cfg.contains("force_part1")) prob.force_part1 = constant_field(field_from_json(cfg.at("force_part1"), &grid, ctx));
    if (cfg.contains("force_part2")) prob.force_part2 = constant_field(field_from_json(cfg.at("force_part2"), &grid, ctx));
    SolverConfig sc = solver_from_json(cfg.value("solver", json::object()));
    const double p = num(cfg, "p", 3.0);
    PerturbationReport r = verify_perturbation_bound(prob, sc, p);
    json rep = to_json(r);
    run.emit("perturb.json", rep);
    run.results = rep;
    out << rep.dump(2) << '\n';
    return status_exit(r.status);
}

DatumFamily family_from_json(const json& j, const Grid* g, const ConfigContext& ctx) {
    check_keys(j, {"base", "alpha_lo", "alpha_hi"}, "threshold.family");
    DatumFamily fam;
    fam.base = field_from_json(req(j, "base", "threshold.family"), g, ctx);
    fam.alpha_lo = num_req(j, "alpha_lo", "threshold.family");
    fam.alpha_hi = num_req(j, "alpha_hi", "threshold.family");
    return fam;
}

int cmd_threshold(const json& cfg, const ConfigContext& ctx, Run& run, std::ostream& out) {
    check_keys(cfg, {"grid", "solver", "family", "tol", "max_probes", "rescale"}, "threshold");
    Grid gs;
    const Grid* g = optional_grid(cfg, gs);
    DatumFamily fam = family_from_json(req(cfg, "family", "threshold"), g, ctx);
    SolverConfig sc = solver_from_json(cfg.value("solver", json::object()));
    const double tol = num(cfg, "tol", 0.01);
    const int max_probes = cfg.value("max_probes", 12);
    ThresholdReport r = threshold_bisection(fam, sc, tol, max_probes);
    json rep = to_json(r);
    rep["solver"] = solver_to_json(sc);
    if (cfg.contains("rescale")) {
        const double lambda = json_to_double(cfg.at("rescale"));
        DatumFamily wide{box_dilation(fam.base, lambda), fam.alpha_lo, fam.alpha_hi};
        SolverConfig sc2 = sc;
        sc2.T = sc.T * lambda * lambda;
        sc2.dt = sc.dt * lambda * lambda;
        sc2.max_sup = sc.max_sup / lambda;
        ThresholdReport r2 = threshold_bisection(wide, sc2, tol, max_probes);
        const double m1 = 0.5 * (r.alpha_minus + r.alpha_plus), m2 = 0.5 * (r2.alpha_minus + r2.alpha_plus);
        rep["rescaled"] = to_json(r2);
        rep["rescaled"]["lambda"] = lambda;
        rep["rescale_consistency"] = std::abs(m2 / m1 - 1.0);
    }
    run.emit("threshold.json", rep);
    run.results = {{"alpha_minus", r.alpha_minus}, {"alpha_plus", r.alpha_plus}, {"probes", r.probes},
                   {"disclaimer", r.disclaimer}};
    if (rep.contains("rescale_consistency")) run.results["rescale_consistency"] = rep["rescale_consistency"];
    out << rep.dump(2) << '\n';
    return 0;
}

Trajectory trajectory_from_config(const json& cfg, const ConfigContext& ctx, const std::string& where) {
    if (cfg.contains("trajectory")) {
        fs::path p = cfg.at("trajectory").get<std::string>();
        if (p.is_relative()) p = ctx.base_dir / p;
        return load_trajectory(p);
    }
    Grid gs;
    const Grid* g = optional_grid(cfg, gs);
    RealField u0 = field_from_json(req(cfg, "field", where), g, ctx);
    return evolve(u0, solver_from_json(cfg.value("solver", json::object())));
}

int cmd_serrin(const json& cfg, const ConfigContext& ctx, Run& run, std::ostream& out) {
    check_keys(cfg, {"trajectory", "field", "grid", "solver", "p"}, "serrin");
    Trajectory tr = trajectory_from_config(cfg, ctx, "serrin");
    const int d = tr.grid().dim();
    json rep = to_json(serrin_check(tr));
    rep["sup_critical"] =
        to_json(sup_critical_norm(tr, d == 3 ? CriticalNormKind::L3 : CriticalNormKind::Besov, num(cfg, "p", d + 1.0)));
    rep["sup_critical"]["kind"] = d == 3 ? "L3" : "besov";
    run.emit("serrin.json", rep);
    run.results = {{"value", rep["value"]}, {"status", rep["status"]}};
    out << rep.dump(2) << '\n';
    return status_exit(tr.status);
}

int cmd_probe(const json& cfg, const ConfigContext& ctx, Run& run, std::ostream& out) {
    check_keys(cfg, {"trajectory", "field", "grid", "solver", "battery"}, "probe");
    Trajectory tr = trajectory_from_config(cfg, ctx, "probe");
    std::vector<RealField> tests;
    const json battery = cfg.value("battery", json("default"));
    if (battery.is_string()) {
        if (battery.get<std::string>() != "default") throw ConfigError("probe.battery: unknown battery");
        tests = default_test_battery(tr.grid());
    } else {
        for (const auto& f : battery) tests.push_back(field_from_json(f, &tr.grid(), ctx));
    }
    json rep = to_json(weak_convergence_probe(tr, tests));
    rep["status"] = to_string(tr.status);
    run.emit("probe.json", rep);
    run.results = {{"decaying", rep["decaying"]}, {"status", rep["status"]}};
    out << rep.dump(2) << '\n';
    return status_exit(tr.status);
}

using CommandFn = int (*)(const json&, const ConfigContext&, Run&, std::ostream&);

CommandFn lookup(const std::string& name) {
    if (name == "norm") return cmd_norm;
    if (name == "lp") return cmd_lp;
    if (name == "evolve") return cmd_evolve;
    if (name == "superpose") return cmd_superpose;
    if (name == "ortho") return cmd_ortho;
    if (name == "perturb") return cmd_perturb;
    if (name == "threshold") return cmd_threshold;
    if (name == "serrin") return cmd_serrin;
    if (name == "probe") return cmd_probe;
    return nullptr;
}

RealField components_copy(const RealField& scalar, int comps, double amp) {
    RealField v(scalar.grid(), comps);
    for (int c = 0; c < comps; ++c) {
        auto src = scalar.component(0);
        auto dst = v.component(c);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = amp * src[i];
    }
    return v;
}

}  // namespace

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || k == a;
        if (!ok) throw ConfigError(where + ": unknown key '" + k + "'");
    }
}

Grid grid_from_json(const json& j) {
    check_keys(j, {"d", "N", "L"}, "grid");
    return Grid(req(j, "d", "grid").get<int>(), req(j, "N", "grid").get<int>(), num_req(j, "L", "grid"));
}

json grid_to_json(const Grid& g) { return {{"d", g.dim()}, {"N", g.n()}, {"L", g.length()}}; }

SolverConfig solver_from_json(const json& j) {
    check_keys(j, {"dt", "T", "dealias_fraction", "max_sup", "tail_threshold", "snapshot_stride", "nonlinear"},
               "solver");
    SolverConfig c;
    c.dt = num(j, "dt", c.dt);
    c.T = num(j, "T", c.T);
    c.dealias_fraction = num(j, "dealias_fraction", c.dealias_fraction);
    c.max_sup = num(j, "max_sup", c.max_sup);
    c.tail_threshold = num(j, "tail_threshold", c.tail_threshold);
    c.snapshot_stride = j.value("snapshot_stride", c.snapshot_stride);
    c.nonlinear = j.value("nonlinear", c.nonlinear);
    c.validate();
    return c;
}

json solver_to_json(const SolverConfig& c) {
    return {{"dt", c.dt},
            {"T", c.T},
            {"dealias_fraction", c.dealias_fraction},
            {"max_sup", json_number(c.max_sup)},
            {"tail_threshold", c.tail_threshold},
            {"snapshot_stride", c.snapshot_stride},
            {"nonlinear", c.nonlinear}};
}

ScaleCore core_from_json(const json& j) {
    check_keys(j, {"lambda", "x0"}, "scale core");
    ScaleCore c;
    c.lambda = num_req(j, "lambda", "scale core");
    c.x0 = vec3(j.value("x0", json()));
    if (!(c.lambda > 0.0)) throw ConfigError("scale core: lambda must be positive");
    return c;
}

json core_to_json(const ScaleCore& c) { return {{"lambda", c.lambda}, {"x0", vec_json(c.x0, 3)}}; }

ScaleCoreSequence cores_from_json(const json& j) {
    if (!j.is_array()) throw ConfigError("scale core sequence must be an array");
    ScaleCoreSequence s;
    for (const auto& c : j) s.push_back(core_from_json(c));
    return s;
}

RealField field_from_json(const json& j, const Grid* g, const ConfigContext& ctx) {
    if (j.is_string()) {
        fs::path p = j.get<std::string>();
        if (p.is_relative()) p = ctx.base_dir / p;
        RealField f = read_cfd(p);
        if (g && f.grid() != *g) throw GridMismatchError(p.string() + " does not match the configured grid");
        return f;
    }
    if (!j.is_object()) throw ConfigError("field: expected a CFD1 path or a generator object");
    const std::string type = req(j, "type", "field").get<std::string>();
    const std::string where = "field(" + type + ")";
    if (type == "file") {
        check_keys(j, {"type", "path"}, where);
        return field_from_json(req(j, "path", where), g, ctx);
    }
    if (type == "sum") {
        check_keys(j, {"type", "terms"}, where);
        const json& terms = req(j, "terms", where);
        if (!terms.is_array() || terms.empty()) throw ConfigError(where + ": terms must be a nonempty array");
        RealField acc = field_from_json(terms[0], g, ctx);
        for (std::size_t i = 1; i < terms.size(); ++i) acc += field_from_json(terms[i], &acc.grid(), ctx);
        return acc;
    }
    if (type == "rescaled") {
        check_keys(j, {"type", "field", "core"}, where);
        RealField f = field_from_json(req(j, "field", where), g, ctx);
        return apply_lambda(f, core_from_json(req(j, "core", where)));
    }
    if (type == "box_dilation") {
        check_keys(j, {"type", "field", "lambda"}, where);
        return box_dilation(field_from_json(req(j, "field", where), nullptr, ctx), num_req(j, "lambda", where));
    }
    if (!g) throw ConfigError(where + ": generators need a 'grid' in the config");
    const int d = g->dim();
    if (type == "zero") {
        check_keys(j, {"type", "components"}, where);
        return RealField(*g, j.value("components", d));
    }
    if (type == "random") {
        check_keys(j, {"type", "seed", "mode_lo", "mode_hi", "amplitude", "divergence_free", "components"}, where);
        if (!j.contains("seed")) throw ConfigError(where + ": a seed is required for random fields");
        RandomSpec rs;
        rs.mode_lo = num(j, "mode_lo", rs.mode_lo);
        rs.mode_hi = num(j, "mode_hi", rs.mode_hi);
        rs.amplitude = num(j, "amplitude", rs.amplitude);
        rs.divergence_free = j.value("divergence_free", rs.divergence_free);
        return random_field(*g, j.value("components", d), j.at("seed").get<std::uint64_t>(), rs);
    }
    if (type == "default_remainder") {
        check_keys(j, {"type", "seed", "amplitude", "dealias_fraction"}, where);
        if (!j.contains("seed")) throw ConfigError(where + ": a seed is required for random fields");
        return default_remainder_field(*g, j.at("seed").get<std::uint64_t>(), num(j, "amplitude", 1e-2),
                                       num(j, "dealias_fraction", 2.0 / 3.0));
    }
    if (type == "taylor_green") {
        check_keys(j, {"type", "amplitude"}, where);
        return taylor_green_2d(*g, num(j, "amplitude", 1.0));
    }
    if (type == "gaussian_vortex") {
        check_keys(j, {"type", "center", "sigma", "amplitude", "axis"}, where);
        return gaussian_vortex(*g, vec3(j.value("center", json())), num_req(j, "sigma", where),
                               num(j, "amplitude", 1.0), vec3(j.value("axis", json()), {0.0, 0.0, 1.0}));
    }
    if (type == "cosine") {
        check_keys(j, {"type", "m", "component", "amplitude", "components"}, where);
        Vec3 m = vec3(req(j, "m", where));
        return cosine_mode(*g, j.value("components", d),
                           {static_cast<int>(m[0]), static_cast<int>(m[1]), static_cast<int>(m[2])},
                           j.value("component", 0), num(j, "amplitude", 1.0));
    }
    if (type == "bump") {
        check_keys(j, {"type", "center", "radius", "amplitude", "components"}, where);
        RealField b = smooth_bump(*g, vec3(j.value("center", json())), num_req(j, "radius", where));
        return components_copy(b, j.value("components", d), num(j, "amplitude", 1.0));
    }
    throw ConfigError("field: unknown generator type '" + type + "'");
}

ProfileSystem profile_system_from_json(const json& j, const Grid* g, const ConfigContext& ctx) {
    if (j.is_string()) {
        fs::path p = j.get<std::string>();
        if (p.is_relative()) p = ctx.base_dir / p;
        std::ifstream is(p);
        if (!is) throw ConfigError("cannot open profile system " + p.string());
        json doc = json::parse(is);
        return profile_system_from_json(doc, g, ConfigContext{p.parent_path()});
    }
    check_keys(j, {"profiles", "remainder", "J", "thresholds"}, "system");
    const json& profs = req(j, "profiles", "system");
    if (!profs.is_array() || profs.empty()) throw ConfigError("system.profiles must be a nonempty array");
    const int J = j.contains("J") ? j.at("J").get<int>() : static_cast<int>(profs.size()) - 1;
    if (J < 0) throw ConfigError("system.J must be >= 0");
    ProfileSystem sys;
    std::vector<Profile> list;
    const Grid* grid = g;
    for (const auto& pj : profs) {
        check_keys(pj, {"field", "scale_cores"}, "system.profiles[]");
        Profile pr;
        pr.phi = field_from_json(req(pj, "field", "system.profiles[]"), grid, ctx);
        if (pj.contains("scale_cores")) pr.cores = cores_from_json(pj.at("scale_cores"));
        list.push_back(std::move(pr));
        grid = &list.back().phi.grid();
    }
    const int count = static_cast<int>(list.size());
    if (count == J) {
        Profile zero;
        zero.phi = RealField::vector(list.front().phi.grid());
        list.insert(list.begin(), std::move(zero));
    } else if (count != J + 1) {
        throw ConfigError("system: expected J or J + 1 profiles, got " + std::to_string(count) + " for J = " +
                          std::to_string(J));
    }
    sys.profiles = std::move(list);
    const Grid& sg = sys.grid();
    if (j.contains("remainder")) {
        const json& rj = j.at("remainder");
        check_keys(rj, {"field", "decay"}, "system.remainder");
        sys.remainder = field_from_json(req(rj, "field", "system.remainder"), &sg, ctx);
        sys.remainder_decay = num(rj, "decay", sys.remainder_decay);
    }
    if (j.contains("thresholds")) {
        check_keys(j.at("thresholds"), {"theta_lambda", "theta_x"}, "system.thresholds");
        sys.thresholds.theta_lambda = num(j.at("thresholds"), "theta_lambda", sys.thresholds.theta_lambda);
        sys.thresholds.theta_x = num(j.at("thresholds"), "theta_x", sys.thresholds.theta_x);
    }
    return sys;
}

json to_json(const PerturbationReport& r) {
    return {{"p", r.p},
            {"lhs", json_number(r.lhs)},
            {"datum_norm", json_number(r.datum_norm)},
            {"force_part1", json_number(r.force_part1)},
            {"force_part2", json_number(r.force_part2)},
            {"bracket", json_number(r.bracket)},
            {"drift_norm", json_number(r.drift_norm)},
            {"c_implied", json_number(r.c_implied)},
            {"inconsistent", r.inconsistent},
            {"status", to_string(r.status)},
            {"end_time", r.end_time},
            {"warnings", warnings_json(r.warnings)}};
}

json to_json(const SupNormReport& r) {
    return {{"value", json_number(r.value)},
            {"time_of_max", r.time_of_max},
            {"completed", r.completed},
            {"series", r.series},
            {"warnings", warnings_json(r.warnings)}};
}

json to_json(const ThresholdReport& r) {
    json log = json::array();
    for (const auto& p : r.log) log.push_back({{"alpha", p.alpha}, {"status", to_string(p.status)}, {"end_time", p.end_time}});
    return {{"alpha_minus", r.alpha_minus},
            {"alpha_plus", r.alpha_plus},
            {"relative_width", r.alpha_plus / r.alpha_minus - 1.0},
            {"probes", r.probes},
            {"log", log},
            {"datum_ld_minus", r.datum_ld_minus},
            {"datum_besov_minus", r.datum_besov_minus},
            {"sup_minus", to_json(r.sup_minus)},
            {"disclaimer", r.disclaimer},
            {"disclaimer_text", ThresholdReport::disclaimer_text}};
}

json to_json(const SerrinReport& r) {
    return {{"value", json_number(r.value)},
            {"initial", r.initial},
            {"status", to_string(r.status)},
            {"end_time", r.end_time},
            {"dominated_by_initial", r.dominated_by_initial}};
}

json to_json(const WeakProbeTable& t) {
    return {{"times", t.times}, {"pairings", t.pairings}, {"decaying", t.decaying}};
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"norm",    "lp",        "evolve", "superpose", "ortho",
                                                "perturb", "threshold", "serrin", "probe"};
    return names;
}

const std::vector<std::string>& volatile_manifest_keys() {
    static const std::vector<std::string> keys{"started_at", "wall_clock_seconds"};
    return keys;
}

int run_command(const std::string& command, const json& config, const ConfigContext& ctx, const fs::path& out_dir,
                int threads, std::ostream& out, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    json manifest{{"command", command},
                  {"config", config},
                  {"threads", threads},
                  {"versions",
                   {{"critns", kVersion}, {"fftw", std::string(fftw_version)}, {"compiler", __VERSION__},
                    {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                 std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                 std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
                  {"started_at", iso_now()}};
    Run run{out_dir, {}, json::object()};
    int code = 0;
    auto fail = [&](int c, const std::string& kind, const std::string& msg) {
        json e{{"error", kind}, {"message", msg}, {"command", command}};
        err << e.dump() << '\n';
        manifest["error"] = e;
        return c;
    };
    try {
        CommandFn fn = lookup(command);
        if (!fn) throw ConfigError("unknown command '" + command + "'");
        if (!config.is_object()) throw ConfigError("config must be a JSON object");
        set_threads(threads);
        fs::create_directories(out_dir);
        code = fn(config, ctx, run, out);
        if (code == 2) fail(2, "non_finite", "run ended with non-finite values");
    } catch (const NonFiniteError& e) {
        code = fail(2, e.kind(), e.what());
    } catch (const Error& e) {
        code = fail(1, e.kind(), e.what());
    } catch (const json::exception& e) {
        code = fail(1, "config", e.what());
    } catch (const std::exception& e) {
        code = fail(1, "internal", e.what());
    }
    manifest["exit_code"] = code;
    manifest["artifacts"] = run.artifacts;
    manifest["results"] = run.results;
    manifest["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!ec) {
        std::ofstream os(out_dir / "manifest.json");
        if (os) os << manifest.dump(2) << '\n';
    }
    return code;
}

}  // namespace critns
