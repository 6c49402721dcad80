#include <cmath>
#include <numbers>

#include "critns/fields.hpp"
#include "critns/norms.hpp"
#include "critns/profiles.hpp"
#include "critns/spectral.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace critns;
using testutil::max_diff;
using testutil::rel_diff;

namespace {

RealField bump_vector(const Grid& g, const Vec3& c, double r, double amp = 1.0) {
    auto b = smooth_bump(g, c, r);
    RealField v = RealField::vector(g);
    for (int a = 0; a < g.dim(); ++a) {
        auto src = b.component(0);
        auto dst = v.component(a);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = amp * src[i];
    }
    return v;
}

ScaleCoreSequence constant_cores(double lambda, const Vec3& x, int len) {
    return ScaleCoreSequence(static_cast<std::size_t>(len), ScaleCore{lambda, x});
}

Trajectory frozen(const RealField& f, double T = 0.0) {
    Trajectory tr;
    tr.push(0.0, f);
    if (T > 0.0) tr.push(T, f);
    tr.end_time = T;
    return tr;
}

SolverConfig cfg_for(double T, double dt = 1e-3, bool nonlinear = true) {
    SolverConfig c;
    c.T = T;
    c.dt = dt;
    c.nonlinear = nonlinear;
    c.max_sup = 1e6;
    c.tail_threshold = 1.0;
    return c;
}

double ld_pow(const RealField& f) { return lebesgue_norm_pow(f, f.grid().dim()); }

}  // namespace

TEST_CASE("synthesis with no profiles beyond the weak limit returns it") {
    Grid g(2, 64, 16.0);
    ProfileSystem sys;
    sys.profiles.push_back({gaussian_vortex(g, {0.5, 0, 0}, 0.8, 1.0), {}});
    auto out = synthesize_datum(sys, 0);
    CHECK(rel_diff(out, sys.profiles[0].phi) < 1e-12);
    CHECK(sys.J() == 0);
}

TEST_CASE("disjoint translated bumps add in L^d") {
    Grid g(2, 128, 16.0);
    ProfileSystem sys;
    sys.profiles.push_back({RealField::vector(g), {}});
    auto phi = bump_vector(g, {0, 0, 0}, 1.0);
    sys.profiles.push_back({phi, constant_cores(1.0, {-3.0, 0, 0}, 3)});
    sys.profiles.push_back({phi, {ScaleCore{0.5, {3.0, 1.0, 0}}, ScaleCore{0.5, {3.0, 1.0, 0}},
                                  ScaleCore{0.5, {3.0, 1.0, 0}}}});
    SynthesisOptions opt;
    opt.project = false;
    auto u = synthesize_datum(sys, 1, opt);
    double parts = ld_pow(apply_lambda(phi, sys.core(1, 1))) + ld_pow(apply_lambda(phi, sys.core(2, 1)));
    CHECK(std::abs(ld_pow(u) - parts) <= 1e-9 * parts);
}

TEST_CASE("synthesized L^d defect decays as the scales separate") {
    Grid g(2, 256, 8.0);
    auto phi = gaussian_vortex(g, {0, 0, 0}, 0.5, 1.0);
    ProfileSystem sys;
    sys.profiles.push_back({RealField::vector(g), {}});
    ScaleCoreSequence s1, s2;
    for (int n = 0; n < 3; ++n) {
        s1.push_back({1.0, {0, 0, 0}});
        s2.push_back({std::ldexp(1.0, -(n + 1)), {0.75, 0.75, 0}});
    }
    sys.profiles.push_back({phi, s1});
    sys.profiles.push_back({phi, s2});
    sys.remainder = default_remainder_field(g, 11);
    double prev = kInf;
    for (int n = 0; n < 3; ++n) {
        auto u = synthesize_datum(sys, n);
        double defect = std::abs(ld_pow(u) - ld_pow(apply_lambda(phi, sys.core(1, n))) -
                                 ld_pow(apply_lambda(phi, sys.core(2, n))) - ld_pow(sys.remainder_at(n)));
        CHECK(defect < prev);
        prev = defect;
    }
}

TEST_CASE("support overflow names the profile") {
    Grid g(2, 64, 8.0);
    ProfileSystem sys;
    sys.profiles.push_back({RealField::vector(g), {}});
    sys.profiles.push_back({gaussian_vortex(g, {0, 0, 0}, 0.5, 1.0), constant_cores(4.0, {0, 0, 0}, 3)});
    try {
        synthesize_datum(sys, 0);
        FAIL("expected overflow");
    } catch (const SupportOverflowError& e) {
        CHECK(std::string(e.what()).find("profile 1") != std::string::npos);
    }
}

TEST_CASE("validation of profile systems") {
    Grid g(2, 64, 16.0);
    auto phi = gaussian_vortex(g, {0, 0, 0}, 0.5, 1.0);
    ProfileSystem sys;
    sys.thresholds = {8.0, 8.0};
    sys.profiles.push_back({RealField::vector(g), {}});
    ScaleCoreSequence s1, s2;
    for (int n = 0; n < 4; ++n) {
        s1.push_back({1.0, {3.0 * std::ldexp(1.0, n), 0, 0}});
        s2.push_back({std::ldexp(1.0, -n), {1.0, 0, 0}});
    }
    sys.profiles.push_back({phi, s1});
    sys.profiles.push_back({phi, s2});
    CHECK_NOTHROW(sys.validate());

    auto same = sys;
    same.profiles[2].cores = s1;
    CHECK_THROWS_AS(same.validate(), DomainError);

    auto bad = sys;
    bad.profiles[1].phi = bump_vector(g, {0, 0, 0}, 1.0);
    CHECK_THROWS_AS(bad.validate(), InvalidFieldError);

    auto slot0 = sys;
    slot0.profiles[0].cores = constant_cores(0.5, {0, 0, 0}, 4);
    CHECK_THROWS_AS(slot0.validate(), DomainError);
}

TEST_CASE("profile ordering") {
    Grid g(2, 16, 8.0);
    ProfileSystem sys;
    sys.profiles.push_back({RealField::vector(g), {}});
    ScaleCoreSequence s1, s2;
    for (int n = 0; n < 3; ++n) {
        s1.push_back({std::ldexp(1.0, -n), {0, 0, 0}});
        s2.push_back({std::ldexp(1.0, -2 * n), {1, 0, 0}});
    }
    sys.profiles.push_back({RealField::vector(g), s1});
    sys.profiles.push_back({RealField::vector(g), s2});

    auto all_inf = order_profiles(sys, {kInf, kInf, kInf}, 0);
    CHECK(all_inf.permutation == std::vector<int>{0, 1, 2});
    CHECK(all_inf.finite.empty());
    CHECK(std::isinf(all_inf.tau));

    auto single = order_profiles(sys, {kInf, kInf, 2.0}, 1);
    CHECK(single.permutation.front() == 2);
    CHECK(single.finite == std::vector<int>{2});
    CHECK(single.tau == doctest::Approx(2.0 / 16.0));

    // lambda_1^2 T_1 = 4^{-n}, lambda_2^2 T_2 = 8 * 16^{-n}: they cross between n = 1 and n = 2
    std::vector<double> life{kInf, 1.0, 8.0};
    CHECK(order_profiles(sys, life, 0).permutation == std::vector<int>{1, 2, 0});
    CHECK(order_profiles(sys, life, 2).permutation == std::vector<int>{2, 1, 0});
    CHECK(tau_n(sys, life, 2) == doctest::Approx(8.0 / 256.0));
}

TEST_CASE("superposition at time zero is the synthesized datum") {
    Grid g(2, 64, 16.0);
    auto phi = gaussian_vortex(g, {0, 0, 0}, 0.6, 1.0);
    ProfileSystem sys;
    sys.profiles.push_back({gaussian_vortex(g, {-2, 2, 0}, 0.8, 0.3), {}});
    sys.profiles.push_back({phi, constant_cores(0.5, {2.0, 0, 0}, 2)});
    sys.remainder = default_remainder_field(g, 5);
    auto ev = make_evolved({frozen(sys.profiles[0].phi, 1.0), frozen(phi, 1.0)});
    SynthesisOptions opt;
    opt.project = false;
    CHECK(max_diff(superpose_evolution(ev, sys, 1, 0.0), synthesize_datum(sys, 1, opt)) < 1e-12);
}

TEST_CASE("single weak-limit profile superposes to its own evolution") {
    Grid g(2, 32, 2.0 * std::numbers::pi);
    ProfileSystem sys;
    sys.profiles.push_back({taylor_green_2d(g, 0.5), {}});
    auto ev = evolve_profiles(sys, {cfg_for(0.1)});
    CHECK(std::isinf(ev.lifespans[0]));
    CHECK(max_diff(superpose_evolution(ev, sys, 0, 0.05), ev.U[0].at(0.05)) == 0.0);
    CHECK(max_diff(drift_term(ev, sys, 0, 0.05), ev.U[0].at(0.05)) == 0.0);
}

TEST_CASE("linear flow superposes exactly") {
    Grid g(2, 128, 16.0);
    ProfileSystem sys;
    sys.profiles.push_back({gaussian_vortex(g, {0, -3, 0}, 0.8, 0.5), {}});
    auto phi = gaussian_vortex(g, {0, 0, 0}, 0.4, 1.0);
    sys.profiles.push_back({phi, constant_cores(0.5, {2.0, 0, 0}, 1)});
    sys.profiles.push_back({phi, constant_cores(2.0, {-2.0, 1.0, 0}, 1)});
    sys.remainder = default_remainder_field(g, 7, 0.1);
    const double t = 0.04;
    auto ev = evolve_profiles(sys, {cfg_for(t, 1e-3, false), cfg_for(4 * t, 1e-3, false),
                                    cfg_for(t / 4, 1e-3, false)});
    SynthesisOptions opt;
    opt.project = false;
    auto expect = heat_semigroup(synthesize_datum(sys, 0, opt), t);
    CHECK(rel_diff(superpose_evolution(ev, sys, 0, t), expect) < 1e-8);
}

TEST_CASE("coverage gaps are reported") {
    Grid g(2, 32, 8.0);
    ProfileSystem sys;
    sys.profiles.push_back({RealField::vector(g), {}});
    sys.profiles.push_back({gaussian_vortex(g, {0, 0, 0}, 0.5, 1.0), constant_cores(0.5, {0, 0, 0}, 1)});
    auto ev = evolve_profiles(sys, {cfg_for(0.1), cfg_for(0.1)});
    CHECK_NOTHROW(superpose_evolution(ev, sys, 0, 0.02));
    CHECK_THROWS_AS(superpose_evolution(ev, sys, 0, 0.05), CoverageError);
}

TEST_CASE("single profile leaves no remainder") {
    Grid g(2, 32, 2.0 * std::numbers::pi);
    ProfileSystem sys;
    sys.profiles.push_back({RealField::vector(g), {}});
    sys.profiles.push_back({random_field(g, 2, 3, {1.0, 4.0, 1.0, true}), constant_cores(1.0, {0, 0, 0}, 1)});
    auto cfg = cfg_for(0.2, 1e-2);
    auto ev = evolve_profiles(sys, {cfg, cfg});
    auto u = evolve(synthesize_datum(sys, 0), cfg);
    auto r = remainder(u, ev, sys, 0, 3.0);
    CHECK(r.r.size() == u.size());
    CHECK(r.e_norm < 1e-9);
}

TEST_CASE("remainder-only system matches the Duhamel term") {
    Grid g(2, 32, 2.0 * std::numbers::pi);
    ProfileSystem sys;
    sys.profiles.push_back({RealField::vector(g), {}});
    sys.remainder = random_field(g, 2, 9, {1.0, 4.0, 1.0, true});
    auto cfg = cfg_for(0.2, 1e-3);
    cfg.dealias_fraction = 1.0;
    auto ev = evolve_profiles(sys, {cfg});
    auto u = evolve(synthesize_datum(sys, 0), cfg);
    auto r = remainder(u, ev, sys, 0, 3.0);
    auto duh = -1.0 * bilinear_duhamel(u, u, 0.2);
    CHECK(rel_diff(r.r.at(0.2), duh) < 1e-3);
}

TEST_CASE("source term algebra") {
    Grid g(2, 64, 16.0);
    auto phi = gaussian_vortex(g, {0, 0, 0}, 0.6, 1.0);
    ProfileSystem sys;
    sys.profiles.push_back({RealField::vector(g), {}});
    sys.profiles.push_back({phi, constant_cores(1.0, {-1.0, 0, 0}, 1)});
    auto cfg = cfg_for(0.1, 1e-2);

    SUBCASE("single profile has no source") {
        auto ev = evolve_profiles(sys, {cfg, cfg});
        auto s = source_term(ev, sys, 0, 0.05);
        CHECK(s.total().max_abs() == 0.0);
    }

    sys.profiles.push_back({phi, constant_cores(0.5, {1.5, 0.5, 0}, 1)});
    auto ev = evolve_profiles(sys, {cfg, cfg, cfg_for(0.4, 1e-2)});
    const double t = 0.05;
    auto v1 = apply_lambda(ev.U[1].at(t), sys.core(1, 0));
    auto v2 = apply_lambda(ev.U[2].at(t / 0.25), sys.core(2, 0));

    SUBCASE("two profiles give minus Q") {
        auto s = source_term(ev, sys, 0, t);
        auto expect = -1.0 * q_bilinear(v1, v2);
        CHECK(rel_diff(s.total(), expect) < 1e-12);
        // independent form: own nonlinearities minus that of the sum
        auto alt = nonlinear_term(v1) + nonlinear_term(v2) - nonlinear_term(v1 + v2);
        CHECK(rel_diff(s.total(), alt) < 1e-10);
        CHECK(s.part1.max_abs() == 0.0);
    }

    SUBCASE("with remainder the total is the nonlinear defect") {
        sys.remainder = default_remainder_field(g, 4, 0.2);
        auto s = source_term(ev, sys, 0, t);
        auto w = heat_semigroup(sys.remainder, t);
        auto alt = nonlinear_term(v1) + nonlinear_term(v2) - nonlinear_term(v1 + v2 + w);
        CHECK(rel_diff(s.total(), alt) < 1e-10);
        auto uw = -1.0 * q_bilinear(v1 + v2, w);
        CHECK(rel_diff(s.part1 + s.zeta, uw) < 1e-10);
        CHECK(rel_diff(s.ww, -1.0 * nonlinear_term(w)) < 1e-12);
        CHECK(s.part1.max_abs() > 0.0);
    }
}

TEST_CASE("source norms decrease with core separation") {
    Grid g(2, 64, 16.0);
    auto phi = gaussian_vortex(g, {0, 0, 0}, 0.5, 1.0);
    auto cfg = cfg_for(0.1, 1e-2);
    std::vector<double> times;
    for (int k = 0; k <= 10; ++k) times.push_back(0.01 * k);
    double prev = kInf;
    for (double sep : {1.0, 2.0, 3.0}) {
        ProfileSystem sys;
        sys.profiles.push_back({RealField::vector(g), {}});
        sys.profiles.push_back({phi, constant_cores(1.0, {-sep / 2, 0, 0}, 1)});
        sys.profiles.push_back({phi, constant_cores(1.0, {sep / 2, 0, 0}, 1)});
        auto ev = evolve_profiles(sys, {cfg, cfg, cfg});
        auto nrm = source_norms(ev, sys, 0, times, 3.0);
        CHECK(nrm.part1 == 0.0);
        CHECK(nrm.upper_bound() == doctest::Approx(nrm.cross));
        CHECK(nrm.upper_bound() < prev);
        prev = nrm.upper_bound();
    }
}

TEST_CASE("drift of the empty system is zero") {
    Grid g(2, 32, 8.0);
    ProfileSystem sys;
    sys.profiles.push_back({RealField::vector(g), {}});
    auto ev = evolve_profiles(sys, {cfg_for(0.1, 1e-2)});
    CHECK(drift_term(ev, sys, 0, 0.05).max_abs() == 0.0);
    auto dn = drift_norm(ev, sys, 0, {0.0, 0.05, 0.1}, 3.0);
    CHECK(dn.value == 0.0);
}

TEST_CASE("perturbed residual of the exact remainder is small") {
    Grid g(2, 32, 2.0 * std::numbers::pi);
    ProfileSystem sys;
    sys.profiles.push_back({RealField::vector(g), {}});
    sys.profiles.push_back({random_field(g, 2, 21, {1.0, 3.0, 0.5, true}), constant_cores(1.0, {0, 0, 0}, 1)});
    sys.profiles.push_back({random_field(g, 2, 22, {1.0, 3.0, 0.5, true}), constant_cores(1.0, {0, 0, 0}, 1)});
    auto cfg = cfg_for(0.2, 1e-3);
    cfg.dealias_fraction = 1.0;
    auto ev = evolve_profiles(sys, {cfg, cfg, cfg});
    auto u = evolve(synthesize_datum(sys, 0), cfg);
    auto r = remainder(u, ev, sys, 0, 3.0);
    auto drift = [&](double t) { return drift_term(ev, sys, 0, t); };
    auto src = [&](double t) { return source_term(ev, sys, 0, t).total(); };
    double res = perturbed_residual(restrict(r.r, 0.0, 0.2), drift, src, 1.0);
    // scale: the same residual with the source dropped
    double off = perturbed_residual(restrict(r.r, 0.0, 0.2), drift, nullptr, 1.0);
    CHECK(res < 1e-3 * off);
    CHECK(res < 1e-4);
}

TEST_CASE("norm splitting defect") {
    Grid g(2, 256, 16.0);
    auto phi = gaussian_vortex(g, {0, 0, 0}, 0.5, 1.0);
    ProfileSystem sys;
    sys.profiles.push_back({RealField::vector(g), {}});

    SUBCASE("single profile") {
        sys.profiles.push_back({phi, constant_cores(1.0, {0, 0, 0}, 1)});
        auto ev = make_evolved({frozen(sys.profiles[0].phi), frozen(phi)});
        auto rep = norm_splitting_check(ev, sys, 0, 0.0, 0, 1);
        CHECK(rep.defect == 0.0);
        CHECK(rep.pairs.empty());
    }

    SUBCASE("disjoint supports") {
        auto b = bump_vector(g, {0, 0, 0}, 1.0);
        sys.profiles.push_back({b, constant_cores(1.0, {-3.0, 0, 0}, 1)});
        sys.profiles.push_back({b, constant_cores(0.5, {3.0, 2.0, 0}, 1)});
        auto ev = make_evolved({frozen(sys.profiles[0].phi), frozen(b), frozen(b)});
        auto rep = norm_splitting_check(ev, sys, 0, 0.0, 1, 2);
        CHECK(rep.defect <= 1e-9);
        REQUIRE(rep.cross_terms.size() == 1);
        CHECK(rep.cross_terms[0] <= 1e-6);
    }

    SUBCASE("scale-ratio sweep") {
        ScaleCoreSequence s1, s2;
        for (int n = 0; n < 3; ++n) {
            s1.push_back({1.0, {0, 0, 0}});
            s2.push_back({std::ldexp(1.0, -(n + 1)), {0.5, 0, 0}});
        }
        sys.profiles.push_back({phi, s1});
        sys.profiles.push_back({phi, s2});
        auto ev = make_evolved({frozen(sys.profiles[0].phi), frozen(phi), frozen(phi)});
        double prev = kInf;
        for (int n = 0; n < 3; ++n) {
            auto rep = norm_splitting_check(ev, sys, n, 0.0, 1, 2, 3.0);
            CHECK(rep.defect < prev);
            prev = rep.defect;
        }
    }
}

TEST_CASE("concentration extraction") {
    Grid g(2, 256, 8.0);
    auto bump = bump_vector(g, {0, 0, 0}, 1.0);

    SUBCASE("identity") {
        auto c = extract_concentration({bump});
        REQUIRE(c[0].status == ConcentrationStatus::Found);
        double l = c[0].cores.front().lambda;
        CHECK(l >= 0.5);
        CHECK(l <= 2.0);
        auto x = c[0].cores.front().x0;
        CHECK(std::hypot(x[0], x[1]) <= 2.0);
    }

    SUBCASE("rescaled round trip") {
        const double lambda = 0.125;
        Vec3 x0{1.5, -1.0, 0};
        auto f = apply_lambda(bump, {lambda, x0});
        auto c = extract_concentration({f});
        REQUIRE(c[0].status == ConcentrationStatus::Found);
        double ratio = c[0].cores.front().lambda / lambda;
        CHECK(ratio >= 0.5);
        CHECK(ratio <= 2.0);
        auto x = c[0].cores.front().x0;
        CHECK(std::hypot(x[0] - x0[0], x[1] - x0[1]) <= 2 * lambda);
    }

    SUBCASE("two bumps") {
        auto big = bump_vector(g, {2.0, 0, 0}, 1.0);
        auto small = bump_vector(g, {-2.0, 0, 0}, 1.0, 0.6);
        auto c = extract_concentration({big + small, bump_vector(g, {2.0, 0, 0}, 1.0) +
                                                         bump_vector(g, {-2.0, 0, 0}, 1.0)});
        REQUIRE(c[0].cores.size() >= 2);
        CHECK(c[0].cores[0].x0[0] == doctest::Approx(2.0).epsilon(0.05));
        CHECK(c[0].amplitudes[0] > c[0].amplitudes[1]);
        REQUIRE(c[1].cores.size() >= 2);
        CHECK(c[1].cores[0].x0[0] == doctest::Approx(-2.0).epsilon(0.05));
    }

    SUBCASE("zero field") {
        auto c = extract_concentration({RealField::vector(g)});
        CHECK(c[0].status == ConcentrationStatus::NoConcentration);
        CHECK_THROWS_AS(extract_concentration({}), DomainError);
    }
}
