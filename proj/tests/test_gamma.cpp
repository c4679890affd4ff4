#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dpir/energy.hpp"
#include "dpir/field.hpp"
#include "dpir/gamma.hpp"
#include "dpir/synth.hpp"

using namespace dpir;

namespace {

constexpr double kPi = 3.14159265358979323846;

// The canonical sweep instance: a 64x64 two-region image on a coarse physical
// grid (spacing 0.2, so the disk survives the first-order shrinkage with a
// clear jump and the mollification radii delta = eps^{1/6} stay between one
// and four pixels) with a weight vanishing on the dividing circle.
struct Instance {
    ScalarField f;
    ScalarField a;
};

Instance two_region_instance() {
    const int n = 64;
    const double h = 0.2;
    return {synth_two_region(n, 37, h), two_region_edge_weight(n, h)};
}

}  // namespace

TEST_CASE("recovery sequence couples delta to epsilon exactly") {
    ScalarField u = synth_two_region(64, 37, 0.08);
    const std::vector<double> eps = {1e-2, 1e-3, 1e-4};
    RecoverySequence rec = recovery_sequence(u, eps);
    REQUIRE(rec.fields.size() == 3);
    REQUIRE(rec.rows.size() == 3);

    for (std::size_t i = 0; i < rec.rows.size(); ++i) {
        const RecoveryRow& r = rec.rows[i];
        REQUIRE(r.epsilon == eps[i]);
        REQUIRE(r.delta == std::pow(eps[i], 1.0 / 6.0));  // delta = eps^{1/(3n)}, n = 2
        REQUIRE_FALSE(r.resolution_limited);
        REQUIRE(r.sup_grad > 0.0);
        const double dn = r.delta * r.delta;
        REQUIRE(r.c == r.sup_grad * dn);
        REQUIRE(r.l1_distance > 0.0);
        if (i > 0) {
            // weaker mollification: closer to u in L1
            REQUIRE(rec.rows[i].l1_distance <= rec.rows[i - 1].l1_distance * (1.0 + 1e-12));
            // eps * delta^{-2n} steps down by exactly 10^{1/3} per decade
            const double step = rec.rows[i - 1].eps_delta_ratio / rec.rows[i].eps_delta_ratio;
            REQUIRE(step == Catch::Approx(std::pow(10.0, 1.0 / 3.0)).epsilon(1e-9));
            // eps * (c/delta^n)^2 -> 0 monotonically
            REQUIRE(rec.rows[i].coupling_sq < rec.rows[i - 1].coupling_sq);
        }
    }
    // (c/delta^n)^eps -> 1: within 10% by the last row
    REQUIRE(rec.rows.back().coupling_pow == Catch::Approx(1.0).margin(0.10));

    SECTION("direct evaluation of the coupling") {
        RecoverySequence tiny = recovery_sequence(u, {1e-6});
        REQUIRE(tiny.rows[0].delta == Catch::Approx(0.1).margin(1e-15));
    }
    SECTION("validation") {
        REQUIRE_THROWS_AS(recovery_sequence(u, {}), std::invalid_argument);
        REQUIRE_THROWS_AS(recovery_sequence(u, {1e-2, 1e-2}), std::invalid_argument);
        REQUIRE_THROWS_AS(recovery_sequence(u, {1e-3, 1e-2}), std::invalid_argument);
        REQUIRE_THROWS_AS(recovery_sequence(u, {1e-2, 0.0}), std::invalid_argument);
    }
}

TEST_CASE("recovery below grid scale is marked, not failed") {
    ScalarField u = synth_two_region(64, 37, 0.08);
    // delta = eps^{1/6} < h = 0.08 requires eps < 0.08^6 ~ 2.6e-7
    RecoverySequence rec = recovery_sequence(u, {1e-3, 1e-7});
    REQUIRE_FALSE(rec.rows[0].resolution_limited);
    REQUIRE(rec.rows[1].resolution_limited);
    REQUIRE(rec.rows[1].delta < u.spacing);
    REQUIRE(rec.fields[1].v == u.v);  // identity mollification
    REQUIRE(rec.rows[1].l1_distance == 0.0);
}

TEST_CASE("constant data makes every sweep energy vanish") {
    ScalarField f(32, 32, 1.0 / 32, 0.7);
    ScalarField a(32, 32, 1.0 / 32, 0.5);
    auto records = gamma_sweep(f, a, {1e-1, 1e-2}, SolveOptions{});
    REQUIRE(records.size() == 2);
    for (const auto& r : records) {
        REQUIRE_FALSE(r.flagged);
        REQUIRE(r.iterations == 0);
        REQUIRE(r.minimizer_energy_eps == 0.0);
        REQUIRE(r.minimizer_energy_I == 0.0);
        REQUIRE(r.target_energy == 0.0);
        // mollifying a constant is exact only to rounding, so the recovery
        // energy is tiny rather than literally zero
        REQUIRE(r.recovery_energy <= 1e-12);
        REQUIRE(r.l1_minimizer == 0.0);
    }
}

TEST_CASE("gamma sweep enforces the boundary positivity hypothesis") {
    ScalarField f = synth_two_region(32, 5, 0.08);
    ScalarField a(32, 32, 0.08, 0.4);
    for (int y = 0; y < 32; ++y) a.at(0, y) = 0.0;  // kill part of the boundary
    REQUIRE_THROWS_WITH(gamma_sweep(f, a, {1e-2}, SolveOptions{}),
                        Catch::Matchers::ContainsSubstring("boundary"));
    // the override runs the sweep anyway (here through the combined mode)
    SolveOptions opts;
    opts.tol = 1e-4;
    opts.max_iters = 400;
    auto rec = gamma_sweep(f, a, {1e-2}, opts, /*override_boundary=*/true,
                           RegularizationMode::combined);
    REQUIRE(rec.size() == 1);

    SECTION("epsilon list validation") {
        ScalarField good(32, 32, 0.08, 0.4);
        REQUIRE_THROWS_AS(gamma_sweep(f, good, {}, SolveOptions{}), std::invalid_argument);
        REQUIRE_THROWS_AS(gamma_sweep(f, good, {1e-2, 1e-1}, SolveOptions{}),
                          std::invalid_argument);
    }
}

TEST_CASE("two-region sweep satisfies the Gamma-facing checks") {
    const Instance inst = two_region_instance();
    SolveOptions opts;
    opts.tol = 1e-7;
    opts.max_iters = 40000;
    const std::vector<double> eps = {1e-1, 1e-2, 1e-3, 1e-4};
    auto records = gamma_sweep(inst.f, inst.a, eps, opts);
    REQUIRE(records.size() == 4);

    const double target = records[0].target_energy;
    REQUIRE(target > 0.0);
    double min_recovery = records[0].recovery_energy;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        CAPTURE(i, r.epsilon, r.minimizer_energy_eps, r.minimizer_energy_I, r.recovery_energy,
                target, r.l1_minimizer, r.l1_recovery);
        REQUIRE_FALSE(r.flagged);
        REQUIRE_FALSE(r.resolution_limited);
        REQUIRE(r.delta == std::pow(r.epsilon, 1.0 / 6.0));
        REQUIRE(r.target_energy == target);
        min_recovery = std::min(min_recovery, r.recovery_energy);

        // liminf side: u* minimizes I, so I at the eps-minimizer cannot dip
        // below the target beyond solver slack
        REQUIRE(r.minimizer_energy_I >= target * (1.0 - 1e-9) - 10.0 * opts.tol * target);

        if (i > 0) {
            REQUIRE(r.minimizer_energy_eps <=
                    records[i - 1].minimizer_energy_eps * (1.0 + 1e-9));
            // tau-witness: the eps-minimizers approach u* in L1 (5% slack)
            REQUIRE(r.l1_minimizer <= records[i - 1].l1_minimizer * 1.05);
        }
    }
    // limsup side at desk scale: the recovery family comes within 5% of target
    REQUIRE(min_recovery <= target * 1.05);
    REQUIRE(records.back().recovery_energy <= target * 1.05);
}

TEST_CASE("relaxation check: smooth data converges within one percent") {
    SECTION("cosine hill") {
        const int n = 128;
        const double h = 1.0 / n;
        ScalarField u(n, n, h, 0.0);
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) u.at(x, y) = 0.5 * (1.0 - std::cos(kPi * (x + 0.5) * h));
        ScalarField a(n, n, h, 0.3);
        auto rep = relaxation_check(u, u, a, {4 * h, 3 * h, 2 * h});
        REQUIRE(rep.rows.size() == 3);
        CAPTURE(rep.infimum, rep.reference, rep.relative_gap);
        REQUIRE(std::fabs(rep.infimum - rep.reference) <= 0.01 * rep.reference);
        for (std::size_t i = 1; i < rep.rows.size(); ++i)
            REQUIRE(rep.rows[i].l1_distance < rep.rows[i - 1].l1_distance);
    }
    SECTION("ramp") {
        const int n = 256;
        ScalarField u = synth_ramp(n);
        ScalarField a(n, n, u.spacing, 0.6);
        auto rep = relaxation_check(u, u, a, {4 * u.spacing, 2 * u.spacing});
        CAPTURE(rep.infimum, rep.reference, rep.relative_gap);
        REQUIRE(std::fabs(rep.infimum - rep.reference) <= 0.01 * rep.reference);
    }
}

TEST_CASE("relaxation check: BV data with an adapted weight stays near the target") {
    const int n = 64;
    const double h = 1.0 / n;
    ScalarField u = synth_step(n);
    ScalarField a(n, n, h, 0.3);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            if (std::fabs(x - 31.5) <= 6.0) a.at(x, y) = 0.0;  // vanish near the jump
    auto rep = relaxation_check(u, u, a, {6 * h, 4 * h, 2 * h});
    CAPTURE(rep.infimum, rep.reference, rep.relative_gap);
    REQUIRE(rep.reference == Catch::Approx(1.0).margin(1e-12));  // pure TV of the unit step
    REQUIRE(std::fabs(rep.infimum - rep.reference) <= 0.05 * rep.reference);
}

TEST_CASE("relaxation check: weight positive on the jump blows up") {
    const int n = 64;
    const double h = 1.0 / n;
    ScalarField u = synth_step(n);
    ScalarField a(n, n, h, 0.25);
    auto rep = relaxation_check(u, u, a, {8 * h, 4 * h, 2 * h});
    CAPTURE(rep.rows[0].energy, rep.rows[1].energy, rep.rows[2].energy, rep.slope);
    // the weighted quadratic term scales like a^2 M^2 / delta
    REQUIRE(rep.rows[1].energy > rep.rows[0].energy);
    REQUIRE(rep.rows[2].energy > rep.rows[1].energy);
    REQUIRE(rep.slope > 0.2);

    SECTION("delta list validation") {
        REQUIRE_THROWS_AS(relaxation_check(u, u, a, {}), std::invalid_argument);
        REQUIRE_THROWS_AS(relaxation_check(u, u, a, {2 * h, 4 * h}), std::invalid_argument);
        REQUIRE_THROWS_AS(relaxation_check(u, u, a, {4 * h, 0.0}), std::invalid_argument);
    }
}
