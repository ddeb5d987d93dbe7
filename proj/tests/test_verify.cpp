#include <doctest.h>

#include <cmath>
#include <vector>

#include <qcomp/eigen.hpp>
#include <qcomp/pde.hpp>
#include <qcomp/verify.hpp>

using namespace qcomp;

namespace {

WeightedInterval flat_interval(double L, int m) {
    WeightedInterval wi;
    wi.length = L;
    wi.m = m;
    wi.density = Density::zero();
    return wi;
}

Field1D snapshot_of(const WeightedInterval& wi, double t,
                    const std::function<double(double)>& f) {
    Field1D snap;
    snap.space = wi;
    snap.bc = FieldBC::dirichlet_zero();
    snap.time = t;
    const auto g = space_grid(snap.space);
    snap.values.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) snap.values[i] = f(g[i]);
    return snap;
}

/// Two-slice stationary-shape barrier phi(s, t) = amp(t) base(s) stored at
/// the given times; dt_scheme stays 0 (hand-built table).
ComparisonProfile two_slice_profile(double L_half, int m,
                                    const std::function<double(double)>& base,
                                    std::vector<double> times,
                                    const std::vector<double>& amps) {
    ComparisonProfile prof;
    prof.s_grid = uniform_grid(0.0, L_half, m);
    prof.t_grid = std::move(times);
    for (double a : amps) {
        std::vector<double> v(prof.s_grid.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * base(prof.s_grid[i]);
        prof.values.push_back(v);
        prof.phi_s.push_back(std::vector<double>(v.size(), 0.0));
    }
    return prof;
}

} // namespace

TEST_CASE("modulus_of_continuity is exact on linear data") {
    const auto wi = flat_interval(1.0, 40);
    const auto snap = snapshot_of(wi, 0.25, [](double s) { return s; });
    const auto mc = modulus_of_continuity(snap);
    CHECK(mc.time == 0.25);
    REQUIRE(mc.s_grid.size() == 41);
    for (std::size_t j = 0; j < mc.s_grid.size(); ++j) {
        CHECK(mc.s_grid[j] == doctest::Approx(0.5 * j * wi.h()).epsilon(1e-14));
        CHECK(mc.omega[j] == doctest::Approx(mc.s_grid[j]).epsilon(1e-13));
    }
}

TEST_CASE("modulus_of_continuity matches the closed form for sin on [0, pi]") {
    // omega(s) = sin(2 min(s, pi/4)) / 2; with m even the cap falls exactly
    // on a node pair, so the discrete scan is exact.
    const auto wi = flat_interval(M_PI, 200);
    const auto snap = snapshot_of(wi, 0.0, [](double s) { return std::sin(s); });
    const auto mc = modulus_of_continuity(snap);
    for (std::size_t j = 0; j < mc.s_grid.size(); ++j) {
        const double expected = 0.5 * std::sin(2.0 * std::min(mc.s_grid[j], 0.25 * M_PI));
        CHECK(mc.omega[j] == doctest::Approx(expected).epsilon(0.0).scale(1.0).epsilon(1e-12));
    }
    // Saturation: the last value is half the total oscillation.
    CHECK(mc.omega.back() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("check_mc_dominated accepts a true barrier and rejects a shrunken one") {
    const auto wi = flat_interval(M_PI, 200);
    Trajectory traj;
    for (double t : {0.0, 0.1, 0.2})
        traj.push_back(snapshot_of(wi, t, [t](double s) { return std::exp(-t) * std::sin(s); }));

    auto base = [](double s) { return std::sin(s); };
    const auto good = two_slice_profile(0.5 * M_PI, 100, base, {0.0, 0.2},
                                        {1.0, std::exp(-0.2)});
    const auto rep = check_mc_dominated(traj, good);
    CHECK(rep.passed);
    CHECK(rep.worst_violation <= 1e-12);
    CHECK(rep.metadata.at("snapshots") == 3.0);

    const auto small = two_slice_profile(0.5 * M_PI, 100, base, {0.0, 0.2}, {0.3, 0.3});
    const auto bad = check_mc_dominated(traj, small, 1.0);
    CHECK_FALSE(bad.passed);
    // Worst gap of omega(s, 0) - 0.3 sin(s): omega saturates at 1/2 past
    // pi/4 while the barrier still dips, so the maximum sits at the interior
    // root of cos(2s) = 0.3 cos(s).
    const double cstar = (0.3 + std::sqrt(0.09 + 8.0)) / 4.0;
    const double sstar = std::acos(cstar);
    const double expected = 0.5 * std::sin(2.0 * sstar) - 0.3 * std::sin(sstar);
    CHECK(bad.worst_violation == doctest::Approx(expected).epsilon(2e-3));

    CHECK_THROWS_AS(check_mc_dominated(Trajectory{}, good), PreconditionFailed);
}

TEST_CASE("check_decay enforces its hypotheses and certifies domination") {
    const auto wi = flat_interval(M_PI, 200);
    Trajectory traj;
    for (double t : {0.0, 0.25, 0.5})
        traj.push_back(snapshot_of(wi, t, [t](double s) { return std::exp(-t) * std::sin(s); }));

    auto base = [](double s) { return std::sin(s); };
    const auto good = two_slice_profile(0.5 * M_PI, 100, base, {0.0, 0.5},
                                        {1.0, std::exp(-0.5)});
    const auto rep = check_decay(traj, good, wi);
    CHECK(rep.passed);
    CHECK(rep.worst_violation <= 1e-12);

    // A barrier that decays faster than the solution fails the domination.
    const auto fast = two_slice_profile(0.5 * M_PI, 100, base, {0.0, 0.5}, {1.0, 0.05});
    const auto bad = check_decay(traj, fast, wi);
    CHECK_FALSE(bad.passed);
    CHECK(bad.worst_violation == doctest::Approx(std::exp(-0.5) - 0.05).epsilon(1e-2));

    // Wrong boundary conditions are a theorem hypothesis, not a tolerance.
    Trajectory neumann = traj;
    for (auto& s : neumann) s.bc = FieldBC::neumann_zero();
    CHECK_THROWS_AS(check_decay(neumann, good, wi), PreconditionFailed);

    // Initial data above the barrier violates Z(x, 0) <= 0.
    Trajectory tall;
    for (double t : {0.0, 0.25, 0.5})
        tall.push_back(
            snapshot_of(wi, t, [t](double s) { return 1.1 * std::exp(-t) * std::sin(s); }));
    CHECK_THROWS_AS(check_decay(tall, good, wi), PreconditionFailed);
}

TEST_CASE("check_supersolution_boundary: model equality, bad claim, preconditions") {
    // Equality-case density on [0, 1] with (kappa, lambda, N) = (-1, 0.3, 3).
    CurvatureParams params;
    params.kappa = -1.0;
    params.lambda = 0.3;
    params.bigN = 3.0;
    params.n = 1;
    WeightedInterval wi;
    wi.length = 1.0;
    wi.m = 100;
    wi.density = model_density(params, wi.length);

    ComparisonProfile phi;
    phi.s_grid = uniform_grid(0.0, 0.5, 64);
    phi.t_grid = {0.0};
    phi.values.resize(1);
    phi.phi_s.resize(1);
    phi.values[0].resize(phi.s_grid.size());
    phi.phi_s[0].resize(phi.s_grid.size());
    for (std::size_t i = 0; i < phi.s_grid.size(); ++i) {
        phi.values[0][i] = std::sin(M_PI * phi.s_grid[i]);
        phi.phi_s[0][i] = M_PI * std::cos(M_PI * phi.s_grid[i]);
    }

    const auto op = catalog("laplacian");
    const auto rep = check_supersolution_boundary(phi, wi, op, params);
    CHECK(rep.passed);
    CHECK(rep.metadata.at("kappa_effective") == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(rep.metadata.at("lambda_effective") == doctest::Approx(0.3).epsilon(1e-9));

    // A curvature claim the space cannot certify fails as a hypothesis.
    WeightedInterval flat = flat_interval(1.0, 100);
    CurvatureParams bold;
    bold.kappa = 0.5;
    bold.lambda = 0.0;
    bold.bigN = 3.0;
    bold.n = 1;
    const auto bad = check_supersolution_boundary(phi, flat, op, bold);
    CHECK_FALSE(bad.passed);
    CHECK(bad.metadata.count("hypothesis_violated") == 1);
    CHECK(bad.worst_violation == doctest::Approx(0.5).epsilon(1e-12));

    // Profile must cover [0, L/2]; N must be finite.
    ComparisonProfile shorty = phi;
    shorty.s_grid = uniform_grid(0.0, 0.4, 64);
    CHECK_THROWS_AS(check_supersolution_boundary(shorty, wi, op, params), PreconditionFailed);
    CurvatureParams infp;
    infp.kappa = -1.0;
    CHECK_THROWS_AS(check_supersolution_boundary(phi, wi, op, infp), InvalidParameter);
}

TEST_CASE("check_two_point_drift: equality case, model case, and a violator") {
    // f = s^2/2 has f'(y) - f'(x) = y - x: exact equality for kappa = 1,
    // N = infinity.
    WeightedInterval gauss;
    gauss.length = 1.0;
    gauss.m = 60;
    gauss.density = Density::polynomial({0.0, 0.0, 0.5});
    CurvatureParams inf1;
    inf1.kappa = 1.0;
    const auto eq = check_two_point_drift(gauss, inf1);
    CHECK(eq.passed);
    CHECK(std::abs(eq.worst_violation) <= eq.tolerance_used);
    CHECK(eq.metadata.at("kappa_effective") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eq.metadata.count("worst_pair_y") == 1);

    // Finite-N model density: f' = (N-1) T and tanh subadditivity give the
    // two-point inequality with slack.
    CurvatureParams model;
    model.kappa = -0.3;
    model.lambda = 0.0;
    model.bigN = 3.0;
    model.n = 1;
    WeightedInterval wm;
    wm.length = 1.0;
    wm.m = 60;
    wm.density = model_density(model, wm.length);
    const auto ok = check_two_point_drift(wm, model);
    CHECK(ok.passed);

    // Concave density cannot satisfy kappa = 0.
    WeightedInterval bad;
    bad.length = 1.0;
    bad.m = 60;
    bad.density = Density::polynomial({0.0, 0.0, -0.25});
    CurvatureParams flat0;
    flat0.kappa = 0.0;
    const auto viol = check_two_point_drift(bad, flat0);
    CHECK_FALSE(viol.passed);
    CHECK(viol.worst_violation == doctest::Approx(0.5).epsilon(1e-2));
    CHECK(viol.metadata.at("kappa_effective") == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("check_eigen_comparison compares solved eigenvalues with a residual gate") {
    const auto lap = catalog("laplacian");
    CurvatureParams flat;
    flat.kappa = 0.0;
    flat.lambda = 0.0;
    flat.bigN = 3.0;
    flat.n = 1;
    const auto model = shoot_1d_model(lap, flat, 1.0, 1.0);
    const auto space = shoot_weighted_interval(lap, flat_interval(1.0, 100),
                                               EigenBC::dirichlet_left_neumann_right, 1.0);
    const auto rep = check_eigen_comparison(space, model);
    CHECK(rep.passed);
    CHECK(std::abs(rep.worst_violation) <= 1e-6);
    CHECK(rep.metadata.at("lambda_model") == doctest::Approx(0.25 * M_PI * M_PI).epsilon(1e-9));
    CHECK(std::abs(rep.metadata.at("gap_absolute")) < 1e-6);

    EigenResult corrupt = space;
    corrupt.residual = 1.0;
    CHECK_THROWS_AS(check_eigen_comparison(corrupt, model), PreconditionFailed);
    CHECK_THROWS_AS(check_eigen_comparison(space, corrupt), PreconditionFailed);
}

TEST_CASE("check_gradient_bound certifies the barrier's own trajectory") {
    // Evolve the sin barrier and feed the same table back as the trajectory:
    // Psi(u(x, t)) = x exactly at nodes, so both parts sit at equality.
    const auto grid = uniform_grid(0.0, 0.5 * M_PI, 50);
    std::vector<double> phi0(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) phi0[i] = std::sin(grid[i]);
    const double h = grid[1] - grid[0];
    const auto prof =
        evolve_profile(catalog("laplacian"), [](double) { return 0.0; }, SourceTerm::zero(),
                       grid, phi0, ProfileBC::pinned_neumann(), 0.4 * h * h, 0.2);
    const auto inv = invert_profile(prof);

    WeightedInterval wi = flat_interval(0.5 * M_PI, 50);
    Trajectory traj;
    for (std::size_t k = 0; k < prof.t_grid.size(); ++k) {
        Field1D snap;
        snap.space = wi;
        snap.time = prof.t_grid[k];
        snap.values = prof.values[k];
        traj.push_back(std::move(snap));
    }
    const auto rep = check_gradient_bound(traj, inv, 0.05);
    CHECK(rep.passed);

    // Dilating the barrier grid inflates Psi by 1.2 and flips the check.
    ComparisonProfile stretched = prof;
    for (auto& s : stretched.s_grid) s *= 1.2;
    const auto inv_bad = invert_profile(stretched);
    const auto bad = check_gradient_bound(traj, inv_bad, 0.05);
    CHECK_FALSE(bad.passed);
    CHECK(bad.worst_violation > 0.2);

    // Values beyond the barrier's range are a structural error.
    Trajectory tall = traj;
    for (auto& snap : tall)
        for (auto& v : snap.values) v *= 1.5;
    CHECK_THROWS_AS(check_gradient_bound(tall, inv, 0.05), RangeError);

    CHECK_THROWS_AS(check_gradient_bound(Trajectory{}, inv, 0.05), PreconditionFailed);
}

TEST_CASE("decay_rate_estimate recovers an exact exponential rate") {
    const auto wi = flat_interval(1.0, 20);
    Trajectory traj;
    for (int k = 0; k <= 10; ++k) {
        const double t = 0.1 * k;
        traj.push_back(snapshot_of(wi, t, [t](double s) {
            return std::exp(-1.3 * t) * (0.5 + 0.5 * std::sin(M_PI * s));
        }));
    }
    CHECK(decay_rate_estimate(traj) == doctest::Approx(1.3).epsilon(1e-12));

    Trajectory tiny(traj.begin(), traj.begin() + 3);
    CHECK_THROWS_AS(decay_rate_estimate(tiny), PreconditionFailed);

    Trajectory flat_zero;
    for (int k = 0; k < 6; ++k) flat_zero.push_back(snapshot_of(wi, 0.1 * k, [](double) {
        return 0.0;
    }));
    CHECK_THROWS_AS(decay_rate_estimate(flat_zero), DegenerateFit);

    Trajectory same_time;
    for (int k = 0; k < 6; ++k)
        same_time.push_back(snapshot_of(wi, 2.0, [](double) { return 1.0; }));
    CHECK_THROWS_AS(decay_rate_estimate(same_time), DegenerateFit);
}
