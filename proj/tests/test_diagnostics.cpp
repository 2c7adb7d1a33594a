#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "spinbath/diagnostics.hpp"

using namespace spinbath;

namespace {

HalfInt h(int twice) { return HalfInt::from_twice(twice); }

DampingMatrix gamma_zz(double g)
{
    DampingMatrix m = DampingMatrix::Zero();
    m(2, 2) = g;
    return m;
}

Vector uniform_state(int twice_j)
{
    const SpinQuantum j(h(twice_j));
    return entangled_state(make_entangled_spec(ProfileKind::uniform, j, j));
}

DecoherenceModel independent_one_axis(double g1, double g2)
{
    return DecoherenceModel{IndependentBath{gamma_zz(g1), gamma_zz(g2)}, AxisSet::one_axis(), {}};
}

DecoherenceModel common_one_axis(double g, double lambda, CouplingScale scale = CouplingScale::composite)
{
    return DecoherenceModel{CommonBath{gamma_zz(g), lambda, scale}, AxisSet::one_axis(), {}};
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

} // namespace

TEST_CASE("linear entropy")
{
    CHECK(linear_entropy(DensityMatrix::checked(Matrix::Identity(2, 2) / 2.0, {2})) == doctest::Approx(0.5));
    CHECK(linear_entropy(DensityMatrix::checked(Matrix::Identity(3, 3) / 3.0, {3})) == doctest::Approx(2.0 / 3.0));
    CHECK(std::abs(linear_entropy(density_from_pure(uniform_state(2), {3, 3}))) <= 1e-15);
}

TEST_CASE("numeric rate examples")
{
    const SpinQuantum half(h(1)), one(h(2));
    SUBCASE("|+x> under one-axis dephasing")
    {
        const Generator g = build_generator(DecoherenceModel{SingleBath{gamma_zz(1.0)}, AxisSet::one_axis(), {}},
                                            {half, std::nullopt});
        Vector plus(2);
        plus << 1.0, 1.0;
        plus /= std::sqrt(2.0);
        CHECK(entropy_rate_numeric(g, density_from_pure(plus, {2})) == doctest::Approx(0.5).epsilon(1e-14));
    }
    SUBCASE("Fock states do not lose purity under one-axis coupling")
    {
        const Generator g = build_generator(independent_one_axis(1.0, 2.0), {one, one});
        for (int k1 = 0; k1 < 3; ++k1)
            for (int k2 = 0; k2 < 3; ++k2) {
                const Vector psi = product_state(fock_state(one, one.m_at(k1)), fock_state(one, one.m_at(k2)));
                CHECK(std::abs(entropy_rate_numeric(g, density_from_pure(psi, {3, 3}))) <= 1e-15);
            }
    }
    SUBCASE("maximally mixed state is stationary")
    {
        std::mt19937_64 rng(4);
        const DecoherenceModel model{CommonBath{oracle::random_gamma(AxisSet::three_axis(), rng), 0.6},
                                     AxisSet::three_axis(), {}};
        const Generator g = build_generator(model, {one, one});
        const DensityMatrix mixed = DensityMatrix::checked(Matrix::Identity(9, 9) / 9.0, {3, 3});
        CHECK(std::abs(entropy_rate_numeric(g, mixed)) <= 1e-15);
        CHECK(stationary_residual(g, mixed) <= 1e-14);
    }
}

TEST_CASE("analytic rate examples")
{
    const SpinQuantum one(h(2));
    const Vector psi = uniform_state(2);

    const AnalyticRate indep = entropy_rate_analytic(psi, independent_one_axis(1.0, 1.0), {one, one});
    CHECK(indep.total == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
    CHECK(indep.contributions.at("e1.zz") == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
    CHECK(indep.contributions.at("e2.zz") == doctest::Approx(4.0 / 3.0).epsilon(1e-14));

    CHECK(std::abs(entropy_rate_analytic(psi, common_one_axis(1.0, 1.0), {one, one}).total) <= 1e-15);
    CHECK(entropy_rate_analytic(psi, common_one_axis(1.0, 1.5), {one, one}).total
          == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    // The total-spin scale is four times the composite one.
    CHECK(entropy_rate_analytic(psi, common_one_axis(1.0, 1.5, CouplingScale::total_spin), {one, one}).total
          == doctest::Approx(4.0 / 3.0).epsilon(1e-14));

    CHECK_THROWS_AS(entropy_rate_analytic(2.0 * psi, independent_one_axis(1.0, 1.0), {one, one}),
                    std::invalid_argument);
}

TEST_CASE("closed-form estimates")
{
    CHECK(entropy_rate_estimate(3.0, independent_one_axis(1.0, 1.0)) == doctest::Approx(12.0));
    const SpinQuantum three(h(6));
    CHECK(entropy_rate_analytic(uniform_state(6), independent_one_axis(1.0, 1.0), {three, three}).total
          == doctest::Approx(16.0).epsilon(1e-13));
    CHECK(entropy_rate_estimate(5.0, common_one_axis(1.0, 1.0)) == 0.0);
    CHECK(entropy_rate_estimate(1.0, common_one_axis(1.0, 0.5)) == doctest::Approx(2.0 * 0.25 / 3.0));
    CHECK_THROWS_AS(entropy_rate_estimate(0.5, independent_one_axis(1.0, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(entropy_rate_estimate(2.0, DecoherenceModel{SingleBath{gamma_zz(1.0)}, AxisSet::one_axis(), {}}),
                    std::invalid_argument);
}

TEST_CASE("rate report")
{
    const SpinQuantum one(h(2));
    const RateReport r = rate_report(uniform_state(2), independent_one_axis(1.0, 1.0), {one, one}, 1.0);
    CHECK(r.numeric_rate == doctest::Approx(8.0 / 3.0).epsilon(1e-13));
    CHECK(r.analytic_rate == doctest::Approx(8.0 / 3.0).epsilon(1e-13));
    REQUIRE(r.estimate_rate.has_value());
    CHECK(*r.estimate_rate == doctest::Approx(4.0 / 3.0));
    CHECK(r.per_axis_contributions.size() == 2);

    CHECK_FALSE(rate_report(uniform_state(2), independent_one_axis(1.0, 1.0), {one, one}).estimate_rate.has_value());
    CHECK_FALSE(rate_report(uniform_state(1), independent_one_axis(1.0, 1.0), {SpinQuantum(h(1)), SpinQuantum(h(1))}, 0.5)
                    .estimate_rate.has_value());
}

TEST_CASE("numeric and analytic rates agree on random corpora")
{
    std::mt19937_64 rng(31);
    const std::vector<std::pair<int, int>> spins{{1, 1}, {2, 2}, {2, 4}, {3, 5}, {4, 4}};
    for (const auto& [t1, t2] : spins) {
        const SpinQuantum a(h(t1)), b(h(t2));
        const int n = a.dim() * b.dim();
        for (const AxisSet axes : {AxisSet::one_axis(), AxisSet::two_axis(), AxisSet::three_axis()}) {
            std::vector<DecoherenceModel> models{
                {IndependentBath{oracle::random_gamma(axes, rng), oracle::random_gamma(axes, rng)}, axes, {}},
                {CommonBath{oracle::random_gamma(axes, rng), 0.3}, axes, oracle::random_hermitian(n, rng)},
                {CommonBath{oracle::random_gamma(axes, rng), 1.7, CouplingScale::total_spin}, axes, {}},
            };
            for (const auto& model : models) {
                const Vector psi = oracle::random_state(n, rng);
                const RateReport r = rate_report(psi, model, {a, b});
                CAPTURE(t1);
                CAPTURE(t2);
                CHECK(rel_diff(r.numeric_rate, r.analytic_rate) <= 1e-10);
            }
        }
    }
}

TEST_CASE("purity never grows at a pure state")
{
    std::mt19937_64 rng(8);
    const SpinQuantum a(h(3)), b(h(2));
    for (int trial = 0; trial < 20; ++trial) {
        const AxisSet axes = trial % 3 == 0 ? AxisSet::one_axis() : AxisSet::three_axis();
        const DecoherenceModel model{CommonBath{oracle::random_gamma(axes, rng), 2.0 * (trial % 5) / 4.0}, axes, {}};
        const Generator g = build_generator(model, {a, b});
        const DensityMatrix rho = density_from_pure(oracle::random_state(12, rng), {4, 3});
        CHECK(entropy_rate_numeric(g, rho) >= -1e-12);
    }
}

TEST_CASE("finite-difference check of the rate")
{
    std::mt19937_64 rng(12);
    const SpinQuantum a(h(2)), b(h(2));
    const DecoherenceModel model{CommonBath{oracle::random_gamma(AxisSet::three_axis(), rng), 0.4},
                                 AxisSet::three_axis(), {}};
    const Generator g = build_generator(model, {a, b});
    const DensityMatrix rho0 = density_from_pure(oracle::random_state(9, rng), {3, 3});
    const double delta = 1e-5;
    const Trajectory traj = evolve(g, rho0, delta, EvolveControl{});
    const double fd = (traj.samples.back().s_lin - traj.samples.front().s_lin) / delta;
    const double rate = entropy_rate_numeric(g, rho0);
    CHECK(std::abs(fd - rate) <= 1e-3 * std::abs(rate));
}

TEST_CASE("(lambda - 1)^2 suppression")
{
    const SpinQuantum two(h(4));
    const Vector psi = uniform_state(4);
    std::vector<double> xs, ys;
    for (int k = 1; k <= 50; ++k) {
        const double lambda = 1.0 + 0.01 * k;
        xs.push_back(std::log(lambda - 1.0));
        ys.push_back(std::log(entropy_rate_analytic(psi, common_one_axis(1.0, lambda), {two, two}).total));
    }
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(std::abs(slope - 2.0) <= 1e-6);

    // Symmetric about lambda = 1.
    for (double d : {0.1, 0.5, 1.0}) {
        const double lo = entropy_rate_analytic(psi, common_one_axis(1.0, 1.0 - d), {two, two}).total;
        const double hi = entropy_rate_analytic(psi, common_one_axis(1.0, 1.0 + d), {two, two}).total;
        CHECK(rel_diff(lo, hi) <= 1e-12);
    }
}

TEST_CASE("Ntilde scaling of uniform states")
{
    for (int n = 1; n <= 10; ++n) {
        const SpinQuantum j(h(2 * n));
        const Vector psi = uniform_state(2 * n);
        const double g1 = 1.0, g2 = 0.4;
        const double exact = entropy_rate_analytic(psi, independent_one_axis(g1, g2), {j, j}).total;
        CHECK(rel_diff(exact, 2.0 * (g1 + g2) * n * (n + 1.0) / 3.0) <= 1e-10);
        const double ratio = exact / entropy_rate_estimate(n, independent_one_axis(g1, g2));
        CHECK(ratio >= 1.0);
        CHECK(ratio <= 1.0 + 1.0 / n + 1e-12);
    }
}

TEST_CASE("entanglement entropy")
{
    for (int n = 0; n <= 10; ++n) {
        const DensityMatrix rho = density_from_pure(uniform_state(2 * n), {2 * n + 1, 2 * n + 1});
        CHECK(std::abs(von_neumann_entropy(partial_trace(rho, 0)) - std::log(2.0 * n + 1.0)) <= 1e-10);
    }
    const SpinQuantum half(h(1));
    const Vector singlet = entangled_state(make_entangled_spec(ProfileKind::singlet, half, half));
    CHECK(von_neumann_entropy(partial_trace(density_from_pure(singlet, {2, 2}), 1))
          == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(std::abs(von_neumann_entropy(density_from_pure(singlet, {2, 2}))) <= 1e-12);

    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const DensityMatrix rho = density_from_pure(oracle::random_state(12, rng), {3, 4});
        const double e = von_neumann_entropy(partial_trace(rho, 0));
        CHECK(e >= -1e-12);
        CHECK(e <= std::log(3.0) + 1e-12);
    }
}

TEST_CASE("variances")
{
    const SpinQuantum half(h(1));
    SUBCASE("Lz at lambda = 1 vanishes on |Psi_ent>")
    {
        std::mt19937_64 rng(2);
        const SpinQuantum a(h(4)), b(h(6));
        const Vector psi = entangled_state(EntangledStateSpec(a, b, oracle::random_state(5, rng)));
        CHECK(std::abs(variance_exact(composite_coupling_ops(a, b, 1.0)[2], psi)) <= 1e-12);
    }
    SUBCASE("total-spin Jx on |1, 0>")
    {
        const Vector psi = coupled_basis_state(half, half, CoupledLevel{h(2), h(0)});
        CHECK(variance_exact(total_spin_ops(half, half)[0], psi) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("Jz on |+x>")
    {
        Vector plus(2);
        plus << 1.0, 1.0;
        plus /= std::sqrt(2.0);
        CHECK(variance_exact(angular_momentum_ops(half).jz, plus) == doctest::Approx(0.25).epsilon(1e-14));
    }
    SUBCASE("rejects non-Hermitian operators")
    {
        Matrix raise = Matrix::Zero(2, 2);
        raise(0, 1) = 1.0;
        CHECK_THROWS_AS(variance_exact(SpinOperator(raise, {2}), Vector::Unit(2, 0)), std::invalid_argument);
    }
    SUBCASE("variances are non-negative")
    {
        std::mt19937_64 rng(19);
        const AxisOps ops = total_spin_ops(SpinQuantum(h(3)), SpinQuantum(h(2)));
        for (int trial = 0; trial < 10; ++trial)
            for (const auto& op : ops)
                CHECK(variance_exact(op, oracle::random_state(12, rng)) >= -1e-12);
    }
}

TEST_CASE("approximate Lx variance")
{
    const SpinQuantum half(h(1)), one(h(2));
    CHECK(std::abs(variance_Lx_approx(make_entangled_spec(ProfileKind::singlet, half, half))) <= 1e-15);

    const EntangledStateSpec uniform = make_entangled_spec(ProfileKind::uniform, one, one);
    CHECK(variance_Lx_approx(uniform) == doctest::Approx(2.0).epsilon(1e-14));
    // The exact total-spin variance keeps m(m-1) in the cross term and the m = -Ntilde boundary.
    CHECK(variance_exact(total_spin_ops(one, one)[0], entangled_state(uniform)) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
    // The composite operator at lambda = 1 is half the total spin.
    CHECK(variance_exact(composite_coupling_ops(one, one, 1.0)[0], entangled_state(uniform))
          == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

    for (int twice = 2; twice <= 12; twice += 2) {
        const SpinQuantum j(h(twice));
        CHECK(std::abs(variance_Lx_approx(make_entangled_spec(ProfileKind::alternating_uniform, j, j))) <= 1e-12);
    }
    CHECK_THROWS_AS(variance_Lx_approx(make_entangled_spec(ProfileKind::uniform, one, SpinQuantum(h(4)))),
                    std::invalid_argument);
}

TEST_CASE("approximate Lx variance tracks the exact one for broad gaussians")
{
    for (int twice = 8; twice <= 16; twice += 2) {
        const SpinQuantum j(h(twice));
        const Matrix jx = total_spin_ops(j, j)[0].matrix();
        for (double width : {2.0, 3.0, 4.0}) {
            const EntangledStateSpec spec = make_entangled_spec(ProfileKind::gaussian, j, j, width);
            const double exact = variance_exact(SpinOperator(jx, {j.dim(), j.dim()}), entangled_state(spec));
            CAPTURE(twice);
            CAPTURE(width);
            CHECK(std::abs(variance_Lx_approx(spec) - exact) / exact <= 0.15);
        }
    }
}

TEST_CASE("minimization residual")
{
    CHECK(mincond_residual(coefficient_profile(ProfileKind::singlet, h(1))) <= 1e-15);
    CHECK(mincond_residual(coefficient_profile(ProfileKind::alternating_uniform, h(6))) <= 1e-12);
    CHECK(mincond_residual(coefficient_profile(ProfileKind::uniform, h(2))) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    Vector single = Vector::Zero(3);
    single(1) = 1.0;
    CHECK(mincond_residual(single) == 1.0);
    for (int twice = 1; twice <= 12; ++twice)
        CHECK(mincond_residual(coefficient_profile(ProfileKind::uniform, h(twice))) > 0.0);
}

TEST_CASE("Schmidt number")
{
    CHECK(schmidt_number(uniform_state(2), {3, 3}) == 3);
    std::mt19937_64 rng(1);
    CHECK(schmidt_number(product_state(oracle::random_state(3, rng), oracle::random_state(4, rng)), {3, 4}) == 1);
    CHECK(schmidt_number(uniform_state(5), {6, 6}) == 6);
    CHECK_THROWS_AS(schmidt_number(uniform_state(2), {3, 4}), std::invalid_argument);
    CHECK_THROWS_AS(schmidt_number(uniform_state(2), {9}), std::invalid_argument);
}

TEST_CASE("coupled-state rate")
{
    DampingMatrix two = DampingMatrix::Zero();
    two(0, 0) = 0.1;
    two(2, 2) = 1.0;
    CHECK(coupled_state_rate(h(0), h(0), AxisSet::three_axis(), DampingMatrix::Identity()) == 0.0);
    CHECK(coupled_state_rate(h(2), h(0), AxisSet::two_axis(), two) == doctest::Approx(0.2));
    CHECK(coupled_state_rate(h(4), h(0), AxisSet::two_axis(), two) == doctest::Approx(0.6));
    CHECK(coupled_state_rate(h(2), h(0), AxisSet::one_axis(), gamma_zz(1.0)) == 0.0);
    CHECK_THROWS_AS(coupled_state_rate(h(2), h(2), AxisSet::two_axis(), two), std::invalid_argument);
    CHECK_THROWS_AS(coupled_state_rate(h(1), h(0), AxisSet::two_axis(), two), std::invalid_argument);

    SUBCASE("covariance form on |1, 0> of two spin-1/2 in the total-spin scale")
    {
        const SpinQuantum half(h(1));
        const Vector psi = coupled_basis_state(half, half, CoupledLevel{h(2), h(0)});
        const DecoherenceModel model{CommonBath{two, 1.0, CouplingScale::total_spin}, AxisSet::two_axis(), {}};
        CHECK(std::abs(entropy_rate_analytic(psi, model, {half, half}).total - 0.2) <= 1e-10);
        // The composite scale gives a quarter of it.
        const DecoherenceModel composite{CommonBath{two, 1.0}, AxisSet::two_axis(), {}};
        CHECK(std::abs(entropy_rate_analytic(psi, composite, {half, half}).total - 0.05) <= 1e-10);
    }
}

TEST_CASE("L(L+1) law for coupled states")
{
    std::mt19937_64 rng(77);
    for (int t1 = 0; t1 <= 8; ++t1)
        for (int t2 = t1 % 2; t1 + t2 <= 16; t2 += 2) {
            const SpinQuantum a(h(t1)), b(h(t2));
            for (const AxisSet axes : {AxisSet::one_axis(), AxisSet::two_axis(), AxisSet::three_axis()}) {
                const DampingMatrix gamma = oracle::random_gamma(axes, rng);
                const DecoherenceModel model{CommonBath{gamma, 1.0, CouplingScale::total_spin}, axes, {}};
                for (int tL = std::abs(t1 - t2); tL <= t1 + t2; tL += 2) {
                    const Vector psi = coupled_basis_state(a, b, CoupledLevel{h(tL), h(0)});
                    const double analytic = entropy_rate_analytic(psi, model, {a, b}).total;
                    CAPTURE(t1);
                    CAPTURE(t2);
                    CAPTURE(tL);
                    CHECK(std::abs(analytic - coupled_state_rate(h(tL), h(0), axes, gamma)) <= 1e-9);
                }
            }
        }
}

TEST_CASE("DFS certification")
{
    const SpinQuantum one(h(2));
    const Generator indep = build_generator(independent_one_axis(1.0, 1.0), {one, one});
    const Vector f_up_down = product_state(fock_state(one, h(2)), fock_state(one, h(-2)));
    const Vector f_up_zero = product_state(fock_state(one, h(2)), fock_state(one, h(0)));
    CHECK(certify_state(indep, f_up_down).certified);
    CHECK(certify_state(indep, f_up_zero).certified);
    // Coherences between different m2 decay, so their span is not protected.
    const DfsVerdict mixed = certify_subspace(indep, {f_up_down, f_up_zero});
    CHECK_FALSE(mixed.certified);
    CHECK(mixed.residual > 0.1);

    // At lambda = 1 every |m, -m> is annihilated by Lz, so the whole manifold is protected.
    const Generator common = build_generator(common_one_axis(1.0, 1.0), {one, one});
    std::vector<Vector> manifold;
    for (int tm = 2; tm >= -2; tm -= 2)
        manifold.push_back(product_state(fock_state(one, h(tm)), fock_state(one, h(-tm))));
    CHECK(certify_subspace(common, manifold).certified);
    CHECK(certify_state(common, uniform_state(2)).certified);

    DampingMatrix two = DampingMatrix::Zero();
    two(0, 0) = 0.1;
    two(2, 2) = 1.0;
    const Generator two_axis
        = build_generator(DecoherenceModel{IndependentBath{two, two}, AxisSet::two_axis(), {}}, {one, one});
    const DfsVerdict v = certify_state(two_axis, f_up_down);
    CHECK_FALSE(v.certified);
    CHECK(v.purity_rate > 0.0);
}
