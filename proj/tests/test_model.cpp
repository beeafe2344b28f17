#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <tuple>

#include "adisweep/model.hpp"
#include "adisweep/numerics.hpp"

using namespace adisweep;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const ModelParams kParams{0.2, 0.1};
}

TEST_CASE("angle wrapping lands in the half-open interval and is idempotent") {
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(pi) == pi);
    CHECK(wrap_angle(-pi) == pi);
    CHECK(wrap_angle(3.0 * pi) == pi);
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 2000; ++i) {
        double x = u(gen);
        double w = wrap_angle(x);
        CHECK(w > -pi);
        CHECK(w <= pi);
        CHECK(wrap_angle(w) == w);
        CHECK_THAT(std::remainder(x - w, 2.0 * pi), WithinAbs(0.0, 1e-9));
    }
}

TEST_CASE("adaptive quadrature reaches the requested tolerance") {
    double s = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, pi, 1e-10);
    CHECK_THAT(s, WithinAbs(2.0, 1e-10));
    double g = integrate_adaptive([](double x) { return std::exp(-x * x); }, -6.0, 6.0, 1e-10);
    CHECK_THAT(g, WithinAbs(std::sqrt(pi), 1e-9));
}

TEST_CASE("zero-crossing frequency estimate recovers a synthetic tone") {
    std::vector<double> t, y;
    for (int i = 0; i < 5000; ++i) {
        t.push_back(0.01 * i);
        y.push_back(std::sin(2.7 * 0.01 * i + 0.4));
    }
    CHECK_THAT(frequency_from_zero_crossings(t, y), WithinRel(2.7, 1e-5));
}

TEST_CASE("parameter validation rejects regimes without a fork") {
    CHECK_THROWS_AS((ModelParams{0.1, 0.1}.validate()), validation_error);
    CHECK_THROWS_WITH((ModelParams{0.05, 0.1}.validate()),
                      ContainsSubstring("no bifurcation regime"));
    CHECK_THROWS_AS((ModelParams{0.2, 0.0}.validate()), validation_error);
    CHECK_THROWS_AS((ModelParams{-0.2, -0.3}.validate()), validation_error);
    CHECK_NOTHROW(kParams.validate());
}

TEST_CASE("energy matches closed forms at stationary points") {
    BifurcationLoci loci = bifurcation_points(kParams);

    double pb = loci.branch_phase(-0.25);
    CHECK_THAT(pb, WithinAbs(-2.7610862764774284, 1e-15));
    // Symmetric-point energy is -sqrt(R^2 + delta^2).
    CHECK_THAT(hamiltonian_value({0.0, pb}, -0.25, kParams),
               WithinAbs(-0.26925824035672520, 1e-15));

    // Bifurcated center: -c/2 - (R^2 + delta^2)/(2c), rational at this point.
    double e = loci.eta(-0.1);
    CHECK_THAT(hamiltonian_value({-e, loci.branch_phase(-0.1)}, -0.1, kParams),
               WithinAbs(-0.15, 1e-15));

    // Poles of the sphere: only the self-interaction term survives.
    CHECK(hamiltonian_value({1.0, 0.77}, -0.2, kParams) == -0.1);
    CHECK(hamiltonian_value({-1.0, -2.0}, 0.3, kParams) == -0.1);
}

TEST_CASE("energy is even in q and blind to full phase turns") {
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> uq(-0.95, 0.95), up(-20.0, 20.0), ur(-0.3, 0.3);
    for (int i = 0; i < 500; ++i) {
        double q = uq(gen), p = up(gen), r = ur(gen);
        CHECK(hamiltonian_value({q, p}, r, kParams) == hamiltonian_value({-q, p}, r, kParams));
        CHECK(hamiltonian_value({q, p}, r, kParams) ==
              hamiltonian_value({q, wrap_angle(p)}, r, kParams));
        Gradient a = gradient({q, p}, r, kParams);
        Gradient b = gradient({q, wrap_angle(p)}, r, kParams);
        CHECK(a.dq == b.dq);
        CHECK(a.dp == b.dp);
    }
}

TEST_CASE("gradient matches frozen values and finite differences") {
    Gradient g = gradient({0.1, 0.3}, -0.2, kParams);
    CHECK_THAT(g.dq, WithinAbs(-0.042173075786042738, 1e-15));
    CHECK_THAT(g.dp, WithinAbs(0.036247001881115315, 1e-15));

    // The symmetric point at R = 0 is stationary.
    Gradient g0 = gradient({0.0, -0.5 * pi}, 0.0, kParams);
    CHECK_THAT(g0.dq, WithinAbs(0.0, 1e-12));
    CHECK_THAT(g0.dp, WithinAbs(0.0, 1e-12));

    const double h = 1e-5;
    for (auto [q, p, r] : {std::tuple{0.3, 0.4, -0.2},
                           std::tuple{-0.5, 2.0, 0.1},
                           std::tuple{0.05, -2.9, 0.17},
                           std::tuple{0.8, -0.4, -0.05}}) {
        Gradient an = gradient({q, p}, r, kParams);
        double fd_q = (hamiltonian_value({q + h, p}, r, kParams) -
                       hamiltonian_value({q - h, p}, r, kParams)) /
                      (2.0 * h);
        double fd_p = (hamiltonian_value({q, p + h}, r, kParams) -
                       hamiltonian_value({q, p - h}, r, kParams)) /
                      (2.0 * h);
        CHECK_THAT(an.dq, WithinRel(fd_q, 1e-8));
        CHECK_THAT(an.dp, WithinRel(fd_p, 1e-8));
    }
}

TEST_CASE("hessian matches frozen values and finite differences of the gradient") {
    BifurcationLoci loci = bifurcation_points(kParams);
    Hessian at_center = hessian({0.0, loci.branch_phase(-0.25)}, -0.25, kParams);
    CHECK_THAT(at_center.qq, WithinAbs(0.069258240356725202, 1e-15));
    CHECK_THAT(at_center.pp, WithinAbs(0.26925824035672520, 1e-15));
    CHECK_THAT(at_center.qp, WithinAbs(0.0, 1e-15));

    Hessian symm = hessian({0.0, 0.0}, 0.1, kParams);
    CHECK_THAT(symm.qq, WithinAbs(-0.1, 1e-16));
    CHECK_THAT(symm.pp, WithinAbs(0.1, 1e-16));
    CHECK_THAT(symm.qp, WithinAbs(0.0, 1e-16));

    const double h = 1e-5;
    for (auto [q, p, r] : {std::tuple{0.3, 0.4, -0.2},
                           std::tuple{-0.5, 2.0, 0.1},
                           std::tuple{0.6, -1.2, 0.22}}) {
        Hessian an = hessian({q, p}, r, kParams);
        double fd_qq = (gradient({q + h, p}, r, kParams).dq -
                        gradient({q - h, p}, r, kParams).dq) /
                       (2.0 * h);
        double fd_pp = (gradient({q, p + h}, r, kParams).dp -
                        gradient({q, p - h}, r, kParams).dp) /
                       (2.0 * h);
        double fd_qp = (gradient({q, p + h}, r, kParams).dq -
                        gradient({q, p - h}, r, kParams).dq) /
                       (2.0 * h);
        double fd_pq = (gradient({q + h, p}, r, kParams).dp -
                        gradient({q - h, p}, r, kParams).dp) /
                       (2.0 * h);
        CHECK_THAT(an.qq, WithinRel(fd_qq, 1e-6));
        CHECK_THAT(an.pp, WithinRel(fd_pp, 1e-6));
        CHECK_THAT(an.qp, WithinAbs(fd_qp, 1e-6));
        CHECK_THAT(an.qp, WithinAbs(fd_pq, 1e-6));
    }
}

TEST_CASE("derivatives refuse the singular rim, energy allows the closed disk") {
    CHECK_NOTHROW(hamiltonian_value({1.0, 0.0}, 0.1, kParams));
    CHECK_THROWS_AS(hamiltonian_value({1.0 + 1e-9, 0.0}, 0.1, kParams), state_domain_error);
    CHECK_THROWS_AS(gradient({1.0 - 1e-13, 0.0}, 0.1, kParams), state_domain_error);
    CHECK_THROWS_AS(hessian({-1.0 + 1e-13, 0.0}, 0.1, kParams), state_domain_error);
    CHECK_NOTHROW(gradient({1.0 - 1e-6, 0.0}, 0.1, kParams));
}

TEST_CASE("split and rejoin couplings match the closed form") {
    BifurcationLoci loci = bifurcation_points(kParams);
    CHECK_THAT(loci.r1, WithinAbs(-0.17320508075688773, 1e-12));
    CHECK_THAT(loci.r2, WithinAbs(0.17320508075688773, 1e-12));
    CHECK(loci.r1 == -loci.r2);

    CHECK_THAT(loci.eta(0.0), WithinAbs(0.86602540378443865, 1e-15));
    CHECK(loci.eta(loci.r2) == 0.0);
    CHECK(loci.eta(0.25) == 0.0);  // clamped outside the window
    CHECK(loci.eta(loci.r2 - 1e-10) < 1e-4);

    CHECK(loci.branch_phase(0.0) == -0.5 * pi);
    CHECK_THAT(loci.branch_phase(1e-9), WithinAbs(-0.5 * pi, 1e-7));
    CHECK_THAT(loci.branch_phase(-1e-9), WithinAbs(-0.5 * pi, 1e-7));
    CHECK_THAT(loci.mu(-0.1) - loci.branch_phase(-0.1), WithinAbs(pi, 1e-15));
    CHECK(loci.mu(0.1) == loci.branch_phase(0.1));

    // The window collapses as the couplings merge.
    BifurcationLoci tight = bifurcation_points({0.1 + 1e-9, 0.1});
    CHECK(tight.r2 < 2e-5);
    CHECK_THROWS_AS(bifurcation_points({0.1, 0.1}), validation_error);
}

TEST_CASE("one center outside the split, pair plus saddle inside") {
    auto single = fixed_points(-0.25, kParams);
    REQUIRE(single.size() == 1);
    CHECK_THAT(single[0].q_bar, WithinAbs(0.0, 1e-14));
    CHECK_THAT(single[0].p_bar, WithinAbs(-2.7610862764774284, 1e-14));
    CHECK(single[0].stability == Stability::StableCenter);

    auto right = fixed_points(0.25, kParams);
    REQUIRE(right.size() == 1);
    CHECK_THAT(right[0].p_bar, WithinAbs(-0.38050637711236488, 1e-14));

    auto triple = fixed_points(-0.1, kParams);
    REQUIRE(triple.size() == 3);
    CHECK_THAT(triple[0].q_bar, WithinAbs(-0.70710678118654752, 1e-12));
    CHECK_THAT(triple[1].q_bar, WithinAbs(0.0, 1e-14));
    CHECK_THAT(triple[2].q_bar, WithinAbs(+0.70710678118654752, 1e-12));
    CHECK(triple[0].stability == Stability::StableCenter);
    CHECK(triple[1].stability == Stability::UnstableSaddle);
    CHECK(triple[2].stability == Stability::StableCenter);
    CHECK(triple[0].q_bar < triple[1].q_bar);
    CHECK(triple[1].q_bar < triple[2].q_bar);

    // Exactly at the split the list is already the single center.
    BifurcationLoci loci = bifurcation_points(kParams);
    CHECK(fixed_points(loci.r1, kParams).size() == 1);

    auto mid = fixed_points(0.0, kParams);
    REQUIRE(mid.size() == 3);
    CHECK_THAT(mid[0].q_bar, WithinAbs(-0.86602540378443865, 1e-12));
    CHECK_THAT(mid[2].q_bar, WithinAbs(+0.86602540378443865, 1e-12));
    CHECK(mid[1].p_bar == -0.5 * pi);
}

TEST_CASE("stationarity residual vanishes at every returned point") {
    std::mt19937 gen(12345);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    while (checked < 1000) {
        double c = 0.15 + 0.2 * u(gen);
        double delta = c * (0.3 + 0.4 * u(gen));
        ModelParams m{c, delta};
        BifurcationLoci loci = bifurcation_points(m);
        double r = c * (-1.5 + 3.0 * u(gen));
        if (std::abs(r - loci.r1) < 1e-6 || std::abs(r - loci.r2) < 1e-6) continue;
        for (const FixedPoint& fp : fixed_points(r, m)) {
            Gradient g = gradient({fp.q_bar, fp.p_bar}, r, m);
            CHECK(std::hypot(g.dq, g.dp) < 1e-12);
        }
        ++checked;
    }
}

TEST_CASE("branch values stay continuous across zero and shrink into the loci") {
    auto upper_q = [&](double r) { return fixed_points(r, kParams).back().q_bar; };
    CHECK_THAT(upper_q(1e-8) - upper_q(-1e-8), WithinAbs(0.0, 1e-7));
    CHECK(upper_q(0.17) < upper_q(0.1));
    CHECK(upper_q(0.1) < upper_q(0.0));
    BifurcationLoci loci = bifurcation_points(kParams);
    CHECK(upper_q(loci.r2 - 1e-8) < 1e-3);
}

TEST_CASE("classification flips exactly at the rejoin coupling") {
    BifurcationLoci loci = bifurcation_points(kParams);

    auto symmetric_det = [&](double r) {
        Hessian h = hessian({0.0, loci.branch_phase(r)}, r, kParams);
        return h.qq * h.pp - h.qp * h.qp;
    };

    for (double target : {loci.r2, loci.r1}) {
        double lo = target - 0.02, hi = target + 0.02;
        double sign_lo = symmetric_det(lo) < 0.0 ? -1.0 : 1.0;
        while (hi - lo > 1e-13) {
            double mid = 0.5 * (lo + hi);
            if ((symmetric_det(mid) < 0.0 ? -1.0 : 1.0) == sign_lo)
                lo = mid;
            else
                hi = mid;
        }
        CHECK_THAT(0.5 * (lo + hi), WithinAbs(target, 1e-10));
    }

    FixedPoint symm{0.0, loci.branch_phase(-0.25), Stability::StableCenter};
    CHECK(classify_stability(symm, -0.25, kParams) == Stability::StableCenter);
    FixedPoint saddle{0.0, loci.branch_phase(-0.1), Stability::UnstableSaddle};
    CHECK(classify_stability(saddle, -0.1, kParams) == Stability::UnstableSaddle);
    FixedPoint off{loci.eta(-0.1), loci.branch_phase(-0.1), Stability::StableCenter};
    CHECK(classify_stability(off, -0.1, kParams) == Stability::StableCenter);

    FixedPoint at_locus{0.0, loci.branch_phase(loci.r2), Stability::StableCenter};
    CHECK_THROWS_AS(classify_stability(at_locus, loci.r2, kParams), marginal_stability_error);
}
