// ---------------------------------------------------------------------------
// test_certify.cpp -- multiplier certificates: construction at frozen points,
// closed-form cross-checks, verification sweeps, tampering, shape checks
// ---------------------------------------------------------------------------
#include <catch2/catch_amalgamated.hpp>

#include "disclosure/certify.hpp"
#include "reference_economy.hpp"

using namespace disclosure;
using Catch::Approx;

namespace {
const model::CanonicalInstance& qref() {
    static const model::CanonicalInstance inst = refeco::quadratic_uniform();
    return inst;
}
const std::vector<std::string>& check_names() {
    static const std::vector<std::string> names = {
        "participation_multiplier_nondecreasing",
        "cumulative_multiplier_nondecreasing",
        "pooled_mass_nonnegative",
        "stationarity_at_theta_star",
        "stationarity_at_theta_hat",
        "q_maximal_at_theta_hat",
        "participation_slackness",
        "envelope_slackness",
        "marginal_type_weight",
    };
    return names;
}
}  // namespace

TEST_CASE("certificate at the balanced-weight kink optimum") {
    const auto& inst = qref();
    const auto c = certify::build_certificate(inst, 0.5, 0.9);
    CHECK(c.theta_hat == Approx(0.9).margin(1e-9));
    CHECK(c.theta_star == Approx(0.95).margin(1e-12));
    CHECK(c.A == Approx(refeco::marginal_weight_at_09_half()).margin(1e-6));
    CHECK(c.A == Approx(1.392857).margin(1e-6));
    CHECK(c.pooled_mass == Approx(0.0714286).margin(1e-6));
    CHECK(c.q_at_hat == Approx(0.0017857).margin(1e-7));
    CHECK(c.lambda_at_upper == Approx(0.0357143).margin(1e-6));

    // The cumulative multiplier has the closed form
    //   0 at the bottom, (1-a) F(th) + a f(th) below theta_hat,
    //   and the constant (1-a) F(th*) + a f(th*) from theta_hat up.
    const double a = 0.5;
    auto h = [&](double th) { return (1.0 - a) * inst.cdf(th) + a * inst.pdf(th); };
    REQUIRE(c.grid.size() == c.lambda1.size());
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
        const double th = c.grid[i];
        double expect;
        if (th <= inst.type_lower + 1e-12)
            expect = 0.0;
        else if (th < c.theta_hat - 1e-12)
            expect = h(th);
        else
            expect = h(c.theta_star);
        CHECK(c.lambda1[i] == Approx(expect).margin(1e-9));
    }
    // Participation multiplier: zero below the top, the atom A at the top.
    for (std::size_t i = 0; i + 1 < c.grid.size(); ++i) CHECK(c.psi[i] == 0.0);
    CHECK(c.psi.back() == Approx(c.A).margin(1e-12));

    // Stationarity functional: (1-a) f (th* - th)^2 / 2 on the pool.
    REQUIRE(c.q_grid.size() == c.q.size());
    for (std::size_t i = 0; i < c.q_grid.size(); ++i) {
        const double th = c.q_grid[i];
        const double d = std::max(0.0, c.theta_star - th);
        CHECK(c.q[i] == Approx((1.0 - a) * refeco::fdens() * d * d / 2.0).margin(1e-9));
    }

    const auto rep = certify::verify_certificate(c);
    CHECK(rep.pass);
    for (const auto& name : check_names()) {
        const auto* item = rep.find(name);
        REQUIRE(item != nullptr);
        CHECK(item->pass);
    }
}

TEST_CASE("certificate at an interior optimum above the kink") {
    const auto& inst = qref();
    const double e = refeco::interior_optimum(0.01);
    const auto c = certify::build_certificate(inst, 0.01, e);
    CHECK(c.theta_hat == Approx(e).margin(1e-9));
    CHECK(c.theta_star == Approx(0.95).margin(1e-12));
    CHECK(std::abs(c.A) <= 1e-7);
    CHECK(c.lambda_at_upper == Approx(0.01 * refeco::fdens()).margin(1e-7));
    CHECK(c.q_at_hat == Approx(0.0005772).margin(1e-7));
    CHECK(certify::verify_certificate(c).pass);
}

TEST_CASE("certificates at the weight extremes") {
    const auto& inst = qref();
    // Pure profit: full disclosure, all multipliers vanish.
    const auto c0 = certify::build_certificate(inst, 0.0, 0.95);
    CHECK(c0.A == 0.0);
    CHECK(c0.pooled_mass == Approx(0.0).margin(1e-12));
    CHECK(certify::verify_certificate(c0).pass);
    // The cumulative multiplier degenerates to the cdf.
    for (std::size_t i = 0; i < c0.grid.size(); ++i)
        CHECK(c0.lambda1[i] == Approx(inst.cdf(c0.grid[i])).margin(1e-12));

    // Pure emission: the bunching interval starts at the bottom type.
    const auto c1 = certify::build_certificate(inst, 1.0, 0.6);
    CHECK(c1.theta_hat == Approx(0.6).margin(1e-9));
    CHECK(c1.theta_star == Approx(0.8).margin(1e-9));
    CHECK(c1.A == Approx(refeco::fdens()).margin(1e-6));
    CHECK(c1.pooled_mass == Approx(refeco::fdens()).margin(1e-9));
    CHECK(certify::verify_certificate(c1).pass);
}

TEST_CASE("verification across the weight sweep on two economies") {
    for (const auto& inst : {refeco::quadratic_uniform(), refeco::quadratic_tnormal()}) {
        for (int k = 0; k <= 6; ++k) {
            const double alpha = double(k) / 6.0;
            const auto opt = threshold::optimize_threshold(inst, alpha);
            const auto cert = certify::build_certificate(inst, alpha, opt.e_star);
            const auto rep = certify::verify_certificate(cert);
            INFO("alpha " << alpha << " e_star " << opt.e_star);
            for (const auto& item : rep.items) {
                INFO(item.name << " violation " << item.max_violation);
                CHECK(item.pass);
            }
            CHECK(rep.pass);
            CHECK(certify::peak_checks(inst, alpha, opt.e_star).pass);
        }
    }
}

TEST_CASE("construction rejects non-stationary candidates") {
    const auto& inst = qref();
    CHECK_THROWS_AS(certify::build_certificate(inst, 0.5, 0.92), std::invalid_argument);
    CHECK_THROWS_AS(certify::build_certificate(inst, 0.5, 0.88), std::invalid_argument);
    CHECK_THROWS_AS(certify::build_certificate(refeco::single_type(0.8), 0.3, 0.6),
                    std::invalid_argument);
    CHECK_THROWS_AS(certify::build_certificate(inst, 1.2, 0.9), std::domain_error);
}

TEST_CASE("tampered multipliers are caught") {
    const auto& inst = qref();
    auto c = certify::build_certificate(inst, 0.5, 0.9);
    c.psi[c.psi.size() / 2] -= 0.01;
    const auto rep = certify::verify_certificate(c);
    CHECK_FALSE(rep.pass);
    REQUIRE(rep.find("participation_multiplier_nondecreasing") != nullptr);
    CHECK_FALSE(rep.find("participation_multiplier_nondecreasing")->pass);
}

TEST_CASE("zero tolerance trips on floating-point noise") {
    const auto& inst = qref();
    const auto c = certify::build_certificate(inst, 0.5, 0.9);
    CHECK_FALSE(certify::verify_certificate(c, 0.0).pass);
}

TEST_CASE("verdicts are stable under grid refinement") {
    const auto& inst = qref();
    const auto coarse = certify::verify_certificate(certify::build_certificate(inst, 0.5, 0.9, 801));
    const auto fine = certify::verify_certificate(certify::build_certificate(inst, 0.5, 0.9, 1601));
    CHECK(coarse.pass);
    CHECK(fine.pass);
    CHECK(coarse.items.size() == fine.items.size());
}

TEST_CASE("peak checks") {
    const auto& inst = qref();
    // At the kink optimum neither one-sided derivative vanishes, so only the
    // range comparison applies.
    const auto kink = certify::peak_checks(inst, 0.5, 0.9);
    CHECK(kink.range_pass);
    CHECK_FALSE(kink.boundary_applicable);
    CHECK(kink.pass);

    // At an interior optimum both vanish and the boundary inequality binds.
    const auto interior = certify::peak_checks(inst, 0.01, refeco::interior_optimum(0.01));
    CHECK(interior.range_pass);
    CHECK(interior.boundary_applicable);
    CHECK(interior.boundary_pass);
    CHECK(interior.pass);
}

TEST_CASE("shape checks") {
    const auto& inst = qref();
    const auto qc = certify::quasiconcavity_check(inst, 0.5);
    CHECK(qc.quasiconcave);

    model::ModelInstance raw = refeco::quadratic_uniform_raw();
    raw.density = refeco::bimodal_table();
    const auto bimodal = model::canonicalize(raw);
    bool any_nonquasiconcave = false;
    for (int k = 1; k <= 9; ++k)
        if (!certify::quasiconcavity_check(bimodal, k / 10.0).quasiconcave)
            any_nonquasiconcave = true;
    CHECK(any_nonquasiconcave);

    CHECK(certify::log_concavity_check(qref()).log_concave);
    CHECK(certify::log_concavity_check(refeco::quadratic_tnormal()).log_concave);
    CHECK(certify::log_concavity_check(refeco::rising_exponential()).log_concave);
    CHECK_FALSE(certify::log_concavity_check(bimodal).log_concave);

    model::ModelInstance tent_raw = refeco::quadratic_uniform_raw();
    tent_raw.density = refeco::tent_table();
    CHECK(certify::log_concavity_check(model::canonicalize(tent_raw)).log_concave);
}
