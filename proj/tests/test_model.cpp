// ---------------------------------------------------------------------------
// test_model.cpp -- primitives: profit evaluation, densities, assumption
// validation, canonical form, per-type peak and participation floor
// ---------------------------------------------------------------------------
#include <catch2/catch_amalgamated.hpp>

#include "disclosure/model.hpp"
#include "reference_economy.hpp"

using namespace disclosure;
using Catch::Approx;

TEST_CASE("canonical profit closed forms") {
    const model::CanonicalInstance inst = refeco::quadratic_uniform();
    CHECK(inst.profit(0.8, 0.5) == Approx(0.275).margin(1e-15));
    CHECK(inst.profit(0.8, 0.0) == Approx(0.0).margin(1e-15));
    CHECK(inst.profit(0.6, 1.0) == Approx(0.1).margin(1e-15));
    CHECK(inst.profit_e(0.8, 0.5) == Approx(0.3).margin(1e-15));
    CHECK(inst.profit_ee(0.5) == Approx(-1.0).margin(1e-15));
}

TEST_CASE("raw profit matches and rejects out-of-domain input") {
    const model::ModelInstance raw = refeco::quadratic_uniform_raw();
    CHECK(model::profit(raw, 0.8, 0.5) == Approx(0.275).margin(1e-15));
    CHECK_THROWS_AS(model::profit(raw, 0.8, 1.5), std::domain_error);
    CHECK_THROWS_AS(model::profit(raw, 0.8, -0.2), std::domain_error);
    CHECK_THROWS_AS(model::profit(raw, 0.3, 0.5), std::domain_error);
}

TEST_CASE("peak emission and participation floor closed forms") {
    const model::CanonicalInstance inst = refeco::quadratic_uniform();
    for (int i = 0; i <= 100; ++i) {
        const double th = refeco::kLo + (refeco::kHi - refeco::kLo) * i / 100.0;
        CHECK(model::peak_emission(inst, th) == Approx(refeco::e_peak(th)).margin(1e-9));
        CHECK(model::participation_floor(inst, th) ==
              Approx(refeco::e_floor(th)).margin(1e-9));
    }
    CHECK(model::participation_floor(inst, 0.8) == Approx(0.6).margin(1e-9));
    CHECK(model::participation_floor(inst, 0.95) == Approx(0.9).margin(1e-9));
    CHECK(model::participation_floor(inst, 0.6) == Approx(0.2).margin(1e-9));
    CHECK_THROWS_AS(model::peak_emission(inst, 0.3), std::domain_error);
    CHECK_THROWS_AS(model::participation_floor(inst, 1.3), std::domain_error);
}

TEST_CASE("types past the cap are pinned there in the rising economy") {
    const model::CanonicalInstance inst = refeco::rising_exponential();
    CHECK(model::peak_emission(inst, 1.2) == Approx(1.0).margin(1e-12));
    CHECK(model::peak_emission(inst, 0.95) == Approx(0.95).margin(1e-9));
    CHECK(model::participation_floor(inst, 1.05) == Approx(1.0).margin(1e-9));
    CHECK(model::participation_floor(inst, 1.0) == Approx(1.0).margin(1e-6));
    CHECK(model::participation_floor(inst, 0.95) == Approx(0.9).margin(1e-9));
}

TEST_CASE("uniform density") {
    const model::Density d(model::DensitySpec::uniform(), refeco::kLo, refeco::kHi);
    CHECK(d.pdf(0.7) == Approx(refeco::fdens()).margin(1e-15));
    CHECK(d.cdf(0.775) == Approx(0.5).margin(1e-12));
    CHECK(d.cdf(refeco::kLo) == 0.0);
    CHECK(d.cdf(refeco::kHi) == 1.0);
    CHECK(d.pdf_prime(0.8) == 0.0);
    CHECK(d.analytic_log_second());
    CHECK(d.log_pdf_second(0.8, 1e-4) == 0.0);
}

TEST_CASE("truncated normal density") {
    const model::Density d(model::DensitySpec::truncated_normal(0.775, 0.1), refeco::kLo,
                           refeco::kHi);
    CHECK(d.cdf(refeco::kLo) == 0.0);
    CHECK(d.cdf(refeco::kHi) == 1.0);
    CHECK(d.cdf(0.775) == Approx(0.5).margin(1e-12));  // symmetric truncation
    CHECK(d.pdf(0.775) > d.pdf(0.65));
    CHECK(d.pdf_prime(0.7) > 0.0);
    CHECK(d.pdf_prime(0.85) < 0.0);
    CHECK(d.log_pdf_second(0.8, 1e-4) == Approx(-100.0).margin(1e-9));
    CHECK_THROWS_AS(model::Density(model::DensitySpec::truncated_normal(0.775, 0.0),
                                   refeco::kLo, refeco::kHi),
                    std::invalid_argument);
}

TEST_CASE("truncated exponential density rises with positive rate") {
    const model::Density d(model::DensitySpec::truncated_exponential(2.0), 0.9, 1.2);
    CHECK(d.cdf(0.9) == 0.0);
    CHECK(d.cdf(1.2) == 1.0);
    CHECK(d.pdf(1.15) > d.pdf(0.95));
    CHECK(d.pdf_prime(1.0) > 0.0);
    CHECK(d.log_pdf_second(1.0, 1e-4) == 0.0);
    // Rate zero degrades gracefully to the uniform density.
    const model::Density u(model::DensitySpec::truncated_exponential(0.0), 0.9, 1.2);
    CHECK(u.pdf(1.0) == Approx(1.0 / 0.3).margin(1e-12));
}

TEST_CASE("piecewise-linear table density") {
    const model::Density d(refeco::tent_table(), refeco::kLo, refeco::kHi);
    CHECK(d.cdf(refeco::kHi) == 1.0);
    CHECK(d.pdf(0.775) > d.pdf(0.62));
    CHECK(d.interior_knots().size() == 1);
    CHECK(d.interior_knots().front() == Approx(0.775).margin(1e-12));
    CHECK_FALSE(d.analytic_log_second());
    // Mass integrates to one: compare the cdf at the midpoint with a direct
    // trapezoid of the normalized pdf.
    double acc = 0.0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        const double a = refeco::kLo + (0.775 - refeco::kLo) * i / double(n);
        const double b = refeco::kLo + (0.775 - refeco::kLo) * (i + 1) / double(n);
        acc += 0.5 * (d.pdf(a) + d.pdf(b)) * (b - a);
    }
    CHECK(d.cdf(0.775) == Approx(acc).margin(1e-6));

    CHECK_THROWS_AS(model::Density(model::DensitySpec::piecewise_linear({{0.6, 1.0}}),
                                   refeco::kLo, refeco::kHi),
                    std::invalid_argument);
    CHECK_THROWS_AS(model::Density(model::DensitySpec::piecewise_linear(
                                       {{0.65, 1.0}, {0.95, 1.0}}),
                                   refeco::kLo, refeco::kHi),
                    std::invalid_argument);
    CHECK_THROWS_AS(model::Density(model::DensitySpec::piecewise_linear(
                                       {{0.6, 1.0}, {0.8, -0.5}, {0.95, 1.0}}),
                                   refeco::kLo, refeco::kHi),
                    std::invalid_argument);
}

TEST_CASE("assumption validation accepts the reference economy") {
    const model::ValidationReport rep = model::validate_assumptions(refeco::quadratic_uniform_raw());
    CHECK(rep.pass);
    REQUIRE(rep.find("profit_strictly_concave") != nullptr);
    CHECK(rep.find("profit_strictly_concave")->pass);
    CHECK(rep.find("cap_preferred_to_zero")->pass);
    CHECK(rep.find("density_positive")->pass);
    CHECK(rep.first_failure().empty());
}

TEST_CASE("assumption validation rejects convex base profit") {
    model::ModelInstance m = refeco::quadratic_uniform_raw();
    m.pi0 = {0.0, 0.0, 0.5};
    const model::ValidationReport rep = model::validate_assumptions(m);
    CHECK_FALSE(rep.pass);
    CHECK(rep.first_failure() == "profit_strictly_concave");
    CHECK_THROWS_AS(model::canonicalize(m), std::invalid_argument);
}

TEST_CASE("assumption validation rejects types that prefer zero to the cap") {
    model::ModelInstance m = refeco::quadratic_uniform_raw();
    m.type_lower = 0.2;
    m.type_upper = 0.5;
    const model::ValidationReport rep = model::validate_assumptions(m);
    CHECK_FALSE(rep.pass);
    REQUIRE(rep.find("cap_preferred_to_zero") != nullptr);
    CHECK_FALSE(rep.find("cap_preferred_to_zero")->pass);
}

TEST_CASE("canonical form is the identity for the reference economy") {
    const model::CanonicalInstance c = refeco::quadratic_uniform();
    CHECK(c.type_lower == Approx(refeco::kLo).margin(1e-15));
    CHECK(c.type_upper == Approx(refeco::kHi).margin(1e-15));
    CHECK_FALSE(c.degenerate);
    CHECK(c.profit_offset == Approx(0.0).margin(1e-12));
    CHECK(c.pdf(0.7) == Approx(refeco::fdens()).margin(1e-12));
}

TEST_CASE("rescaled parameterization canonicalizes to the reference economy") {
    const model::CanonicalInstance c = model::canonicalize(refeco::quadratic_rescaled_raw());
    CHECK(c.type_lower == Approx(refeco::kLo).margin(1e-12));
    CHECK(c.type_upper == Approx(refeco::kHi).margin(1e-12));
    // Intercept 0.3 against mean type 0.3875 shifts reported profit down.
    CHECK(c.profit_offset == Approx(-0.3 * 0.3875).margin(1e-9));
    const model::CanonicalInstance ref = refeco::quadratic_uniform();
    CHECK(c.profit(0.8, 0.5) == Approx(ref.profit(0.8, 0.5)).margin(1e-12));
    CHECK(c.pdf(0.7) == Approx(ref.pdf(0.7)).margin(1e-9));
    CHECK(c.cdf(0.9) == Approx(ref.cdf(0.9)).margin(1e-9));
}

TEST_CASE("positive-slope parameterization flips into the reference economy") {
    const model::CanonicalInstance c = model::canonicalize(refeco::quadratic_flipped_raw());
    CHECK(c.type_lower == Approx(refeco::kLo).margin(1e-12));
    CHECK(c.type_upper == Approx(refeco::kHi).margin(1e-12));
    CHECK(c.profit(0.8, 0.5) == Approx(0.275).margin(1e-12));
    CHECK(c.pdf(0.7) == Approx(refeco::fdens()).margin(1e-9));
}

TEST_CASE("zero slope collapses to a single canonical type") {
    model::ModelInstance m = refeco::quadratic_uniform_raw();
    m.slope_a = 0.0;
    m.pi0 = {0.0, 0.8, -0.5};  // keep the cap preferred once types drop out
    const model::CanonicalInstance c = model::canonicalize(m);
    CHECK(c.degenerate);
    CHECK(c.type_lower == c.type_upper);
    CHECK_THROWS_AS(c.density(), std::logic_error);
    CHECK(c.density_knots().empty());
}

TEST_CASE("single-type instance primitives") {
    const model::CanonicalInstance c = refeco::single_type(0.8);
    CHECK(c.degenerate);
    CHECK(model::peak_emission(c, 0.8) == Approx(0.8).margin(1e-12));
    CHECK(model::participation_floor(c, 0.8) == Approx(0.6).margin(1e-9));
    CHECK(c.profit(0.8, 0.8) == Approx(0.32).margin(1e-15));
}

TEST_CASE("truncated-normal canonicalization rescales location and scale") {
    model::ModelInstance m = refeco::quadratic_tnormal_raw();
    m.slope_a = -2.0;
    m.type_lower = refeco::kLo / 2.0;
    m.type_upper = refeco::kHi / 2.0;
    m.density = model::DensitySpec::truncated_normal(0.775 / 2.0, 0.05);
    const model::CanonicalInstance c = model::canonicalize(m);
    const model::CanonicalInstance ref = refeco::quadratic_tnormal();
    CHECK(c.pdf(0.8) == Approx(ref.pdf(0.8)).margin(1e-9));
    CHECK(c.cdf(0.8) == Approx(ref.cdf(0.8)).margin(1e-9));
}
