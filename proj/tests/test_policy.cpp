// ---------------------------------------------------------------------------
// test_policy.cpp -- disclosure policies, belief-compatible menus, equilibrium
// emission schemes, expected outcomes, refinement, implementability
// ---------------------------------------------------------------------------
#include <catch2/catch_amalgamated.hpp>

#include "disclosure/policy.hpp"
#include "disclosure/threshold.hpp"
#include "reference_economy.hpp"

using namespace disclosure;
using Catch::Approx;

namespace {
const model::CanonicalInstance& qref() {
    static const model::CanonicalInstance inst = refeco::quadratic_uniform();
    return inst;
}
}  // namespace

TEST_CASE("policy factories and validation") {
    const double cap = 1.0;
    CHECK_NOTHROW(policy::DisclosurePolicy::transparent(cap).validate(cap));
    CHECK_NOTHROW(policy::DisclosurePolicy::uninformative(cap).validate(cap));
    CHECK_NOTHROW(policy::DisclosurePolicy::threshold(cap, 0.7).validate(cap));
    CHECK(policy::DisclosurePolicy::threshold(cap, cap).regions.size() == 1);
    CHECK_THROWS_AS(policy::DisclosurePolicy::threshold(cap, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(policy::DisclosurePolicy::threshold(cap, 1.2), std::invalid_argument);

    using policy::Region;
    using policy::RegionMode;
    const policy::DisclosurePolicy empty{};
    const policy::DisclosurePolicy late_start{{{0.1, 1.0, RegionMode::Transparent}}};
    const policy::DisclosurePolicy short_end{{{0.0, 0.9, RegionMode::Transparent}}};
    const policy::DisclosurePolicy zero_width{{{0.0, 0.5, RegionMode::Transparent},
                                               {0.5, 0.5, RegionMode::Pooled},
                                               {0.5, 1.0, RegionMode::Pooled}}};
    const policy::DisclosurePolicy gapped{{{0.0, 0.4, RegionMode::Transparent},
                                           {0.6, 1.0, RegionMode::Pooled}}};
    CHECK_THROWS_AS(empty.validate(cap), std::invalid_argument);
    CHECK_THROWS_AS(late_start.validate(cap), std::invalid_argument);
    CHECK_THROWS_AS(short_end.validate(cap), std::invalid_argument);
    CHECK_THROWS_AS(zero_width.validate(cap), std::invalid_argument);
    CHECK_THROWS_AS(gapped.validate(cap), std::invalid_argument);
}

TEST_CASE("belief-compatible menus") {
    const auto menu = policy::belief_compatible_menu(policy::DisclosurePolicy::threshold(1.0, 0.7));
    REQUIRE(menu.cells.size() == 2);
    CHECK(menu.cells[0].lo == Approx(0.0));
    CHECK(menu.cells[0].hi == Approx(0.7));
    CHECK_FALSE(menu.cells[0].point());
    CHECK(menu.cells[1].point());
    CHECK(menu.cells[1].hi == Approx(1.0));

    const auto opaque = policy::belief_compatible_menu(policy::DisclosurePolicy::uninformative(1.0));
    REQUIRE(opaque.cells.size() == 1);
    CHECK(opaque.cells[0].point());
    CHECK(opaque.cells[0].hi == Approx(1.0));

    const auto open = policy::belief_compatible_menu(policy::DisclosurePolicy::transparent(1.0));
    REQUIRE(open.cells.size() == 1);
    CHECK(open.cells[0].lo == Approx(0.0));
    CHECK(open.cells[0].hi == Approx(1.0));
}

TEST_CASE("best response against a threshold menu") {
    const auto& inst = qref();
    const auto menu = policy::belief_compatible_menu(policy::DisclosurePolicy::threshold(1.0, 0.7));
    // Peak inside the transparent band: report it.
    CHECK(policy::best_response(inst, 0.65, menu) == Approx(0.65).margin(1e-12));
    // Just above the band: clamp to the threshold.
    CHECK(policy::best_response(inst, 0.8, menu) == Approx(0.7).margin(1e-12));
    // High type: jump to the pooled point at the cap.
    CHECK(policy::best_response(inst, 0.9, menu) == Approx(1.0).margin(1e-12));
    // The indifferent type (theta* = 0.85 for a 0.7 threshold) resolves low.
    CHECK(policy::best_response(inst, 0.85, menu) == Approx(0.7).margin(1e-12));
    CHECK_THROWS_AS(policy::best_response(inst, 0.8, policy::Menu{}), std::invalid_argument);
}

TEST_CASE("equilibrium scheme of a threshold policy matches the direct construction") {
    const auto& inst = qref();
    for (const double estar : {0.7, 0.9, 0.65}) {
        const auto from_policy =
            policy::equilibrium_scheme(inst, policy::DisclosurePolicy::threshold(1.0, estar));
        const auto direct = threshold::threshold_scheme(inst, estar);
        for (int i = 0; i <= 200; ++i) {
            const double th = refeco::kLo + (refeco::kHi - refeco::kLo) * i / 200.0;
            CHECK(from_policy.evaluate(inst, th) ==
                  Approx(direct.evaluate(inst, th)).margin(1e-7));
        }
    }
}

TEST_CASE("expected outcomes at the frozen reference values") {
    const auto& inst = qref();
    const auto full = policy::expected_outcomes(
        inst, policy::equilibrium_scheme(inst, policy::DisclosurePolicy::transparent(1.0)));
    CHECK(full.gamma == Approx(refeco::full_disclosure_gamma()).margin(1e-9));
    CHECK(full.pi == Approx(refeco::full_disclosure_pi()).margin(1e-9));
    CHECK(full.pi == Approx(0.3054167).margin(1e-6));

    const auto none = policy::expected_outcomes(
        inst, policy::equilibrium_scheme(inst, policy::DisclosurePolicy::uninformative(1.0)));
    CHECK(none.gamma == Approx(1.0).margin(1e-12));
    CHECK(none.pi == Approx(refeco::no_disclosure_pi()).margin(1e-9));

    for (const double estar : {0.6, 0.7, 0.9}) {
        const auto out =
            policy::expected_outcomes(inst, threshold::threshold_scheme(inst, estar));
        CHECK(out.gamma == Approx(refeco::gamma_threshold(estar)).margin(1e-9));
        CHECK(out.pi == Approx(refeco::pi_threshold(estar)).margin(1e-9));
    }
    const auto at09 = policy::expected_outcomes(inst, threshold::threshold_scheme(inst, 0.9));
    CHECK(at09.gamma == Approx(0.7714286).margin(1e-6));
    CHECK(at09.pi == Approx(0.3053571).margin(1e-6));
}

TEST_CASE("a two-band partition reproduces the one-threshold policy") {
    const auto& inst = qref();
    using policy::Region;
    using policy::RegionMode;
    const policy::DisclosurePolicy bands{{{0.0, 0.7, RegionMode::Transparent},
                                          {0.7, 1.0, RegionMode::Pooled}}};
    const auto a = policy::expected_outcomes(inst, policy::equilibrium_scheme(inst, bands));
    const auto b = policy::expected_outcomes(
        inst, policy::equilibrium_scheme(inst, policy::DisclosurePolicy::threshold(1.0, 0.7)));
    CHECK(a.gamma == Approx(b.gamma).margin(1e-9));
    CHECK(a.pi == Approx(b.pi).margin(1e-9));
}

TEST_CASE("refinement partial order") {
    const auto open = policy::DisclosurePolicy::transparent(1.0);
    const auto opaque = policy::DisclosurePolicy::uninformative(1.0);
    const auto t7 = policy::DisclosurePolicy::threshold(1.0, 0.7);
    const auto t8 = policy::DisclosurePolicy::threshold(1.0, 0.8);
    CHECK(policy::is_finer(open, t7));
    CHECK(policy::is_finer(open, opaque));
    CHECK(policy::is_finer(t7, opaque));
    CHECK(policy::is_finer(t8, t7));
    CHECK(policy::is_finer(t7, t7));
    CHECK_FALSE(policy::is_finer(t7, t8));
    CHECK_FALSE(policy::is_finer(opaque, t7));
    CHECK_FALSE(policy::is_finer(opaque, open));
}

TEST_CASE("finer policies never hurt any type") {
    const auto& inst = qref();
    const auto open = policy::belief_compatible_menu(policy::DisclosurePolicy::transparent(1.0));
    const auto mid = policy::belief_compatible_menu(policy::DisclosurePolicy::threshold(1.0, 0.7));
    const auto opaque =
        policy::belief_compatible_menu(policy::DisclosurePolicy::uninformative(1.0));
    for (int i = 0; i <= 35; ++i) {
        const double th = refeco::kLo + (refeco::kHi - refeco::kLo) * i / 35.0;
        const double p_open = inst.profit(th, policy::best_response(inst, th, open));
        const double p_mid = inst.profit(th, policy::best_response(inst, th, mid));
        const double p_opaque = inst.profit(th, policy::best_response(inst, th, opaque));
        CHECK(p_open >= p_mid - 1e-12);
        CHECK(p_mid >= p_opaque - 1e-12);
    }
}

TEST_CASE("implementability checks") {
    const auto& inst = qref();
    CHECK(policy::check_implementable(inst, threshold::threshold_scheme(inst, 0.9)).ok);
    CHECK(policy::check_implementable(
              inst, policy::equilibrium_scheme(inst, policy::DisclosurePolicy::transparent(1.0)))
              .ok);

    // Decreasing assignment above every type's participation floor: incentive
    // compatibility fails while participation holds.
    policy::EmissionScheme dec;
    dec.segments.push_back({0.6, 0.775, policy::SegmentRule::Constant, 0.95});
    dec.segments.push_back({0.775, 0.95, policy::SegmentRule::Constant, 0.93});
    const auto ic = policy::check_implementable(inst, dec);
    CHECK_FALSE(ic.ok);
    CHECK(ic.violation == "IC");

    // Uniformly tiny emission: high types would rather take the cap.
    policy::EmissionScheme tiny;
    tiny.segments.push_back({0.6, 0.95, policy::SegmentRule::Constant, 0.1});
    const auto ir = policy::check_implementable(inst, tiny);
    CHECK_FALSE(ir.ok);
    CHECK(ir.violation == "IR");
}

TEST_CASE("single-type equilibria") {
    const auto inst = refeco::single_type(0.8);
    const auto full = policy::expected_outcomes(
        inst, policy::equilibrium_scheme(inst, policy::DisclosurePolicy::transparent(1.0)));
    CHECK(full.gamma == Approx(0.8).margin(1e-12));
    CHECK(full.pi == Approx(0.32).margin(1e-12));
    const auto none = policy::expected_outcomes(
        inst, policy::equilibrium_scheme(inst, policy::DisclosurePolicy::uninformative(1.0)));
    CHECK(none.gamma == Approx(1.0).margin(1e-12));
    CHECK(none.pi == Approx(0.3).margin(1e-12));
}
