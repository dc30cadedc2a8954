#include "bsvie/errors.hpp"
#include "bsvie/presets.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace bsvie;

TEST_SUITE("presets") {

TEST_CASE("catalog lists every preset with an oracle") {
    const std::set<std::string> expected = {"ode-exp",          "girsanov-drift",       "poisson-count",
                                            "extra-noise-M",    "duality-linear",       "comparison-partition",
                                            "holder-regularity", "comparison-sandwich", "lipschitz-standard",
                                            "type2-linear"};
    std::set<std::string> names;
    for (const PresetInfo& p : preset_catalog()) {
        names.insert(p.name);
        CHECK_FALSE(p.anchor.empty());
        CHECK_FALSE(p.oracle.empty());
        CHECK(p.default_steps > 0);
        CHECK(&preset_info(p.name) == &p);
    }
    CHECK(names == expected);
    CHECK_THROWS_AS(preset_info("nope"), ValidationError);
    CHECK_THROWS_AS(build_preset("nope"), ValidationError);
}

TEST_CASE("every preset builds consistent data on a small world") {
    for (const PresetInfo& info : preset_catalog()) {
        CAPTURE(info.name);
        PresetParams pp;
        pp.steps = info.default_world == WorldChoice::deterministic ? 20 : 3;
        pp.world = info.default_world == WorldChoice::ensemble ? WorldChoice::tree : WorldChoice::preset_default;
        const Problem pr = build_preset(info.name, pp);
        REQUIRE(pr.world);
        CHECK(pr.world->steps() == pp.steps);
        CHECK(pr.preset == info.name);
        CHECK(pr.solver == info.solver);
        REQUIRE(pr.phi.phi.size() == pp.steps + 1);
        for (const Values& v : pr.phi.phi) {
            CHECK(v.size() == pr.world->atoms(pp.steps));
        }
        CHECK(spot_check_lipschitz(pr.f, *pr.world).violations == 0);
        if (info.solver == SolverKind::comparison) {
            CHECK(pr.sandwich.has_value());
        }
        if (info.solver == SolverKind::partition) {
            CHECK(pr.linear.has_value());
        }
        if (info.solver == SolverKind::duality) {
            CHECK(pr.coeff.has_value());
            CHECK(pr.psi.size() == pp.steps + 1);
        }
    }
}

TEST_CASE("world choice and reproducible ensembles") {
    PresetParams pp;
    pp.steps = 4;
    pp.world = WorldChoice::ensemble;
    pp.n_paths = 500;
    pp.seed = 9;
    const Problem a = build_preset("lipschitz-standard", pp);
    const Problem b = build_preset("lipschitz-standard", pp);
    CHECK_FALSE(a.world->is_tree());
    CHECK(a.world->atoms(4) == 500);
    CHECK(a.phi.phi[2] == b.phi.phi[2]);
    pp.world = WorldChoice::deterministic;
    CHECK(build_preset("ode-exp", pp).world->atoms(4) == 1);
    PresetParams bad;
    bad.horizon = -1.0;
    CHECK_THROWS_AS(build_preset("ode-exp", bad), ValidationError);
}

TEST_CASE("closed-form oracles where they exist") {
    CHECK(build_preset("girsanov-drift").expected_y0.value() == doctest::Approx(0.5));
    CHECK(build_preset("poisson-count").expected_y0.value() == doctest::Approx(0.75));
    PresetParams pp;
    pp.steps = 10;
    CHECK(build_preset("ode-exp", pp).expected_y0.value() == doctest::Approx(std::exp(1.0)));
    CHECK_FALSE(build_preset("type2-linear").expected_y0.has_value());
}

}
