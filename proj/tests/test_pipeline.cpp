#include "testutil.hpp"

#include "petal/pipeline.hpp"

using namespace petal;
using namespace petal::testutil;

TEST_CASE("pipeline: node/saddle example end to end") {
    const GermSpec spec = parse_germ_spec(
        "F1 = x - x^3\nF2 = y*(1 - x)\norder = 16\nprobes = 8@0.05\n");
    PipelineOptions opts;
    opts.orbit_iters = 30000;
    opts.conv_radius = 5e-3;
    const json rep = run_pipeline(spec, opts);
    CHECK(rep["classification"]["kind"] == "parabolic");
    CHECK(rep["reduced"]["k"] == 1);
    CHECK(rep["reduced"]["p"] == 1);
    REQUIRE(rep["directions"].size() == 2);
    CHECK(rep["directions"][0]["kind"] == "node");
    CHECK(rep["directions"][1]["kind"] == "saddle");
    REQUIRE(rep["stable_sets"].size() == 2);
    CHECK(rep["stable_sets"][0]["type"] == "node-basin");
    CHECK(rep["stable_sets"][1]["type"] == "parabolic-curve");
    // every converging probe is captured (the rest head to the saddle side and escape)
    int captured = 0;
    for (const auto& c : rep["orbits"]["captures"]) {
        if (c["status"] == "converged") {
            CHECK(c["assigned_set"].get<int>() >= 0);
            CHECK_FALSE(c["unassigned"].get<bool>());
            ++captured;
        }
    }
    CHECK(captured >= 2);
}

TEST_CASE("pipeline: hyperbolic cusp example") {
    const GermSpec spec = parse_germ_spec(
        "F1 = 0.25*x\nF2 = 0.125*y\ncurve.gamma2 = 0\norder = 12\nprobes = 6@0.05\n");
    // the cusp curve (s^2, s^3) cannot be given as a graph; use the parametrized
    // form via a dedicated spec below instead. Here: axis curve, nu = 1.
    const json rep = run_pipeline(spec, {});
    CHECK(rep["classification"]["kind"] == "hyperbolic-attracting");
}

TEST_CASE("pipeline: rationally neutral wrapper detects the identity restriction") {
    // F = (x, -y) with the cusp (s^2, s^3): theta = -s, F^2 restricts to the identity.
    GermSpec spec = parse_germ_spec("F1 = x\nF2 = -y\norder = 12\n");
    // parametrized cusp: supply via tangent is impossible; craft curve by gamma2?
    // The cusp is not a graph; exercise the wrapper through the library call.
    const GermDiffeo germ = spec.map.to_germ(12);
    UniJet g1(12), g2(12);
    g1.set_coeff(2, 1.0);
    g2.set_coeff(3, 1.0);
    const FormalCurveJet cusp(g1, g2);
    const RestrictionData rd = solve_restriction(germ, cusp);
    const InnerClassification cls = classify_inner(rd);
    CHECK(cls.kind == InnerKind::RationallyNeutral);
    CHECK(cls.root_order == 2);
    const PolyMap f2 = iterate_map(spec.map, 2);
    const RestrictionData rd2 = solve_restriction(f2.to_germ(12), cusp);
    CHECK_FALSE(rd2.restriction_order.has_value());  // identity restriction
}

TEST_CASE("pipeline: determinism (byte-identical reports)") {
    const GermSpec spec = parse_germ_spec(
        "F1 = x - x^2\nF2 = y*(1 + x)\norder = 12\nprobes = 4@0.04\n");
    PipelineOptions opts;
    opts.orbit_iters = 5000;
    const std::string a = run_pipeline(spec, opts).dump();
    const std::string b = run_pipeline(spec, opts).dump();
    CHECK(a == b);
}

TEST_CASE("pipeline: report round-trips through JSON") {
    const GermSpec spec = parse_germ_spec("F1 = x - x^2\nF2 = 2*y\norder = 12\nprobes = 4@0.04\n");
    PipelineOptions opts;
    opts.orbit_iters = 4000;
    opts.escape_radius = 10.0;
    const json rep = run_pipeline(spec, opts);
    const std::string dumped = rep.dump(2);
    const json parsed = json::parse(dumped);
    CHECK(parsed.dump(2) == dumped);
    // required keys of the schema
    for (const char* key : {"schema", "input", "curve", "classification", "warnings"})
        CHECK(parsed.contains(key));
}

TEST_CASE("pipeline: stage limiting stops early") {
    const GermSpec spec = parse_germ_spec("F1 = x - x^3\nF2 = y*(1 - x)\norder = 14\n");
    PipelineOptions opts;
    opts.stage = PipelineStage::Classify;
    const json rep = run_pipeline(spec, opts);
    CHECK(rep.contains("classification"));
    CHECK_FALSE(rep.contains("reduced"));

    opts.stage = PipelineStage::Directions;
    const json rep2 = run_pipeline(spec, opts);
    CHECK(rep2.contains("directions"));
    CHECK_FALSE(rep2.contains("stable_sets"));
}

TEST_CASE("pipeline: semi-hyperbolic repelling germ (saddle only, escape probes)") {
    const GermSpec spec = parse_germ_spec(
        "F1 = x - x^2\nF2 = 2*y + x^2\norder = 16\nprobes = 6@0.04\n");
    PipelineOptions opts;
    opts.orbit_iters = 20000;
    opts.escape_radius = 50.0;
    const json rep = run_pipeline(spec, opts);
    CHECK(rep["classification"]["kind"] == "parabolic");
    CHECK(rep["reduced"]["k"] == 1);
    CHECK(rep["reduced"]["p"] == 0);
    REQUIRE(rep["directions"].size() == 1);
    CHECK(rep["directions"][0]["kind"] == "saddle");
    CHECK(rep["stable_sets"][0]["type"] == "parabolic-curve");
}

TEST_CASE("pipeline: parabolic cusp resolves end to end") {
    const GermSpec spec = parse_germ_spec(
        "F1 = x + x^2 + 0.25*x^3\n"
        "F2 = y*(1 + 1.5*x + 0.75*x^2 + 0.125*x^3)\n"
        "order = 24\n"
        "curve.gamma1 = 0, 1\n"
        "curve.gamma2 = 0, 0, 1\n"
        "probes = 4@0.04\n");
    PipelineOptions opts;
    opts.orbit_iters = 20000;
    const json rep = run_pipeline(spec, opts);
    CHECK(rep["classification"]["kind"] == "parabolic");
    CHECK(rep["classification"]["restriction_order"] == 3);
    CHECK(rep["curve"]["multiplicity"] == 2);
    CHECK(rep["reduced"]["k"] == 2);
    CHECK(rep["reduced"]["p"] == 0);
    CHECK(rep["reduced"]["form_residual"].get<double>() < 1e-10);
    for (const auto& d : rep["directions"]) CHECK(d["kind"] == "saddle");
    // converging probes that are not asymptotic to the cusp stay unassigned,
    // and are reported as such rather than silently dropped
    for (const auto& c : rep["orbits"]["captures"])
        if (c["status"] == "converged" && c["assigned_set"].get<int>() < 0)
            CHECK(c["unassigned"].get<bool>());
}
