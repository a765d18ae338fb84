#pragma once

#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "petal/curve.hpp"
#include "petal/orbit.hpp"
#include "petal/parse.hpp"
#include "petal/reduce.hpp"
#include "petal/stable.hpp"

namespace petal {

using json = nlohmann::json;

inline json to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const UniJet& u, int max_order = -1) {
    json arr = json::array();
    const int n = max_order >= 0 ? std::min(max_order, u.order()) : u.order();
    for (int i = 0; i <= n; ++i) arr.push_back(to_json(u.coeff(i)));
    return arr;
}

enum class PipelineStage { Classify, Reduce, Directions, StableSets, Report };

struct PipelineOptions {
    PipelineStage stage = PipelineStage::Report;
    int order = 0;       // 0 = auto
    int contact_m = 0;   // 0 = p + 4
    double tol = 1e-10;
    int max_iter = 80;
    int probes = 0;      // 0 = value from the spec
    uint64_t seed = 0x5eedULL;
    long orbit_iters = 100000;
    double conv_radius = 5e-3;
    double escape_radius = 1.0;
    std::string csv_dir;
};

namespace pipeline_detail {

inline json region_json(const RegionDescriptor& reg) {
    return {{"case", to_string(reg.shape)},
            {"mode", reg.mode == RegionMode::Saddle ? "saddle" : "node"},
            {"d", reg.d},
            {"e", reg.e},
            {"epsilon", reg.eps},
            {"r", reg.r},
            {"xi", to_json(reg.xi)}};
}

inline json log_json(const CoordChangeLog& log) {
    json arr = json::array();
    for (const auto& s : log.steps) arr.push_back({{"kind", s.kind()}, {"note", s.note}});
    return arr;
}

inline void write_region_csv(const std::string& dir, int index, const RegionDescriptor& reg) {
    std::ofstream os(dir + "/region_" + std::to_string(index) + ".csv");
    os << "re_x,im_x,boundary\n";
    os.precision(17);
    const double slope = std::max(reg.d, reg.e);
    const double u_max = 0.92 * reg.eps / std::sqrt(1.0 + slope * slope);
    for (int i = 0; i <= 160; ++i) {
        const double u = u_max * double(i) / 160.0;
        const Complex lo = reg.xi * Complex(u, reg.lo_bound(u));
        const Complex hi = reg.xi * Complex(u, reg.hi_bound(u));
        os << lo.real() << ',' << lo.imag() << ",lower\n";
        os << hi.real() << ',' << hi.imag() << ",upper\n";
    }
}

inline void write_basin_csv(const std::string& dir, int index, const StableSetDescriptor& sd) {
    std::ofstream os(dir + "/basin_" + std::to_string(index) + ".csv");
    os << "re_x,im_x,inside\n";
    os.precision(17);
    const double eps = sd.region.eps;
    for (int i = -80; i <= 80; ++i)
        for (int j = -80; j <= 80; ++j) {
            const Complex x_orig(eps * double(i) / 78.0, eps * double(j) / 78.0);
            const Complex x_rot = x_orig / sd.xi;
            const bool in = sd.region.contains_rotated(x_rot);
            os << x_orig.real() << ',' << x_orig.imag() << ',' << (in ? 1 : 0) << '\n';
        }
}

} // namespace pipeline_detail

/// Run the classification / reduction / stable-set / probe pipeline on a
/// parsed germ specification and emit the machine-readable report.
inline json run_pipeline(const GermSpec& spec_in, const PipelineOptions& opts = {}) {
    using namespace pipeline_detail;
    json report;
    json warnings = json::array();
    GermSpec spec = spec_in;
    validate_germ_spec(spec);

    report["schema"] = "petal-report-v1";
    report["input"] = {{"order", spec.order},
                       {"iterate", spec.iterate},
                       {"probes", spec.probes},
                       {"probe_radius", spec.probe_radius},
                       {"seed", opts.seed}};

    // user-level iterate wrapper
    PolyMap map = spec.map;
    if (spec.iterate > 1) {
        map = iterate_map(map, spec.iterate);
        report["input"]["note"] = "analyzing the iterate F^" + std::to_string(spec.iterate);
    }

    const int base_order = opts.order > 0 ? opts.order : spec.order;
    GermDiffeo germ = map.to_germ(base_order);

    // ---- curve -------------------------------------------------------------
    auto build_curve = [&](int order) -> FormalCurveJet {
        const GermDiffeo g = map.to_germ(order);
        if (spec.gamma2.has_value()) {
            UniJet g2(order);
            for (size_t i = 0; i < spec.gamma2->size() && int(i) + 1 <= order; ++i)
                g2.set_coeff(int(i) + 1, (*spec.gamma2)[i]);
            if (!spec.gamma1.has_value()) return FormalCurveJet::graph(g2, order);
            UniJet g1(order);
            for (size_t i = 0; i < spec.gamma1->size() && int(i) + 1 <= order; ++i)
                g1.set_coeff(int(i) + 1, (*spec.gamma1)[i]);
            return FormalCurveJet(g1, g2);
        }
        if (spec.tangent.has_value())
            return extend_invariant_jet(g, *spec.tangent, order).curve;
        // auto-select: try each fixed direction of the linear part
        const Spectrum s = spectrum_of(g.linear_part());
        std::vector<ProjDirection> candidates;
        for (const auto& pr : s.pairs) candidates.push_back(pr.direction);
        std::sort(candidates.begin(), candidates.end(), [&](const auto& u, const auto& v) {
            return std::abs(eigenvalue_along(g.linear_part(), u) - Complex(1.0)) <
                   std::abs(eigenvalue_along(g.linear_part(), v) - Complex(1.0));
        });
        for (const auto& dir : candidates) {
            try {
                return extend_invariant_jet(g, dir, order).curve;
            } catch (const Error&) {
                continue;
            }
        }
        throw Error("no invariant curve seed found; supply curve.tangent or curve.gamma2");
    };

    FormalCurveJet curve = build_curve(base_order);
    report["curve"] = {{"gamma1", to_json(curve.gamma1(), 8)},
                       {"gamma2", to_json(curve.gamma2(), 8)},
                       {"multiplicity", curve.multiplicity()},
                       {"tangent", json::array({to_json(curve.tangent().a), to_json(curve.tangent().b)})},
                       {"irreducible", curve.irreducible_certified()}};

    // ---- classification ----------------------------------------------------
    RestrictionData rd = solve_restriction(germ, curve);
    InnerClassification cls = classify_inner(rd);
    report["classification"] = {
        {"kind", to_string(cls.kind)},
        {"inner_eigenvalue", to_json(rd.inner_eigenvalue)},
        {"tangent_eigenvalue", to_json(rd.tangent_eigenvalue)},
        {"multiplicity", rd.multiplicity},
        {"eigenvalue_law_residual",
         std::abs(std::pow(rd.inner_eigenvalue, rd.multiplicity) - rd.tangent_eigenvalue)},
        {"restriction_order",
         rd.restriction_order ? json(*rd.restriction_order) : json("infinity")},
        {"root_of_unity_order", cls.root_order},
        {"restriction_residual", rd.residual}};

    if (opts.stage == PipelineStage::Classify) {
        report["warnings"] = warnings;
        return report;
    }

    // ---- hyperbolic branch ---------------------------------------------------
    if (cls.kind == InnerKind::HyperbolicAttracting) {
        json hyp;
        if (curve.multiplicity() > 1) {
            const CuspStructure cs = cusp_structure(germ, curve);
            hyp["cusp"] = {{"matches", cs.matches},
                           {"p", cs.p},
                           {"q", cs.q},
                           {"c", to_json(cs.c)},
                           {"eigenvalue_residual", cs.eigenvalue_residual},
                           {"membership_residual", cs.membership_residual}};
        }
        // containment surrogate: probe orbits near the curve
        std::mt19937_64 gen(opts.seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        OrbitOptions oo;
        oo.max_iter = std::min<long>(opts.orbit_iters, 5000);
        oo.conv_radius = 1e-300;
        json probes = json::array();
        const int n_probes = opts.probes > 0 ? opts.probes : spec.probes;
        for (int i = 0; i < n_probes; ++i) {
            const bool on_curve = i % 2 == 0;
            const double t = spec.probe_radius * (0.5 + 0.5 * std::abs(unif(gen)));
            CPoint seed;
            if (curve.is_graph()) {
                seed.x = Complex(t * unif(gen), t * unif(gen));
                seed.y = curve.gamma2().evaluate(seed.x);
                if (!on_curve) seed.y += Complex(0.3 * t * unif(gen), 0.3 * t * unif(gen));
            } else {
                const Complex s(t * unif(gen), t * unif(gen));
                seed.x = curve.gamma1().evaluate(s);
                seed.y = curve.gamma2().evaluate(s);
                if (!on_curve) seed.y += Complex(0.3 * t * unif(gen), 0.3 * t * unif(gen));
            }
            const OrbitRecord rec = simulate_orbit(map, seed, oo);
            bool asym = false;
            if (curve.is_graph() && rec.status != OrbitStatus::Escaped) {
                try {
                    const auto verdicts = asymptoticity_test(rec, curve.gamma2(), 6);
                    asym = true;
                    for (const auto& v : verdicts) asym = asym && v.pass;
                } catch (const TailTooShort&) {
                }
            }
            probes.push_back({{"seed", json::array({to_json(seed.x), to_json(seed.y)})},
                              {"on_curve", on_curve},
                              {"status", to_string(rec.status)},
                              {"asymptotic_all_N", asym}});
        }
        hyp["containment_probes"] = probes;
        report["hyperbolic"] = hyp;
        report["warnings"] = warnings;
        return report;
    }

    if (cls.kind == InnerKind::HyperbolicRepelling || cls.kind == InnerKind::IrrationallyNeutral) {
        warnings.push_back(std::string("no stable sets constructed: restriction is ") +
                           to_string(cls.kind));
        report["warnings"] = warnings;
        return report;
    }

    // ---- rationally neutral wrapper ----------------------------------------
    int wrap = 1;
    if (cls.kind == InnerKind::RationallyNeutral && cls.root_order > 1) {
        wrap = cls.root_order;
        map = iterate_map(map, wrap);
        germ = map.to_germ(base_order);
        report["wrapping"] = {{"iterate", wrap},
                              {"note", "stable sets below are for F^" + std::to_string(wrap) +
                                           "; sets of F are unions of their F-images"}};
        rd = solve_restriction(germ, curve);
        if (!rd.restriction_order.has_value()) {
            warnings.push_back("restriction of the wrapped iterate is the identity; "
                               "no stable sets claimed");
            report["warnings"] = warnings;
            return report;
        }
    }

    // ---- reduction -----------------------------------------------------------
    const int r = rd.restriction_order.value_or(0) - 1;
    const int m_contact = opts.contact_m;
    int order = std::max({base_order, 2 * r + 2 + (r + 1) + (r + 10)});
    order = std::min(order, 64);
    ReducedPair rp;
    try {
        germ = map.to_germ(order);
        curve = build_curve(order);
        rp = reduce_pair(germ, curve, {opts.tol < 1e-9 ? 1e-9 : opts.tol, 24});
    } catch (const RestrictionIsIdentity&) {
        warnings.push_back("restriction is the identity jet; reduction skipped");
        report["warnings"] = warnings;
        return report;
    } catch (const OrderExhausted& e) {
        warnings.push_back("jet order exhausted during reduction; need order >= " +
                           std::to_string(e.needed));
        report["warnings"] = warnings;
        return report;
    }

    auto dirs = attracting_directions(rp);
    bool any_saddle = false;
    for (const auto& d : dirs) any_saddle |= d.kind == DirectionKind::Saddle;
    const int m_eff = m_contact > 0 ? m_contact : rp.p + 4;
    ReducedPair rr = rp;
    try {
        rr = refine_contact(rp, m_eff, any_saddle);
        dirs = attracting_directions(rr);
    } catch (const OrderExhausted& e) {
        warnings.push_back("contact refinement ran out of jet order (need " +
                           std::to_string(e.needed) + "); using the unrefined pair");
    }

    report["reduced"] = {
        {"k", rr.k},
        {"p", rr.p},
        {"mu", to_json(rr.mu)},
        {"log_mu", to_json(rr.log_mu)},
        {"a", to_json(rr.a)},
        {"A", to_json(rr.A)},
        {"contact_order", rr.contact_order ? json(*rr.contact_order) : json("infinity")},
        {"form_residual", rr.check.worst()},
        {"coordinate_changes", log_json(rr.log)}};

    if (opts.stage == PipelineStage::Reduce) {
        report["warnings"] = warnings;
        return report;
    }

    json dir_table = json::array();
    for (const auto& d : dirs) {
        json wit = json::array();
        for (double w : d.witness) wit.push_back(w);
        dir_table.push_back(
            {{"index", d.index},
             {"xi", to_json(d.xi)},
             {"kind", d.kind == DirectionKind::Saddle ? "saddle" : "node"},
             {"witness", wit},
             {"first_significant_order",
              d.first_significant_order ? json(*d.first_significant_order) : json(nullptr)}});
    }
    report["directions"] = dir_table;

    if (opts.stage == PipelineStage::Directions) {
        report["warnings"] = warnings;
        return report;
    }

    // ---- stable sets -----------------------------------------------------------
    std::vector<StableSetDescriptor> sets;
    json set_table = json::array();
    for (const auto& d : dirs) {
        json entry = {{"direction_index", d.index},
                      {"xi", to_json(d.xi)}};
        try {
            const DirectionFrame fr = make_direction_frame(rr, d);
            const RegionFit fit = fit_region(fr);
            entry["region"] = region_json(fit.region);
            entry["sign_margin"] = fit.margin;
            if (d.kind == DirectionKind::Saddle) {
                PicardOptions po;
                po.m = m_eff;
                po.tol = opts.tol;
                po.max_iter = opts.max_iter;
                const ParabolicCurveSolution sol = picard_solve_parabolic(fr, fit.region, po);
                entry["type"] = "parabolic-curve";
                entry["banach_norm"] = sol.banach_norm;
                entry["residual"] = sol.residual;
                entry["iterations"] = sol.iterations;
                entry["m"] = sol.m;
                sets.push_back(parabolic_curve_descriptor(fr, sol));
            } else {
                const StableSetDescriptor sd = node_stable_set(fr, fit.region, m_eff, true, 4, 16);
                entry["type"] = "node-basin";
                entry["q"] = sd.q;
                entry["m"] = m_eff;
                entry["forward_invariant"] = sd.forward_invariant;
                json refinement = json::array();
                for (const auto& [aj, kj] : sd.basin_refinement)
                    refinement.push_back({{"annulus", aj}, {"iterates", kj}});
                entry["asymptotic_refinement"] = refinement;
                sets.push_back(sd);
            }
        } catch (const Error& e) {
            entry["type"] = "failed";
            entry["error"] = e.what();
            warnings.push_back("direction " + std::to_string(d.index) +
                               ": " + e.what());
        }
        set_table.push_back(entry);
    }
    report["stable_sets"] = set_table;

    if (wrap > 1 && !sets.empty()) {
        // Images of the region under F reconstruct the stable sets of F itself.
        json images = json::array();
        for (size_t si = 0; si < sets.size(); ++si) {
            json pts = json::array();
            const auto& sd = sets[si];
            for (int b = 0; b < 6; ++b) {
                const double u = sd.region.eps * 0.5 * (b + 1) / 6.0;
                CPoint pt = sd.log.push_point({Complex(u, 0.0), Complex(0.0)});
                json chain = json::array();
                for (int i = 1; i < wrap; ++i) {
                    pt = spec.map.evaluate(pt);
                    chain.push_back(json::array({to_json(pt.x), to_json(pt.y)}));
                }
                pts.push_back(chain);
            }
            images.push_back({{"set", si}, {"f_image_samples", pts}});
        }
        report["wrapping"]["set_images"] = images;
    }

    if (opts.stage == PipelineStage::StableSets) {
        report["warnings"] = warnings;
        return report;
    }

    // ---- probe orbits and capture ---------------------------------------------
    const int n_probes = opts.probes > 0 ? opts.probes : spec.probes;
    std::mt19937_64 gen(opts.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<CPoint> seeds;
    for (int i = 0; i < n_probes; ++i) {
        const double th = 2.0 * std::numbers::pi * unif(gen);
        const double ph = 2.0 * std::numbers::pi * unif(gen);
        const double yr = 0.2 * spec.probe_radius * unif(gen);
        seeds.push_back({spec.probe_radius * Complex(std::cos(th), std::sin(th)),
                         yr * Complex(std::cos(ph), std::sin(ph))});
    }
    OrbitOptions oo;
    oo.max_iter = opts.orbit_iters;
    oo.conv_radius = opts.conv_radius;
    oo.escape_radius = opts.escape_radius;
    oo.kp = rr.k + rr.p;
    if (curve.is_graph()) {
        oo.gamma2 = curve.gamma2();
        oo.asym_N = 2;
    }
    const auto orbits = simulate_many(map, seeds, oo);
    const auto captures = capture_report(orbits, sets, rr);
    json capture_table = json::array();
    for (const auto& ce : captures) {
        capture_table.push_back(
            {{"orbit", ce.orbit},
             {"seed", json::array({to_json(seeds[ce.orbit].x), to_json(seeds[ce.orbit].y)})},
             {"status", to_string(ce.status)},
             {"direction_estimate", ce.direction_estimate},
             {"assigned_set", ce.assigned_set},
             {"entry_index", ce.entry_index},
             {"unassigned",
              ce.assigned_set < 0 && ce.status == OrbitStatus::ConvergedToOrigin && !ce.trivial}});
    }
    report["orbits"] = {{"count", n_probes},
                        {"radius", spec.probe_radius},
                        {"seed", opts.seed},
                        {"captures", capture_table}};

    if (!opts.csv_dir.empty()) {
        std::filesystem::create_directories(opts.csv_dir);
        for (size_t i = 0; i < orbits.size(); ++i) {
            std::ofstream os(opts.csv_dir + "/orbit_" + std::to_string(i) + ".csv");
            write_orbit_csv(os, orbits[i]);
        }
        for (size_t i = 0; i < sets.size(); ++i) {
            write_region_csv(opts.csv_dir, int(i), sets[i].region);
            if (sets[i].kind == StableSetDescriptor::Kind::NodeBasin)
                write_basin_csv(opts.csv_dir, int(i), sets[i]);
        }
        report["csv_dir"] = opts.csv_dir;
    }

    report["warnings"] = warnings;
    return report;
}

} // namespace petal
