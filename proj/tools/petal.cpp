// Command-line driver: classify a germ against an invariant curve, reduce it
// to normal form, classify attracting directions, construct stable sets, and
// probe orbits. Reads a germ specification file, writes a JSON report.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "petal/pipeline.hpp"

namespace {

std::string read_file(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path);
    if (!in) throw petal::Error("cannot open spec file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"petal: stable sets of plane germ diffeomorphisms along invariant curves"};
    app.require_subcommand(1);

    std::string spec_path;
    std::string json_path;
    std::string csv_dir;
    petal::PipelineOptions opts;
    int order = 0, iterate = 0, contact_m = 0, probes = 0, max_iter = 0;
    double tol = 0.0;
    uint64_t seed = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("spec", spec_path, "germ specification file ('-' for stdin)")->required();
        cmd->add_option("--order", order, "jet truncation order");
        cmd->add_option("--iterate", iterate, "analyze the iterate F^n");
        cmd->add_option("--contact-m", contact_m, "contact-raising parameter m");
        cmd->add_option("--tol", tol, "solver tolerance");
        cmd->add_option("--max-iter", max_iter, "Picard iteration cap");
        cmd->add_option("--probes", probes, "number of probe orbits");
        cmd->add_option("--seed", seed, "probe seed for reproducibility");
        cmd->add_option("--json", json_path, "write the report to this path");
        cmd->add_option("--csv-dir", csv_dir, "directory for orbit/region CSV dumps");
    };

    std::map<std::string, petal::PipelineStage> stages = {
        {"classify", petal::PipelineStage::Classify},
        {"reduce", petal::PipelineStage::Reduce},
        {"directions", petal::PipelineStage::Directions},
        {"stable-sets", petal::PipelineStage::StableSets},
        {"probe", petal::PipelineStage::Report},
        {"report", petal::PipelineStage::Report},
    };
    for (auto& [name, stage] : stages) {
        CLI::App* cmd = app.add_subcommand(
            name, name == std::string("report") ? "full pipeline report" : "run up to " + name);
        add_common(cmd);
        cmd->callback([&, stage_val = stage] { opts.stage = stage_val; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        petal::GermSpec spec = petal::parse_germ_spec(read_file(spec_path));
        if (order > 0) opts.order = order;
        if (iterate > 0) spec.iterate = iterate;
        if (contact_m > 0) opts.contact_m = contact_m;
        if (tol > 0.0) opts.tol = tol;
        if (max_iter > 0) opts.max_iter = max_iter;
        if (probes > 0) opts.probes = probes;
        if (seed != 0) opts.seed = seed;
        opts.csv_dir = csv_dir;

        const petal::json report = petal::run_pipeline(spec, opts);
        const std::string out = report.dump(2) + "\n";
        if (!json_path.empty()) {
            std::ofstream os(json_path);
            os << out;
        } else {
            std::cout << out;
        }
        return 0;
    } catch (const petal::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const petal::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
