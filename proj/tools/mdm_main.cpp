// mdm: planar maximal-distance-minimizer laboratory, command-line front end.
//
// Exit codes: 0 success, 1 check failure (verify/energy found a violation),
// 2 usage or I/O error.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mdm/energy.hpp"
#include "mdm/instance.hpp"
#include "mdm/network.hpp"
#include "mdm/solver.hpp"
#include "mdm/steiner.hpp"
#include "mdm/svg.hpp"
#include "mdm/verifier.hpp"

namespace {

constexpr const char* kToolVersion = "mdm 1.0.0";

using nlohmann::json;

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

void warn_large_coordinates(const mdm::CompactSample& m) {
    for (const mdm::Point2& p : m.points)
        if (std::fabs(p.x) > 1e3 || std::fabs(p.y) > 1e3) {
            std::cerr << "warning: coordinates exceed ~1e3 in magnitude; absolute tolerances "
                         "assume O(1)..O(1e3) data, consider rescaling\n";
            return;
        }
}

mdm::CompactSample load_sample(const std::string& path, double r_override,
                               mdm::RunManifest& manifest) {
    const std::string text = mdm::read_text_file(path);
    manifest.input_hashes[path] = mdm::fnv1a64_hex(text);
    mdm::InstanceFile inst = mdm::InstanceFile::from_json_string(text);
    mdm::CompactSample m = inst.sample();
    if (r_override > 0) m.r = r_override;
    mdm::validate(m);
    warn_large_coordinates(m);
    return m;
}

mdm::Network load_network(const std::string& path, mdm::RunManifest& manifest) {
    const std::string text = mdm::read_text_file(path);
    manifest.input_hashes[path] = mdm::fnv1a64_hex(text);
    return mdm::Network::from_json_string(text);
}

void write_output(const std::string& path, const std::string& content,
                  mdm::RunManifest& manifest) {
    mdm::write_text_file(path, content);
    manifest.output_hashes[path] = mdm::fnv1a64_hex(content);
}

void finish_manifest(const mdm::RunManifest& manifest, const std::string& beside) {
    if (beside.empty()) return;
    mdm::write_text_file(beside + ".manifest.json", manifest.to_json_string() + "\n");
}

std::string records_jsonl(const std::vector<mdm::MoveRecord>& records) {
    std::string out;
    for (const mdm::MoveRecord& rec : records) {
        json j{{"iteration", rec.iteration}, {"name", rec.name},
               {"site", rec.site},           {"delta_length", rec.delta_length},
               {"feasible_after", rec.feasible_after}, {"accepted", rec.accepted}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

struct GenArgs {
    std::string shape, out;
    double r = 0.0;
    int n = 1;
    std::uint64_t seed = 0;
    double R = 0.0, side = 0.0, d = 0.0, spacing = 0.0;
    int sides = 0, nx = 0, ny = 0;
};

int run_gen(const GenArgs& a, const std::string& cmdline) {
    mdm::GeneratorSpec spec;
    spec.shape = a.shape;
    spec.sample_count = a.n;
    spec.seed = a.seed;
    if (a.R > 0) spec.params["R"] = a.R;
    if (a.sides > 0) spec.params["sides"] = a.sides;
    if (a.side > 0) spec.params["side"] = a.side;
    if (a.d > 0) spec.params["d"] = a.d;
    if (a.nx > 0) spec.params["nx"] = a.nx;
    if (a.ny > 0) spec.params["ny"] = a.ny;
    if (a.spacing > 0) spec.params["spacing"] = a.spacing;

    mdm::InstanceFile inst = mdm::generate_instance(spec, a.r);

    mdm::RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.command = cmdline;
    manifest.seed = a.seed;
    manifest.config_hash = mdm::fnv1a64(inst.to_json_string());
    write_output(a.out, inst.to_json_string() + "\n", manifest);
    finish_manifest(manifest, a.out);
    std::cout << "wrote " << a.out << " (" << inst.points.size() << " points, r=" << inst.r
              << ")\n";
    return 0;
}

struct SolveArgs {
    std::string input, out, log, svg, init = "mst_shrink", init_file, preset;
    double r = 0.0, step_scale = 0.25, cooling = 0.5, tol_len = 1e-9;
    std::uint64_t seed = 1;
    int iters = 400;
    std::vector<std::string> weights;
};

// Named resolutions: iteration budget and cooling pairs that converge on the
// bundled shapes with increasing polish. Explicit --iters/--cooling win.
bool apply_preset(const std::string& name, int& iters, double& cooling) {
    if (name == "coarse") {
        iters = 2000;
        cooling = 0.4;
    } else if (name == "medium") {
        iters = 2600;
        cooling = 0.5;
    } else if (name == "fine") {
        iters = 3200;
        cooling = 0.6;
    } else {
        return false;
    }
    return true;
}

int run_solve(const SolveArgs& a, const std::string& cmdline) {
    mdm::RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.command = cmdline;
    manifest.seed = a.seed;

    const mdm::CompactSample m = load_sample(a.input, a.r, manifest);

    mdm::SolverConfig cfg;
    cfg.seed = a.seed;
    cfg.max_iters = a.iters;
    cfg.step_scale = a.step_scale;
    cfg.cooling = a.cooling;
    cfg.tol_len = a.tol_len;
    if (a.init == "mst_shrink") {
        cfg.init_mode = mdm::SolverConfig::Init::MstShrink;
    } else if (a.init == "star") {
        cfg.init_mode = mdm::SolverConfig::Init::Star;
    } else if (a.init == "file") {
        if (a.init_file.empty()) throw CLI::ValidationError("--init file requires --init-file");
        cfg.init_mode = mdm::SolverConfig::Init::UserNetwork;
        cfg.user_network = load_network(a.init_file, manifest);
    } else {
        throw CLI::ValidationError("--init must be mst_shrink, star, or file");
    }
    for (const std::string& w : a.weights) {
        const auto eq = w.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--move-weight expects name=value");
        cfg.move_weights[w.substr(0, eq)] = std::stod(w.substr(eq + 1));
    }

    json cfg_json{{"seed", cfg.seed},       {"max_iters", cfg.max_iters},
                  {"init", a.init},         {"step_scale", cfg.step_scale},
                  {"cooling", cfg.cooling}, {"tol_len", cfg.tol_len},
                  {"move_weights", cfg.move_weights}};
    manifest.config_hash = mdm::fnv1a64(cfg_json.dump());

    const mdm::SolveResult result = mdm::solve(m, cfg);

    write_output(a.out, result.network.to_json_string() + "\n", manifest);
    if (!a.log.empty()) write_output(a.log, records_jsonl(result.records), manifest);
    if (!a.svg.empty()) {
        const std::string svg = mdm::render_svg(result.network, m);
        write_output(a.svg, svg, manifest);
    }
    finish_manifest(manifest, a.out);

    int accepted = 0;
    for (const auto& rec : result.records) accepted += rec.accepted ? 1 : 0;
    std::cout << "length " << result.network.total_length() << ", energy "
              << mdm::f_m(m, result.network) << " (r=" << m.r << "), " << accepted
              << " accepted moves\n";
    return 0;
}

struct VerifyArgs {
    std::string sigma, input, report;
    double r = 0.0;
    bool strict = false, convexity = false;
};

int run_verify(const VerifyArgs& a, const std::string& cmdline) {
    mdm::RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.command = cmdline;

    const mdm::CompactSample m = load_sample(a.input, a.r, manifest);
    const mdm::Network net = load_network(a.sigma, manifest);

    mdm::VerifyOptions opts;
    opts.strict = a.strict;
    opts.convexity = a.convexity;
    json cfg_json{{"strict", opts.strict}, {"convexity", opts.convexity}};
    manifest.config_hash = mdm::fnv1a64(cfg_json.dump());

    const mdm::RegularityReport report = mdm::verify_network(net, m, opts);
    if (!a.report.empty()) {
        write_output(a.report, report.to_json_string() + "\n", manifest);
        finish_manifest(manifest, a.report);
    }
    for (const auto& c : report.checks)
        std::cout << (c.pass ? "pass" : "FAIL") << "  " << c.name << "\n";
    std::cout << (report.all_pass ? "all checks passed" : "checks failed") << "\n";
    return report.all_pass ? 0 : 1;
}

struct EnergyArgs {
    std::string input, sigma, out;
    double r = 0.0;
    bool csv = false;
};

int run_energy(const EnergyArgs& a, const std::string& cmdline) {
    mdm::RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.command = cmdline;
    manifest.config_hash = mdm::fnv1a64(std::string(a.csv ? "csv" : "json"));

    const mdm::CompactSample m = load_sample(a.input, a.r, manifest);
    const mdm::Network net = load_network(a.sigma, manifest);

    const double energy = mdm::f_m(m, net);
    const bool feasible = mdm::is_feasible(m, net);

    std::vector<mdm::PointClassification> rows;
    for (const mdm::Point2& v : net.vertices()) rows.push_back(mdm::classify_point(m, net, v));

    std::string out;
    if (a.csv) {
        std::ostringstream ss;
        ss.precision(17);
        ss << "x,y,kind,corresponding\n";
        for (const auto& c : rows)
            ss << c.point.x << ',' << c.point.y << ',' << mdm::to_string(c.kind) << ','
               << c.corresponding.size() << '\n';
        out = ss.str();
    } else {
        json verts = json::array();
        for (const auto& c : rows) {
            json ys = json::array();
            for (const mdm::Point2& y : c.corresponding) ys.push_back(json::array({y.x, y.y}));
            verts.push_back(json{{"point", json::array({c.point.x, c.point.y})},
                                 {"kind", mdm::to_string(c.kind)},
                                 {"corresponding", ys}});
        }
        json j{{"version", 1},
               {"kind", "energy_report"},
               {"r", m.r},
               {"energy", energy},
               {"feasible", feasible},
               {"vertices", verts}};
        out = j.dump(2) + "\n";
    }

    if (a.out.empty()) {
        std::cout << out;
    } else {
        write_output(a.out, out, manifest);
        finish_manifest(manifest, a.out);
    }
    if (!a.out.empty())
        std::cout << "energy " << energy << (feasible ? " (feasible)" : " (infeasible)") << "\n";
    return feasible ? 0 : 1;
}

struct SteinerArgs {
    std::vector<std::string> points;
    std::string out;
};

int run_steiner(const SteinerArgs& a, const std::string& cmdline) {
    std::vector<mdm::Point2> terminals;
    for (const std::string& s : a.points) {
        const auto comma = s.find(',');
        if (comma == std::string::npos)
            throw CLI::ValidationError("--point expects x,y");
        terminals.push_back({std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))});
    }
    const mdm::SteinerTree tree = mdm::steiner_tree_small(terminals);

    json t = json::array(), sp = json::array(), ed = json::array();
    for (const auto& p : tree.terminals) t.push_back(json::array({p.x, p.y}));
    for (const auto& p : tree.steiner_points) sp.push_back(json::array({p.x, p.y}));
    for (const auto& e : tree.edges) ed.push_back(json::array({e.first, e.second}));
    json j{{"version", 1},     {"kind", "steiner_tree"},
           {"terminals", t},   {"steiner_points", sp},
           {"edges", ed},      {"length", tree.length}};
    const std::string out = j.dump(2) + "\n";

    if (a.out.empty()) {
        std::cout << out;
    } else {
        mdm::RunManifest manifest;
        manifest.tool_version = kToolVersion;
        manifest.command = cmdline;
        manifest.config_hash = mdm::fnv1a64(out);
        write_output(a.out, out, manifest);
        finish_manifest(manifest, a.out);
        std::cout << "length " << tree.length << "\n";
    }
    return 0;
}

struct PlotArgs {
    std::string input, sigma, out;
    double r = 0.0;
};

int run_plot(const PlotArgs& a, const std::string& cmdline) {
    mdm::RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.command = cmdline;
    manifest.config_hash = 0;

    const mdm::CompactSample m = load_sample(a.input, a.r, manifest);
    const mdm::Network net = load_network(a.sigma, manifest);
    write_output(a.out, mdm::render_svg(net, m), manifest);
    finish_manifest(manifest, a.out);
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"planar maximal-distance-minimizer laboratory"};
    app.require_subcommand(1);
    const std::string cmdline = join_args(argc, argv);

    GenArgs gen;
    CLI::App* cgen = app.add_subcommand("gen", "generate a sample instance");
    cgen->add_option("--shape", gen.shape, "circle | polygon | segment_pair | grid")->required();
    cgen->add_option("--r", gen.r, "coverage radius")->required();
    cgen->add_option("--n", gen.n, "sample count");
    cgen->add_option("--seed", gen.seed, "generator seed (recorded)");
    cgen->add_option("--R", gen.R, "circle radius");
    cgen->add_option("--sides", gen.sides, "polygon side count");
    cgen->add_option("--side", gen.side, "polygon side length");
    cgen->add_option("--d", gen.d, "segment_pair separation");
    cgen->add_option("--nx", gen.nx, "grid columns");
    cgen->add_option("--ny", gen.ny, "grid rows");
    cgen->add_option("--spacing", gen.spacing, "grid spacing");
    cgen->add_option("--out", gen.out, "instance file to write")->required();

    SolveArgs solve;
    CLI::App* csolve = app.add_subcommand("solve", "search for a short covering network");
    csolve->add_option("--input", solve.input, "instance file")->required();
    csolve->add_option("--r", solve.r, "override the instance radius");
    csolve->add_option("--seed", solve.seed, "solver seed");
    csolve->add_option("--preset", solve.preset, "coarse | medium | fine resolution");
    csolve->add_option("--iters", solve.iters, "iteration budget");
    csolve->add_option("--init", solve.init, "mst_shrink | star | file");
    csolve->add_option("--init-file", solve.init_file, "network file for --init file");
    csolve->add_option("--step-scale", solve.step_scale, "initial step, fraction of r");
    csolve->add_option("--cooling", solve.cooling, "step ladder shrink factor");
    csolve->add_option("--tol-len", solve.tol_len, "minimum accepted improvement");
    csolve->add_option("--move-weight", solve.weights, "name=value, 0 disables a move");
    csolve->add_option("--out", solve.out, "network file to write")->required();
    csolve->add_option("--log", solve.log, "move log (JSON lines)");
    csolve->add_option("--svg", solve.svg, "render the result");

    VerifyArgs verify;
    CLI::App* cverify = app.add_subcommand("verify", "run the regularity checks");
    cverify->add_option("--sigma", verify.sigma, "network file")->required();
    cverify->add_option("--input", verify.input, "instance file")->required();
    cverify->add_option("--r", verify.r, "override the instance radius");
    cverify->add_option("--report", verify.report, "report file to write");
    cverify->add_flag("--strict", verify.strict, "halve the tolerances");
    cverify->add_flag("--convexity", verify.convexity, "also check energetic-arc convexity");

    EnergyArgs energy;
    CLI::App* cenergy = app.add_subcommand("energy", "energy and vertex classification");
    cenergy->add_option("--input", energy.input, "instance file")->required();
    cenergy->add_option("--sigma", energy.sigma, "network file")->required();
    cenergy->add_option("--r", energy.r, "override the instance radius");
    cenergy->add_flag("--csv", energy.csv, "emit CSV instead of JSON");
    cenergy->add_option("--out", energy.out, "write the table to a file");

    SteinerArgs steiner;
    CLI::App* csteiner = app.add_subcommand("steiner", "Steiner tree over 2..5 terminals");
    csteiner->add_option("--point", steiner.points, "terminal as x,y (repeat 2..5 times)")
        ->required();
    csteiner->add_option("--out", steiner.out, "write the tree to a file");

    PlotArgs plot;
    CLI::App* cplot = app.add_subcommand("plot", "render a network with its sample");
    cplot->add_option("--input", plot.input, "instance file")->required();
    cplot->add_option("--sigma", plot.sigma, "network file")->required();
    cplot->add_option("--r", plot.r, "override the instance radius");
    cplot->add_option("--out", plot.out, "SVG file to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cgen->parsed()) return run_gen(gen, cmdline);
        if (csolve->parsed()) {
            if (!solve.preset.empty()) {
                int it = solve.iters;
                double cool = solve.cooling;
                if (!apply_preset(solve.preset, it, cool))
                    throw CLI::ValidationError("--preset must be coarse, medium, or fine");
                if (csolve->count("--iters") == 0) solve.iters = it;
                if (csolve->count("--cooling") == 0) solve.cooling = cool;
            }
            return run_solve(solve, cmdline);
        }
        if (cverify->parsed()) return run_verify(verify, cmdline);
        if (cenergy->parsed()) return run_energy(energy, cmdline);
        if (csteiner->parsed()) return run_steiner(steiner, cmdline);
        if (cplot->parsed()) return run_plot(plot, cmdline);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
