#include "capsel/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "capsel/api.hpp"
#include "capsel/error.hpp"
#include "capsel/report.hpp"

namespace capsel::cli {

namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct LibraryArgs {
    std::string path;
    std::string derating;
    std::string impedance;

    void add_to(CLI::App* cmd, bool required = true) {
        auto* opt = cmd->add_option("--library", path, "part library (.csv or .json)");
        if (required) opt->required();
        cmd->add_option("--derating", derating, "derating sidecar CSV");
        cmd->add_option("--impedance", impedance, "impedance sidecar CSV");
    }

    [[nodiscard]] PartLibrary load() const {
        std::optional<fs::path> d;
        std::optional<fs::path> z;
        if (!derating.empty()) d = derating;
        if (!impedance.empty()) z = impedance;
        return load_library_file(path, d, z);
    }
};

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ParseError("cannot write '" + path + "'");
    file << text;
}

bool is_csv(const std::string& path) { return fs::path(path).extension() == ".csv"; }

std::string render(ojson j, const std::optional<std::uint64_t>& seed) {
    if (seed) j["meta"] = {{"seed", *seed}};
    return j.dump(2) + "\n";
}

int exit_code(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        switch (err->kind()) {
            case ErrorKind::infeasible: return kExitInfeasible;
            case ErrorKind::resource_limit: return kExitResourceLimit;
            case ErrorKind::parse:
            case ErrorKind::validation: return kExitInput;
        }
    }
    return kExitInput;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Capacitor selection by integer optimisation", "capsel"};
    app.require_subcommand(1);
    std::optional<std::uint64_t> seed;
    app.add_option("--seed", seed, "random seed, recorded in output metadata");

    LibraryArgs library;
    std::string spec_path;
    std::string out_path;
    std::optional<double> k_override;

    auto* solve = app.add_subcommand("solve", "solve one selection problem");
    library.add_to(solve);
    solve->add_option("--spec", spec_path, "problem spec JSON")->required();
    solve->add_option("--k", k_override, "override K (mm^2 per cent)");
    solve->add_option("--out", out_path, "output JSON (default stdout)");

    SweepParams sweep_params;
    std::string spacing = "log";
    std::vector<double> k_values;
    auto* sweep = app.add_subcommand("sweep", "sweep K and report the frontier");
    library.add_to(sweep);
    sweep->add_option("--spec", spec_path, "problem spec JSON")->required();
    sweep->add_option("--k-min", sweep_params.k_min, "smallest K");
    sweep->add_option("--k-max", sweep_params.k_max, "largest K");
    sweep->add_option("--steps", sweep_params.steps, "number of K values")->check(CLI::PositiveNumber);
    sweep->add_option("--spacing", spacing, "log or linear")->check(CLI::IsMember({"log", "linear"}));
    sweep->add_option("--k-values", k_values, "explicit K values (overrides the grid)")->delimiter(',');
    sweep->add_option("--out", out_path, "output .json or .csv (default JSON on stdout)");

    std::string problem_path;
    auto* pdn = app.add_subcommand("pdn", "solve a placement problem");
    pdn->add_option("--problem", problem_path, "placement JSON")->required();
    library.add_to(pdn, false);
    pdn->add_option("--out", out_path, "output JSON (default stdout)");

    std::string apps_path;
    std::string part_id;
    std::string prices;
    std::string supply_path;
    std::string csv_path;
    auto* demand = app.add_subcommand("demand", "demand curve for one part");
    library.add_to(demand);
    demand->add_option("--apps", apps_path, "applications JSON")->required();
    demand->add_option("--part", part_id, "part id to price")->required();
    demand->add_option("--prices", prices, "comma-separated price grid in cents")->required();
    demand->add_option("--supply", supply_path, "supply curve JSON");
    demand->add_option("--out", out_path, "output .json or .csv (default JSON on stdout)");
    demand->add_option("--csv", csv_path, "also write the curve as CSV");

    auto* validate = app.add_subcommand("validate", "check a part library");
    library.add_to(validate);

    std::size_t synth_count = 200;
    auto* synth = app.add_subcommand("synth", "generate a synthetic part library");
    synth->add_option("--count", synth_count, "number of parts")->check(CLI::PositiveNumber);
    synth->add_option("--out", out_path, "output JSON (default stdout)");

    std::string host = "127.0.0.1";
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    library.add_to(serve);
    serve->add_option("--host", host, "bind address");
    serve->add_option("--port", port, "port, 0 for any free port");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (solve->parsed()) {
            ProblemSpec spec = spec_from_json(read_json(spec_path));
            if (k_override) spec.preference_k = *k_override;
            validate_spec(spec);
            write_text(out_path, render(run_solve(spec, library.load()), seed), out);
        } else if (sweep->parsed()) {
            sweep_params.spacing = parse_spacing(spacing);
            if (!k_values.empty()) sweep_params.k_values = k_values;
            const auto result = run_sweep_result(spec_from_json(read_json(spec_path)), library.load(), sweep_params);
            write_text(out_path, is_csv(out_path) ? sweep_to_csv(result) : render(sweep_to_json(result), seed), out);
        } else if (pdn->parsed()) {
            std::optional<PartLibrary> fallback;
            if (!library.path.empty()) fallback = library.load();
            const auto request = placement_from_json(read_json(problem_path), fs::path(problem_path).parent_path(),
                                                     fallback ? &*fallback : nullptr);
            write_text(out_path, render(run_placement(request), seed), out);
        } else if (demand->parsed()) {
            DemandRequest req;
            req.apps = applications_from_json(read_json(apps_path), library.load());
            req.part_id = part_id;
            req.prices = parse_price_list(prices);
            if (!supply_path.empty()) req.supply = supply_from_json(read_json(supply_path));
            const DemandResult result = run_demand_result(req);
            if (!csv_path.empty() || is_csv(out_path)) {
                std::ostringstream csv;
                write_demand_csv(csv, result.curve);
                write_text(csv_path.empty() ? out_path : csv_path, csv.str(), out);
            }
            if (!is_csv(out_path)) write_text(out_path, render(demand_result_to_json(result), seed), out);
        } else if (validate->parsed()) {
            const ojson report = validation_report(library.load());
            out << report.dump(2) << "\n";
            if (!report["valid"].get<bool>()) {
                const auto& first = report["issues"][0];
                err << "error: part '" << first["id"].get<std::string>() << "': " << first["message"].get<std::string>()
                    << "\n";
                return kExitInput;
            }
        } else if (synth->parsed()) {
            const std::uint64_t s = seed.value_or(1);
            ojson j;
            j["meta"] = {{"generator", "capsel synth"}, {"count", synth_count}, {"seed", s}};
            j["parts"] = library_to_json(synthesize_library(synth_count, s));
            write_text(out_path, j.dump(2) + "\n", out);
        } else if (serve->parsed()) {
            api::Service service(library.load(), fs::path(library.path).parent_path());
            api::Server server(service);
            const int bound = server.bind(host, port);
            if (bound < 0) throw ValidationError("port", "cannot bind " + host + ":" + std::to_string(port));
            err << "listening on http://" << host << ":" << bound << "\n";
            server.listen();
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e);
    }
    return kExitOk;
}

}  // namespace capsel::cli
