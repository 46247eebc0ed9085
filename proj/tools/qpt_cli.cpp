// Command line front end for scenario files.
//
// Exit codes: 0 success, 2 malformed input (CLI usage or JSON shape),
// 3 invalid data (fails validation), 4 numerical check failed.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "qpt/qpt.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_parse = 2;
constexpr int exit_invalid = 3;
constexpr int exit_check_failed = 4;

qpt::Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw qpt::ParseError("cannot open '" + path + "'");
    qpt::Json j;
    try {
        in >> j;
    } catch (const qpt::Json::exception& e) {
        throw qpt::ParseError(std::string("malformed JSON: ") + e.what());
    }
    return j;
}

void write_output(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::invalid_argument("cannot write '" + out_path + "'");
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
}

void write_plot(const std::string& plot_path, const std::vector<std::string>& labels,
                const std::vector<double>& values, const std::string& title) {
    std::ofstream out(plot_path);
    if (!out) throw std::invalid_argument("cannot write '" + plot_path + "'");
    out << qpt::svg_bar_chart(labels, values, title);
}

struct Cli {
    std::string scenario_path;
    std::string out_path;
    std::string plot_path;
    std::string format = "json";
    double tol = qpt::default_tol;
    std::uint64_t seed = 0;
    qpt::Index dim_cap = qpt::default_dimension_cap;
    std::size_t tree_cap = qpt::default_tree_cap;
    bool no_timing = false;
    bool include_matrix = false;

    qpt::RunOptions options() const {
        qpt::RunOptions o;
        o.tol = tol;
        o.seed = seed;
        o.include_timing = !no_timing;
        o.tree_cap = tree_cap;
        o.dim_cap = dim_cap;
        return o;
    }
};

int run_command(const Cli& cli) {
    qpt::Scenario scenario = qpt::parse_scenario(load_json(cli.scenario_path));
    qpt::RunResult result = qpt::run_scenario(scenario, cli.options());
    write_output(cli.out_path, result.report.dump(2));
    if (!cli.plot_path.empty()) {
        std::vector<std::string> labels;
        std::vector<double> values;
        for (const qpt::Json& r : result.report["results"]) {
            if (!r.contains("probability")) continue;
            labels.push_back(r["type"].get<std::string>() + " #" +
                             std::to_string(labels.size() + 1));
            values.push_back(r["probability"].get<double>());
        }
        write_plot(cli.plot_path, labels, values, "query probabilities");
    }
    return result.all_passed ? exit_ok : exit_check_failed;
}

int tree_command(const Cli& cli) {
    qpt::Scenario scenario = qpt::parse_scenario(load_json(cli.scenario_path));
    qpt::TreeResult tree = qpt::enumerate_tree(scenario, cli.options());
    if (cli.format == "csv")
        write_output(cli.out_path, qpt::tree_to_csv(tree));
    else
        write_output(cli.out_path, qpt::tree_to_json(tree).dump(2));
    if (!cli.plot_path.empty()) {
        std::vector<std::string> labels;
        for (const auto& row : tree.rows) {
            std::string joined;
            for (const std::string& cell : row) {
                if (!joined.empty()) joined += "|";
                joined += cell;
            }
            labels.push_back(joined);
        }
        write_plot(cli.plot_path, labels, tree.probabilities, "outcome probabilities");
    }
    return std::abs(tree.total - 1.0) <= 1e-9 ? exit_ok : exit_check_failed;
}

int audit_command(const Cli& cli) {
    qpt::Scenario scenario = qpt::parse_scenario(load_json(cli.scenario_path));
    qpt::PreparedScenario prep = qpt::prepare(scenario, cli.tol);
    qpt::AuditReport report = qpt::audit_properties(prep.spec, cli.seed, 6, cli.dim_cap);
    qpt::Json j = qpt::audit_to_json(report, 1e-8);
    j["description"] = scenario.description;
    write_output(cli.out_path, j.dump(2));
    return report.ok(1e-8) ? exit_ok : exit_check_failed;
}

int theorem_command(const Cli& cli) {
    qpt::Scenario scenario = qpt::parse_scenario(load_json(cli.scenario_path));
    qpt::PreparedScenario prep = qpt::prepare(scenario, cli.tol);
    qpt::Dilation dilation{scenario.d_s, scenario.env_dim(), scenario.initial_state,
                           prep.family};
    qpt::Rng rng(cli.seed + 31);
    qpt::OperatorTuple a, b;
    for (std::size_t k = 0; k < prep.times.size(); ++k) {
        a.ops.push_back(qpt::random_matrix(rng, scenario.d_s, scenario.d_s));
        b.ops.push_back(qpt::random_matrix(rng, scenario.d_s, scenario.d_s));
    }
    qpt::TheoremReport report =
        qpt::verify_theorem1(dilation, qpt::TimeTuple(prep.times), a, b);
    qpt::Json j = qpt::theorem_to_json(report, 1e-8);
    j["description"] = scenario.description;
    write_output(cli.out_path, j.dump(2));
    return report.abs_error <= 1e-8 ? exit_ok : exit_check_failed;
}

int choi_command(const Cli& cli) {
    qpt::Scenario scenario = qpt::parse_scenario(load_json(cli.scenario_path));
    qpt::PreparedScenario prep = qpt::prepare(scenario, cli.tol);
    qpt::ChoiState choi = qpt::choi_state(prep.spec, cli.dim_cap, cli.tol);
    qpt::Json j;
    j["description"] = scenario.description;
    j["d_s"] = choi.d_s;
    j["n_slots"] = choi.n_slots;
    j["dim"] = choi.matrix.rows();
    j["leg_layout"] = qpt::choi_layout_json(choi);
    j["trace"] = qpt::complex_json(choi.matrix.trace());
    j["min_eigenvalue"] = qpt::number_json(qpt::min_eigenvalue(choi.matrix));
    if (cli.include_matrix) j["matrix"] = qpt::matrix_to_json(choi.matrix);
    write_output(cli.out_path, j.dump(2));
    return qpt::min_eigenvalue(choi.matrix) >= -1e-8 ? exit_ok : exit_check_failed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multitime quantum process toolkit"};
    app.require_subcommand(1);

    Cli cli;
    if (const char* env_tol = std::getenv("QPT_TOL")) {
        char* end = nullptr;
        double parsed = std::strtod(env_tol, &end);
        if (end != env_tol && parsed > 0) cli.tol = parsed;
    }

    auto add_common = [&cli](CLI::App* sub, bool with_format) {
        sub->add_option("scenario", cli.scenario_path, "scenario JSON file")->required();
        sub->add_option("--tol", cli.tol, "validation tolerance");
        sub->add_option("--seed", cli.seed, "seed for randomized checks");
        sub->add_option("--out", cli.out_path, "write the report here instead of stdout");
        sub->add_option("--cap", cli.dim_cap, "largest matrix dimension to materialize");
        sub->add_option("--plot", cli.plot_path, "write an SVG bar chart here");
        sub->add_flag("--no-timing", cli.no_timing, "omit wall time for byte-stable output");
        if (with_format)
            sub->add_option("--format", cli.format, "output format")
                ->check(CLI::IsMember({"json", "csv"}));
    };

    CLI::App* run = app.add_subcommand("run", "run every query in the scenario");
    add_common(run, false);
    CLI::App* tree = app.add_subcommand("tree", "enumerate all outcome sequences");
    add_common(tree, true);
    tree->add_option("--tree-cap", cli.tree_cap, "largest number of leaves to enumerate");
    CLI::App* audit = app.add_subcommand("audit", "check process tensor properties");
    add_common(audit, false);
    CLI::App* theorem =
        app.add_subcommand("verify-theorem1", "cross-check kernel against process tensor");
    add_common(theorem, false);
    CLI::App* choi = app.add_subcommand("choi", "compute the many-body representation");
    add_common(choi, false);
    choi->add_flag("--include-matrix", cli.include_matrix, "embed the full matrix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_ok : exit_parse;
    }

    auto diagnose = [](const char* kind, const std::exception& e, int code) {
        std::cerr << qpt::Json{{"error", kind}, {"detail", e.what()}, {"exit_code", code}}
                         .dump()
                  << "\n";
        return code;
    };

    try {
        if (run->parsed()) return run_command(cli);
        if (tree->parsed()) return tree_command(cli);
        if (audit->parsed()) return audit_command(cli);
        if (theorem->parsed()) return theorem_command(cli);
        return choi_command(cli);
    } catch (const qpt::ParseError& e) {
        return diagnose("parse", e, exit_parse);
    } catch (const qpt::ToleranceError& e) {
        return diagnose("numerical-check", e, exit_check_failed);
    } catch (const qpt::ZeroProbabilityError& e) {
        return diagnose("numerical-check", e, exit_check_failed);
    } catch (const std::invalid_argument& e) {
        return diagnose("validation", e, exit_invalid);
    } catch (const std::exception& e) {
        return diagnose("validation", e, exit_invalid);
    }
}
