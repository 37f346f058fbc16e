#include "evofrac/experiment_config.hpp"

#include <CLI11.hpp>

#include <complex>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

evofrac::ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return evofrac::parse_config(buffer.str());
}

// "node,values" where values are ';'-separated complex entries, e.g.
// "2048,(1,0);(0,0)" or "2048,1.5".
void parse_ivp_flag(const std::string& text, evofrac::IvpSpec& ivp, const char* mode) {
    const std::size_t comma = text.find(',');
    if (comma == std::string::npos) {
        throw std::runtime_error("--ivp flag expects node,vector");
    }
    ivp.mode = mode;
    ivp.node = std::stoi(text.substr(0, comma));
    std::string values = text.substr(comma + 1);
    for (char& c : values) {
        if (c == ';') c = ' ';
    }
    std::istringstream ss(values);
    ivp.vector.clear();
    std::complex<double> v;
    while (ss >> v) ivp.vector.push_back(v);
    if (ivp.vector.empty() || !ss.eof()) {
        throw std::runtime_error("--ivp flag vector is malformed: '" + text + "'");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"evofrac: evolutionary equations with fractional material laws"};
    app.require_subcommand(0, 1);

    std::string config_path;
    bool verbose = false;
    app.add_option("--config", config_path, "experiment config file");
    app.add_flag("--verbose", verbose, "verbose summaries");

    struct Flags {
        std::string law, spatial, rhs, out, projectors, input, output;
        std::string ivp_delta, ivp_history;
        double rho = 0.0, rho_min = 0.0, rho_max = 0.0, gamma = 0.0, alpha = 0.0;
        bool oracle = false;
    } flags;

    CLI::App* solve = app.add_subcommand("solve", "frequency-domain solve of (d0 M + A) U = f");
    solve->add_option("--law", flags.law, "material law file");
    solve->add_option("--spatial", flags.spatial, "grad1d:<n>:<h> | elast1d:<n>:<h> | none:<d>");
    solve->add_option("--rho", flags.rho, "exponential weight");
    solve->add_option("--rhs", flags.rhs, "right-hand side CSV");
    solve->add_option("--out", flags.out, "solution CSV path");
    solve->add_option("--ivp-delta", flags.ivp_delta, "node,vector delta source");
    solve->add_option("--ivp-history", flags.ivp_history, "node,vector history term");
    solve->add_flag("--oracle", flags.oracle, "also run the time-stepping oracle");

    CLI::App* ivp = app.add_subcommand("ivp", "initial-value solve (delta or history form)");
    ivp->add_option("--law", flags.law, "material law file");
    ivp->add_option("--spatial", flags.spatial, "spatial operator spec");
    ivp->add_option("--rho", flags.rho, "exponential weight");
    ivp->add_option("--rhs", flags.rhs, "right-hand side CSV");
    ivp->add_option("--out", flags.out, "solution CSV path");
    ivp->add_option("--ivp-delta", flags.ivp_delta, "node,vector delta source");
    ivp->add_option("--ivp-history", flags.ivp_history, "node,vector history term");

    CLI::App* check = app.add_subcommand("check", "certify the well-posedness condition");
    check->add_option("--law", flags.law, "material law file");
    check->add_option("--projectors", flags.projectors, "projector triple file");
    check->add_option("--rho-min", flags.rho_min, "scan start");
    check->add_option("--rho-max", flags.rho_max, "scan end");

    CLI::App* fracapply = app.add_subcommand("fracapply", "apply d0^gamma to a signal");
    fracapply->add_option("--gamma", flags.gamma, "order (negative integrates)");
    fracapply->add_option("--input", flags.input, "input CSV");
    fracapply->add_option("--rho", flags.rho, "exponential weight");
    fracapply->add_option("--output", flags.output, "output CSV");

    CLI::App* compare = app.add_subcommand("compare-kernels",
                                           "spectral vs Riemann-Liouville fractional integral");
    compare->add_option("--alpha", flags.alpha, "order in (0,1)");
    compare->add_option("--input", flags.input, "input CSV");
    compare->add_option("--rho", flags.rho, "exponential weight");
    compare->add_option("--output", flags.output, "output CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        evofrac::ExperimentConfig config;
        if (!config_path.empty()) config = load_config_file(config_path);
        config.verbose = verbose;

        if (solve->parsed() || ivp->parsed()) {
            config.kind = evofrac::ExperimentKind::solve;
            if (!flags.law.empty()) config.law.file = flags.law;
            if (!flags.spatial.empty()) config.spatial = flags.spatial;
            if (flags.rho > 0.0) config.rho = flags.rho;
            if (!flags.rhs.empty()) config.rhs.file = flags.rhs;
            if (!flags.out.empty()) config.out_solution = flags.out;
            if (flags.oracle) config.oracle = true;
            if (!flags.ivp_delta.empty()) {
                parse_ivp_flag(flags.ivp_delta, config.ivp, "delta");
                config.kind = evofrac::ExperimentKind::ivp;
            }
            if (!flags.ivp_history.empty()) {
                parse_ivp_flag(flags.ivp_history, config.ivp, "history");
                config.kind = evofrac::ExperimentKind::ivp;
            }
            if (ivp->parsed() && config.ivp.mode.empty()) {
                throw std::runtime_error("ivp: one of --ivp-delta or --ivp-history is required");
            }
        } else if (check->parsed()) {
            config.kind = evofrac::ExperimentKind::check;
            if (!flags.law.empty()) config.law.file = flags.law;
            if (!flags.projectors.empty()) config.check.projectors = flags.projectors;
            if (flags.rho_min > 0.0) config.check.rho_min = flags.rho_min;
            if (flags.rho_max > 0.0) config.check.rho_max = flags.rho_max;
        } else if (fracapply->parsed()) {
            config.kind = evofrac::ExperimentKind::fracapply;
            config.gamma = flags.gamma;
            if (!flags.input.empty()) config.input = flags.input;
            if (!flags.output.empty()) config.output = flags.output;
            if (flags.rho > 0.0) config.rho = flags.rho;
        } else if (compare->parsed()) {
            config.kind = evofrac::ExperimentKind::compare_kernels;
            if (flags.alpha > 0.0) config.alpha = flags.alpha;
            if (!flags.input.empty()) config.input = flags.input;
            if (!flags.output.empty()) config.output = flags.output;
            if (flags.rho > 0.0) config.rho = flags.rho;
        } else if (config_path.empty()) {
            std::cerr << "error: give a subcommand or --config FILE (see --help)\n";
            return 2;
        }

        return evofrac::run(config, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
