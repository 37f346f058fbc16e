#include "evofrac/experiment_config.hpp"

#include "evofrac/evolution_solver.hpp"
#include "evofrac/frac_calculus.hpp"
#include "evofrac/material_law.hpp"
#include "evofrac/signal_csv.hpp"
#include "evofrac/spatial_operators.hpp"
#include "evofrac/wellposedness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace evofrac {

namespace {

std::string trim(const std::string& s) {
    const std::size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const std::size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

struct Parser {
    std::vector<std::string> violations;
    std::set<std::string> seen;

    void fail(int line_no, const std::string& message) {
        violations.push_back("line " + std::to_string(line_no) + ": " + message);
    }

    bool once(int line_no, const std::string& section, const std::string& key) {
        if (!seen.insert(section + "." + key).second) {
            fail(line_no, "duplicate key '" + key + "' in section [" + section + "]");
            return false;
        }
        return true;
    }

    std::optional<double> number(int line_no, const std::string& key, const std::string& value) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(value, &pos);
            if (trim(value.substr(pos)).empty()) return v;
        } catch (const std::exception&) {
        }
        fail(line_no, "value of '" + key + "' is not a number: '" + value + "'");
        return std::nullopt;
    }

    std::optional<int> integer(int line_no, const std::string& key, const std::string& value) {
        try {
            std::size_t pos = 0;
            const long v = std::stol(value, &pos);
            if (trim(value.substr(pos)).empty()) return static_cast<int>(v);
        } catch (const std::exception&) {
        }
        fail(line_no, "value of '" + key + "' is not an integer: '" + value + "'");
        return std::nullopt;
    }
};

std::vector<std::complex<double>> parse_complex_list(const std::string& text) {
    std::string spaced = text;
    for (char& c : spaced) {
        if (c == ';') c = ' ';
    }
    std::istringstream ss(spaced);
    std::vector<std::complex<double>> values;
    std::complex<double> v;
    while (ss >> v) values.push_back(v);
    if (!ss.eof()) throw std::runtime_error("malformed complex list: '" + text + "'");
    return values;
}

std::string kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::solve: return "solve";
        case ExperimentKind::check: return "check";
        case ExperimentKind::fracapply: return "fracapply";
        case ExperimentKind::compare_kernels: return "compare-kernels";
        case ExperimentKind::ivp: return "ivp";
    }
    return "?";
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : violations_(std::move(violations)) {
    std::ostringstream out;
    out << "config: " << violations_.size() << " violation(s)";
    for (const auto& v : violations_) out << "\n  - " << v;
    message_ = out.str();
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig config;
    Parser p;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;

    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                p.fail(line_no, "malformed section header '" + line + "'");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            static const std::set<std::string> known{
                "experiment", "grid", "law", "spatial", "rhs",
                "output",     "ivp",  "check", "fracapply", "compare-kernels"};
            if (!known.contains(section)) {
                p.fail(line_no, "unknown section [" + section + "]");
                section.clear();
            }
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            p.fail(line_no, "expected 'key = value', got '" + line + "'");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) {
            p.fail(line_no, "key '" + key + "' outside any section");
            continue;
        }
        if (!p.once(line_no, section, key)) continue;

        auto unknown = [&] { p.fail(line_no, "unknown key '" + key + "' in [" + section + "]"); };

        if (section == "experiment") {
            if (key == "kind") {
                if (value == "solve") config.kind = ExperimentKind::solve;
                else if (value == "check") config.kind = ExperimentKind::check;
                else if (value == "fracapply") config.kind = ExperimentKind::fracapply;
                else if (value == "compare-kernels") config.kind = ExperimentKind::compare_kernels;
                else if (value == "ivp") config.kind = ExperimentKind::ivp;
                else p.fail(line_no, "unknown experiment kind '" + value + "'");
            } else {
                unknown();
            }
        } else if (section == "grid") {
            if (key == "t_start") config.grid.t_start = p.number(line_no, key, value);
            else if (key == "dt") config.grid.dt = p.number(line_no, key, value);
            else if (key == "n_steps") config.grid.n_steps = p.integer(line_no, key, value);
            else if (key == "rho") config.rho = p.number(line_no, key, value);
            else unknown();
        } else if (section == "law") {
            if (key == "file") config.law.file = value;
            else if (key == "builder") config.law.builder = value;
            else if (key == "alpha") config.law.alpha = p.number(line_no, key, value);
            else if (key == "kappa") config.law.kappa = p.number(line_no, key, value);
            else if (key == "mu00") config.law.mu00 = p.number(line_no, key, value);
            else if (key == "mu01") config.law.mu01 = p.number(line_no, key, value);
            else if (key == "mu10") config.law.mu10 = p.number(line_no, key, value);
            else if (key == "mu11") config.law.mu11 = p.number(line_no, key, value);
            else if (key == "eta") config.law.eta = p.number(line_no, key, value);
            else if (key == "c") config.law.c = p.number(line_no, key, value);
            else if (key == "d") config.law.d = p.number(line_no, key, value);
            else if (key == "tail_terms") config.law.tail_terms = p.integer(line_no, key, value);
            else unknown();
        } else if (section == "spatial") {
            if (key == "spec") config.spatial = value;
            else unknown();
        } else if (section == "rhs") {
            if (key == "file") config.rhs.file = value;
            else if (key == "waveform") config.rhs.waveform = value;
            else if (key == "amplitude") {
                if (auto v = p.number(line_no, key, value)) config.rhs.amplitude = *v;
            } else if (key == "support") {
                const std::size_t comma = value.find(',');
                if (comma == std::string::npos) {
                    config.rhs.support_begin = p.number(line_no, key, value);
                } else {
                    config.rhs.support_begin = p.number(line_no, key, trim(value.substr(0, comma)));
                    config.rhs.support_end = p.number(line_no, key, trim(value.substr(comma + 1)));
                }
            } else if (key == "component") {
                if (auto v = p.integer(line_no, key, value)) config.rhs.component = *v;
            } else {
                unknown();
            }
        } else if (section == "output") {
            if (key == "solution") config.out_solution = value;
            else if (key == "oracle") {
                config.out_oracle = value;
                config.oracle = true;
            } else unknown();
        } else if (section == "ivp") {
            if (key == "mode") config.ivp.mode = value;
            else if (key == "node") config.ivp.node = p.integer(line_no, key, value);
            else if (key == "vector") {
                try {
                    config.ivp.vector = parse_complex_list(value);
                } catch (const std::exception& e) {
                    p.fail(line_no, e.what());
                }
            } else unknown();
        } else if (section == "check") {
            if (key == "projectors") config.check.projectors = value;
            else if (key == "rho_min") config.check.rho_min = p.number(line_no, key, value);
            else if (key == "rho_max") config.check.rho_max = p.number(line_no, key, value);
            else unknown();
        } else if (section == "fracapply") {
            if (key == "gamma") config.gamma = p.number(line_no, key, value);
            else if (key == "input") config.input = value;
            else if (key == "output") config.output = value;
            else unknown();
        } else if (section == "compare-kernels") {
            if (key == "alpha") config.alpha = p.number(line_no, key, value);
            else if (key == "input") config.input = value;
            else if (key == "output") config.output = value;
            else unknown();
        }
    }

    if (!p.violations.empty()) throw ConfigError(std::move(p.violations));
    return config;
}

void validate_config(const ExperimentConfig& config) {
    std::vector<std::string> bad;
    auto need = [&bad](bool ok, const std::string& message) {
        if (!ok) bad.push_back(message);
    };

    if (!config.kind) {
        bad.emplace_back("missing experiment kind");
        throw ConfigError(std::move(bad));
    }
    const ExperimentKind kind = *config.kind;

    const bool has_law = !config.law.file.empty() || !config.law.builder.empty();
    const bool law_by_builder = !config.law.builder.empty();
    if (law_by_builder) {
        need(config.law.file.empty(), "law: give either a file or a builder, not both");
        if (config.law.builder == "fokker_planck") {
            need(config.law.alpha.has_value(), "law: fokker_planck builder needs alpha");
            need(config.law.kappa.has_value(), "law: fokker_planck builder needs kappa");
            need(config.law.mu11.has_value(), "law: fokker_planck builder needs mu11");
        } else if (config.law.builder == "kelvin_voigt") {
            need(config.law.alpha.has_value(), "law: kelvin_voigt builder needs alpha");
            need(config.law.eta.has_value(), "law: kelvin_voigt builder needs eta");
            need(config.law.c.has_value(), "law: kelvin_voigt builder needs c");
            need(config.law.d.has_value(), "law: kelvin_voigt builder needs d");
        } else {
            bad.push_back("law: unknown builder '" + config.law.builder + "'");
        }
        need(!config.spatial.empty(), "law: a builder needs a spatial spec for its block sizes");
    }

    if (kind == ExperimentKind::solve || kind == ExperimentKind::ivp) {
        need(has_law, "law: file or builder required");
        need(!config.spatial.empty(), "spatial: spec required");
        need(!config.out_solution.empty(), "output: solution path required");
        const bool by_file = !config.rhs.file.empty();
        const bool by_waveform = !config.rhs.waveform.empty();
        need(by_file != by_waveform, "rhs: exactly one of file or waveform required");
        // rho defaults to the damping budget 30/T for waveform runs; a CSV rhs
        // fixes the grid before rho can be derived, so it must be explicit.
        if (by_file) {
            need(config.rho.has_value() && *config.rho > 0.0, "grid: positive rho required");
        } else if (config.rho) {
            need(*config.rho > 0.0, "grid: rho must be positive");
        }
        if (by_waveform) {
            need(config.grid.dt.has_value() && config.grid.n_steps.has_value(),
                 "grid: dt and n_steps required with a waveform rhs");
            need(config.rhs.waveform == "step" || config.rhs.waveform == "bump" ||
                     config.rhs.waveform == "impulse",
                 "rhs: waveform must be step, bump or impulse");
            need(config.rhs.support_begin.has_value(), "rhs: support required");
            if (config.rhs.waveform == "bump") {
                need(config.rhs.support_end.has_value(), "rhs: bump support needs both endpoints");
            }
        }
        if (by_file) {
            need(!config.grid.dt && !config.grid.n_steps && !config.grid.t_start,
                 "grid: dt/n_steps/t_start conflict with an rhs file (the file fixes the grid)");
        }
        if (kind == ExperimentKind::ivp) {
            need(config.ivp.mode == "delta" || config.ivp.mode == "history",
                 "ivp: mode must be delta or history");
            need(config.ivp.node.has_value(), "ivp: node required");
            need(!config.ivp.vector.empty(), "ivp: vector required");
        }
    } else if (kind == ExperimentKind::check) {
        need(has_law, "law: file or builder required");
        need(!config.check.projectors.empty(), "check: projectors path required");
        need(config.check.rho_min.has_value() && *config.check.rho_min > 0.0,
             "check: positive rho_min required");
        need(config.check.rho_max.has_value() &&
                 (!config.check.rho_min || *config.check.rho_max >= *config.check.rho_min),
             "check: rho_max >= rho_min required");
    } else if (kind == ExperimentKind::fracapply) {
        need(config.gamma.has_value(), "fracapply: gamma required");
        need(!config.input.empty(), "fracapply: input path required");
        need(!config.output.empty(), "fracapply: output path required");
        need(config.rho.has_value() && *config.rho > 0.0, "grid: positive rho required");
    } else if (kind == ExperimentKind::compare_kernels) {
        need(config.alpha.has_value() && *config.alpha > 0.0 && *config.alpha < 1.0,
             "compare-kernels: alpha in (0,1) required");
        need(!config.input.empty(), "compare-kernels: input path required");
        need(!config.output.empty(), "compare-kernels: output path required");
        need(config.rho.has_value() && *config.rho > 0.0, "grid: positive rho required");
    }

    if (!bad.empty()) throw ConfigError(std::move(bad));
}

std::string format_config(const ExperimentConfig& config) {
    std::ostringstream out;
    out << "[experiment]\n";
    if (config.kind) out << "kind = " << kind_name(*config.kind) << "\n";
    if (config.grid.t_start || config.grid.dt || config.grid.n_steps || config.rho) {
        out << "[grid]\n";
        if (config.grid.t_start) out << "t_start = " << fmt(*config.grid.t_start) << "\n";
        if (config.grid.dt) out << "dt = " << fmt(*config.grid.dt) << "\n";
        if (config.grid.n_steps) out << "n_steps = " << *config.grid.n_steps << "\n";
        if (config.rho) out << "rho = " << fmt(*config.rho) << "\n";
    }
    const LawSpec& l = config.law;
    if (!l.file.empty() || !l.builder.empty()) {
        out << "[law]\n";
        if (!l.file.empty()) out << "file = " << l.file << "\n";
        if (!l.builder.empty()) out << "builder = " << l.builder << "\n";
        auto kv = [&out](const char* key, const std::optional<double>& v) {
            if (v) out << key << " = " << fmt(*v) << "\n";
        };
        kv("alpha", l.alpha);
        kv("kappa", l.kappa);
        kv("mu00", l.mu00);
        kv("mu01", l.mu01);
        kv("mu10", l.mu10);
        kv("mu11", l.mu11);
        kv("eta", l.eta);
        kv("c", l.c);
        kv("d", l.d);
        if (l.tail_terms) out << "tail_terms = " << *l.tail_terms << "\n";
    }
    if (!config.spatial.empty()) out << "[spatial]\nspec = " << config.spatial << "\n";
    const RhsSpec& r = config.rhs;
    if (!r.file.empty() || !r.waveform.empty()) {
        out << "[rhs]\n";
        if (!r.file.empty()) out << "file = " << r.file << "\n";
        if (!r.waveform.empty()) out << "waveform = " << r.waveform << "\n";
        out << "amplitude = " << fmt(r.amplitude) << "\n";
        if (r.support_begin && r.support_end) {
            out << "support = " << fmt(*r.support_begin) << "," << fmt(*r.support_end) << "\n";
        } else if (r.support_begin) {
            out << "support = " << fmt(*r.support_begin) << "\n";
        }
        out << "component = " << r.component << "\n";
    }
    if (!config.out_solution.empty() || !config.out_oracle.empty()) {
        out << "[output]\n";
        if (!config.out_solution.empty()) out << "solution = " << config.out_solution << "\n";
        if (!config.out_oracle.empty()) out << "oracle = " << config.out_oracle << "\n";
    }
    if (!config.ivp.mode.empty()) {
        out << "[ivp]\nmode = " << config.ivp.mode << "\n";
        if (config.ivp.node) out << "node = " << *config.ivp.node << "\n";
        if (!config.ivp.vector.empty()) {
            out << "vector = ";
            for (std::size_t i = 0; i < config.ivp.vector.size(); ++i) {
                if (i) out << ";";
                out << "(" << fmt(config.ivp.vector[i].real()) << ","
                    << fmt(config.ivp.vector[i].imag()) << ")";
            }
            out << "\n";
        }
    }
    if (!config.check.projectors.empty()) {
        out << "[check]\nprojectors = " << config.check.projectors << "\n";
        if (config.check.rho_min) out << "rho_min = " << fmt(*config.check.rho_min) << "\n";
        if (config.check.rho_max) out << "rho_max = " << fmt(*config.check.rho_max) << "\n";
    }
    if (config.kind && *config.kind == ExperimentKind::fracapply) {
        out << "[fracapply]\n";
        if (config.gamma) out << "gamma = " << fmt(*config.gamma) << "\n";
        if (!config.input.empty()) out << "input = " << config.input << "\n";
        if (!config.output.empty()) out << "output = " << config.output << "\n";
    }
    if (config.kind && *config.kind == ExperimentKind::compare_kernels) {
        out << "[compare-kernels]\n";
        if (config.alpha) out << "alpha = " << fmt(*config.alpha) << "\n";
        if (!config.input.empty()) out << "input = " << config.input << "\n";
        if (!config.output.empty()) out << "output = " << config.output << "\n";
    }
    return out.str();
}

namespace {

SkewOperator build_spatial(const std::string& spec) {
    std::istringstream ss(spec);
    std::string kind;
    std::getline(ss, kind, ':');
    if (kind == "none") {
        std::string dim_text;
        std::getline(ss, dim_text);
        const int d = std::stoi(dim_text);
        if (d < 1) throw std::runtime_error("spatial: none:<d> needs d >= 1");
        return SkewOperator::zero(d);
    }
    std::string n_text, h_text;
    if (!std::getline(ss, n_text, ':') || !std::getline(ss, h_text)) {
        throw std::runtime_error("spatial: spec must be grad1d:<n>:<h>, elast1d:<n>:<h> or none:<d>");
    }
    const int n = std::stoi(n_text);
    const double h = std::stod(h_text);
    if (kind == "grad1d") return build_grad_div_1d(n, h);
    if (kind == "elast1d") return build_elasticity_1d(n, h);
    throw std::runtime_error("spatial: unknown operator kind '" + kind + "'");
}

MaterialLaw build_law(const LawSpec& spec, const SkewOperator& a) {
    if (!spec.file.empty()) return load_material_law(spec.file);
    const auto [d_first, d_second] = a.block_dims();
    auto scaled_identity = [](double v, Eigen::Index n) {
        return OperatorBlock(v * Eigen::MatrixXcd::Identity(n, n), true);
    };
    if (spec.builder == "fokker_planck") {
        auto rect = [](double v, Eigen::Index rows, Eigen::Index cols) {
            Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(rows, cols);
            for (Eigen::Index i = 0; i < std::min(rows, cols); ++i) m(i, i) = v;
            return m;
        };
        return fokker_planck_material(
            scaled_identity(spec.kappa.value(), d_first),
            scaled_identity(spec.mu00.value_or(0.0), d_first),
            rect(spec.mu01.value_or(0.0), d_first, d_second),
            rect(spec.mu10.value_or(0.0), d_second, d_first),
            OperatorBlock(spec.mu11.value() * Eigen::MatrixXcd::Identity(d_second, d_second)),
            spec.alpha.value());
    }
    if (spec.builder == "kelvin_voigt") {
        return kelvin_voigt_material(scaled_identity(spec.eta.value(), d_first),
                                     scaled_identity(spec.c.value(), d_second),
                                     scaled_identity(spec.d.value(), d_second),
                                     spec.alpha.value(), spec.tail_terms.value_or(8))
            .law;
    }
    throw std::runtime_error("law: unknown builder '" + spec.builder + "'");
}

Signal build_waveform(const TimeGrid& grid, Eigen::Index dim, const RhsSpec& rhs) {
    if (rhs.component < 0 || rhs.component >= dim) {
        throw std::runtime_error("rhs: component index out of range");
    }
    Eigen::VectorXcd direction = Eigen::VectorXcd::Zero(dim);
    direction[rhs.component] = 1.0;
    const double a = rhs.support_begin.value();
    if (rhs.waveform == "step") {
        return Signal::sample(grid, dim, [&](double t) {
            return (t >= a ? rhs.amplitude : 0.0) * direction;
        });
    }
    if (rhs.waveform == "bump") {
        const double b = rhs.support_end.value();
        if (!(b > a)) throw std::runtime_error("rhs: bump support must satisfy begin < end");
        const double center = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        // Smooth bump exactly supported in [a, b], flat to all orders at the ends.
        return Signal::sample(grid, dim, [&](double t) -> Eigen::VectorXcd {
            const double x = (t - center) / half;
            if (x <= -1.0 || x >= 1.0) return Eigen::VectorXcd::Zero(dim);
            return (rhs.amplitude * std::exp(1.0 - 1.0 / (1.0 - x * x))) * direction;
        });
    }
    if (rhs.waveform == "impulse") {
        Signal f = Signal::zero(grid, dim);
        const int node = grid.node_index(a);
        std::vector<Eigen::VectorXcd> values(f.values());
        values[static_cast<std::size_t>(node)] = (rhs.amplitude / grid.dt()) * direction;
        return Signal(grid, std::move(values));
    }
    throw std::runtime_error("rhs: unknown waveform '" + rhs.waveform + "'");
}

double weighted_mass_before(const Signal& u, double a) {
    double acc = 0.0;
    const TimeGrid& g = u.grid();
    for (int j = 0; j < g.n_steps(); ++j) {
        if (g.node(j) < a) acc += u.at(j).squaredNorm() * std::exp(-2.0 * g.rho() * g.node(j));
    }
    return acc * g.dt();
}

int run_solve(const ExperimentConfig& config, std::ostream& out) {
    const SkewOperator a = build_spatial(config.spatial);
    const MaterialLaw law = build_law(config.law, a);
    if (config.verbose) {
        out << "state dimension        : " << law.dim() << "\n";
        out << "fractional exponents   : " << law.pi().size()
            << (law.tail() ? " (+ tail)" : "") << "\n";
    }

    Signal f = [&]() {
        if (!config.rhs.file.empty()) return read_signal_csv(config.rhs.file, *config.rho);
        const int n = *config.grid.n_steps;
        const double dt = *config.grid.dt;
        const double default_start =
            *config.kind == ExperimentKind::ivp ? -0.25 * n * dt : 0.0;
        const double rho =
            config.rho.value_or(TimeGrid::kDefaultDampingBudget / (n * dt));
        TimeGrid grid(config.grid.t_start.value_or(default_start), dt, n, rho);
        return build_waveform(grid, law.dim(), config.rhs);
    }();
    if (f.dim() != law.dim()) throw std::runtime_error("rhs: dimension does not match the law");
    if (config.verbose) {
        char line[128];
        std::snprintf(line, sizeof(line),
                      "grid                   : t_start %.6g, dt %.6g, n %d, rho %.6g\n",
                      f.grid().t_start(), f.grid().dt(), f.grid().n_steps(), f.grid().rho());
        out << line;
    }

    EvolutionaryProblem problem(law, a, f.grid());
    SolveStats stats;
    Signal u = Signal::zero(f.grid(), f.dim());

    if (*config.kind == ExperimentKind::ivp) {
        DeltaSource src{*config.ivp.node, Eigen::VectorXcd::Zero(law.dim())};
        if (static_cast<Eigen::Index>(config.ivp.vector.size()) != law.dim()) {
            throw std::runtime_error("ivp: vector dimension does not match the law");
        }
        for (Eigen::Index i = 0; i < law.dim(); ++i) {
            src.weight[i] = config.ivp.vector[static_cast<std::size_t>(i)];
        }
        if (config.ivp.mode == "delta") {
            IvpSolution sol = ivp_solve_delta(problem, f, src);
            u = sol.u;
            char line[96];
            std::snprintf(line, sizeof(line), "jump defect (H_-1)     : %.6e\n", sol.jump_defect);
            out << line;
        } else {
            u = ivp_solve_history(problem, f, src);
        }
    } else {
        u = solve(problem, f, &stats);
        char line[96];
        std::snprintf(line, sizeof(line), "max relative residual  : %.6e\n",
                      stats.max_relative_residual);
        out << line;
    }

    write_signal_csv(config.out_solution, u);

    char line[128];
    std::snprintf(line, sizeof(line), "rhs weighted norm      : %.12e\n", weighted_norm(f));
    out << line;
    std::snprintf(line, sizeof(line), "solution weighted norm : %.12e\n", weighted_norm(u));
    out << line;

    // Causality ratio when the rhs leaves a quiet lead-in on the grid. An ivp
    // run injects mass at its source node, so the ratio is only meaningful for
    // plain solves.
    int first_active = -1;
    for (int j = 0; j < f.grid().n_steps(); ++j) {
        if (f.at(j).norm() > 0.0) {
            first_active = j;
            break;
        }
    }
    if (*config.kind == ExperimentKind::solve && first_active > 0 &&
        f.grid().meets_damping_budget()) {
        const double total = weighted_norm(u);
        const double ratio =
            total > 0.0 ? weighted_mass_before(u, f.grid().node(first_active)) / (total * total)
                        : 0.0;
        std::snprintf(line, sizeof(line), "causality ratio (a=%.6g): %.6e\n",
                      f.grid().node(first_active), ratio);
        out << line;
    }

    if (config.oracle) {
        const double t0 = first_active >= 0 ? f.grid().node(first_active) : f.grid().t_start();
        Signal reference = time_stepping_oracle(problem, f, t0);
        const std::string oracle_path =
            config.out_oracle.empty() ? config.out_solution + ".oracle.csv" : config.out_oracle;
        write_signal_csv(oracle_path, reference);
        double max_diff = 0.0;
        for (int j = 0; j < u.grid().n_steps(); ++j) {
            max_diff = std::max(max_diff, (u.at(j) - reference.at(j)).cwiseAbs().maxCoeff());
        }
        std::vector<Eigen::VectorXcd> diff;
        diff.reserve(static_cast<std::size_t>(u.grid().n_steps()));
        for (int j = 0; j < u.grid().n_steps(); ++j) diff.push_back(u.at(j) - reference.at(j));
        const double rel = weighted_norm(u) > 0.0
                               ? weighted_norm(Signal(u.grid(), std::move(diff))) / weighted_norm(u)
                               : 0.0;
        std::snprintf(line, sizeof(line),
                      "oracle max difference  : %.6e (relative weighted %.6e)\n", max_diff, rel);
        out << line;
    }
    return 0;
}

int run_check(const ExperimentConfig& config, std::ostream& out) {
    MaterialLaw law = [&]() {
        if (!config.law.file.empty()) return load_material_law(config.law.file);
        const SkewOperator a = build_spatial(config.spatial);
        return build_law(config.law, a);
    }();
    ProjectorTriple proj = load_projectors(config.check.projectors);
    WellposednessReport report = verify_condition(law, proj);
    out << report.to_text();

    if (report.passed) {
        const double lo = *config.check.rho_min;
        const double hi = *config.check.rho_max;
        out << "  rho scan (lower bound vs sampled symbol ellipticity):\n";
        const int count = 10;
        for (int i = 0; i < count; ++i) {
            const double rho = lo * std::pow(hi / lo, double(i) / (count - 1));
            const double bound = positivity_lower_bound(law, proj, rho);
            const double sampled =
                sampled_symbol_positivity(law, rho, default_lambda_samples(rho));
            char line[128];
            std::snprintf(line, sizeof(line), "    rho %.6e  bound %.6e  sampled %.6e\n", rho,
                          bound, sampled);
            out << line;
        }
    }
    return report.passed ? 0 : 1;
}

int run_fracapply(const ExperimentConfig& config, std::ostream& out) {
    Signal u = read_signal_csv(config.input, *config.rho);
    Signal result = apply_frac_power(*config.gamma, u);
    write_signal_csv(config.output, result);
    char line[96];
    std::snprintf(line, sizeof(line), "output weighted norm   : %.12e\n", weighted_norm(result));
    out << line;
    return 0;
}

int run_compare_kernels(const ExperimentConfig& config, std::ostream& out) {
    Signal u = read_signal_csv(config.input, *config.rho);
    Signal spectral = apply_frac_power(-*config.alpha, u);
    Signal quadrature = rl_integral_oracle(*config.alpha, u);

    std::ofstream csv(config.output);
    if (!csv) throw std::runtime_error("compare-kernels: cannot open " + config.output);
    csv << "t";
    for (Eigen::Index c = 0; c < u.dim(); ++c) {
        csv << ",spectral_re_" << c << ",spectral_im_" << c;
    }
    for (Eigen::Index c = 0; c < u.dim(); ++c) csv << ",rl_re_" << c << ",rl_im_" << c;
    csv << ",error\n";
    char buf[64];
    for (int j = 0; j < u.grid().n_steps(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", u.grid().node(j));
        csv << buf;
        for (Eigen::Index c = 0; c < u.dim(); ++c) {
            std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", spectral.at(j)[c].real(),
                          spectral.at(j)[c].imag());
            csv << buf;
        }
        for (Eigen::Index c = 0; c < u.dim(); ++c) {
            std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", quadrature.at(j)[c].real(),
                          quadrature.at(j)[c].imag());
            csv << buf;
        }
        std::snprintf(buf, sizeof(buf), ",%.17g", (spectral.at(j) - quadrature.at(j)).norm());
        csv << buf << "\n";
    }

    double num = 0.0, den = 0.0;
    for (int j = 0; j < u.grid().n_steps(); ++j) {
        num += (spectral.at(j) - quadrature.at(j)).squaredNorm();
        den += spectral.at(j).squaredNorm();
    }
    const double rel = den > 0.0 ? std::sqrt(num / den) : 0.0;
    char line[96];
    std::snprintf(line, sizeof(line), "kernel relative L2 diff: %.6e\n", rel);
    out << line;
    return 0;
}

}  // namespace

int run(const ExperimentConfig& config, std::ostream& out) {
    validate_config(config);
    switch (*config.kind) {
        case ExperimentKind::solve:
        case ExperimentKind::ivp:
            return run_solve(config, out);
        case ExperimentKind::check:
            return run_check(config, out);
        case ExperimentKind::fracapply:
            return run_fracapply(config, out);
        case ExperimentKind::compare_kernels:
            return run_compare_kernels(config, out);
    }
    return 2;
}

}  // namespace evofrac
