#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace evofrac {

enum class ExperimentKind { solve, check, fracapply, compare_kernels, ivp };

struct GridSpec {
    std::optional<double> t_start;
    std::optional<double> dt;
    std::optional<int> n_steps;
};

struct LawSpec {
    std::string file;                   // path, or empty when a builder is named
    std::string builder;                // "fokker_planck" | "kelvin_voigt" | empty
    std::optional<double> alpha;
    std::optional<double> kappa;        // fokker_planck scalar coefficients
    std::optional<double> mu00, mu01, mu10, mu11;
    std::optional<double> eta, c, d;    // kelvin_voigt scalar coefficients
    std::optional<int> tail_terms;
};

struct RhsSpec {
    std::string file;
    std::string waveform;  // "step" | "bump" | "impulse" | empty
    double amplitude = 1.0;
    std::optional<double> support_begin;
    std::optional<double> support_end;
    int component = 0;
};

struct IvpSpec {
    std::string mode;  // "delta" | "history"
    std::optional<int> node;
    std::vector<std::complex<double>> vector;
};

struct CheckSpec {
    std::string projectors;
    std::optional<double> rho_min;
    std::optional<double> rho_max;
};

struct ExperimentConfig {
    std::optional<ExperimentKind> kind;
    GridSpec grid;
    std::optional<double> rho;
    LawSpec law;
    std::string spatial;  // "grad1d:<n>:<h>" | "elast1d:<n>:<h>" | "none:<d>"
    RhsSpec rhs;
    std::string out_solution;
    std::string out_oracle;
    bool oracle = false;
    IvpSpec ivp;
    CheckSpec check;
    std::optional<double> gamma;   // fracapply
    std::optional<double> alpha;   // compare-kernels
    std::string input;
    std::string output;
    bool verbose = false;
};

/// Thrown by parse_config / validate_config with every violation collected,
/// not just the first.
class ConfigError : public std::exception {
public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }
    const char* what() const noexcept override { return message_.c_str(); }

private:
    std::vector<std::string> violations_;
    std::string message_;
};

/// Line-oriented `key = value` format with `#` comments and `[section]`
/// headers. Strict: unknown sections/keys and duplicate keys are errors that
/// name the offending line.
ExperimentConfig parse_config(const std::string& text);

/// Kind-specific completeness checks; throws ConfigError listing every gap.
void validate_config(const ExperimentConfig& config);

/// Canonical re-emission of a config (the parse/print round-trip fixed point).
std::string format_config(const ExperimentConfig& config);

/// Executes the experiment: writes the declared CSV artifacts, prints the
/// summary to `out`, and returns the process exit status.
int run(const ExperimentConfig& config, std::ostream& out);

}  // namespace evofrac
