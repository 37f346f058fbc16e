#include "evofrac/signal_csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace evofrac {

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::vector<double> split_row(const std::string& line, int line_no) {
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        std::size_t pos = 0;
        double value = 0.0;
        try {
            value = std::stod(cell, &pos);
        } catch (const std::exception&) {
            throw std::runtime_error("signal csv: bad number at line " + std::to_string(line_no));
        }
        if (pos != cell.size() && cell.find_first_not_of(" \t\r", pos) != std::string::npos) {
            throw std::runtime_error("signal csv: trailing junk at line " + std::to_string(line_no));
        }
        fields.push_back(value);
    }
    return fields;
}

}  // namespace

void write_signal_csv(std::ostream& out, const Signal& u) {
    const Eigen::Index d = u.dim();
    out << "t";
    for (Eigen::Index c = 0; c < d; ++c) out << ",re_" << c << ",im_" << c;
    out << "\n";
    for (int j = 0; j < u.grid().n_steps(); ++j) {
        out << fmt17(u.grid().node(j));
        for (Eigen::Index c = 0; c < d; ++c) {
            out << ',' << fmt17(u.at(j)[c].real()) << ',' << fmt17(u.at(j)[c].imag());
        }
        out << "\n";
    }
}

void write_signal_csv(const std::string& path, const Signal& u) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("signal csv: cannot open " + path + " for writing");
    write_signal_csv(out, u);
}

Signal read_signal_csv(std::istream& in, double rho) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("signal csv: empty input");
    if (line.rfind("t,", 0) != 0) throw std::runtime_error("signal csv: missing header");

    std::vector<double> times;
    std::vector<Eigen::VectorXcd> values;
    Eigen::Index dim = -1;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<double> row = split_row(line, line_no);
        if (row.size() < 3 || row.size() % 2 == 0) {
            throw std::runtime_error("signal csv: malformed row at line " + std::to_string(line_no));
        }
        const Eigen::Index d = static_cast<Eigen::Index>((row.size() - 1) / 2);
        if (dim < 0) dim = d;
        if (d != dim) {
            throw std::runtime_error("signal csv: inconsistent width at line " + std::to_string(line_no));
        }
        times.push_back(row[0]);
        Eigen::VectorXcd v(d);
        for (Eigen::Index c = 0; c < d; ++c) {
            v[c] = std::complex<double>(row[1 + 2 * static_cast<std::size_t>(c)],
                                        row[2 + 2 * static_cast<std::size_t>(c)]);
        }
        values.push_back(std::move(v));
    }
    if (times.size() < 2) throw std::runtime_error("signal csv: need at least two rows");

    const double dt = times[1] - times[0];
    if (!(dt > 0.0)) throw std::runtime_error("signal csv: t column must be strictly increasing");
    for (std::size_t j = 1; j < times.size(); ++j) {
        const double step = times[j] - times[j - 1];
        if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
            throw std::runtime_error("signal csv: non-uniform time step");
        }
    }
    TimeGrid grid(times[0], dt, static_cast<int>(times.size()), rho);
    return Signal(grid, std::move(values));
}

Signal read_signal_csv(const std::string& path, double rho) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("signal csv: cannot open " + path);
    return read_signal_csv(in, rho);
}

}  // namespace evofrac
