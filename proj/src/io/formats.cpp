#include "rtp/io/formats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "rtp/core/errors.hpp"

namespace rtp::io {

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) out.push_back(trim(cell));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_real(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw ConfigurationError("");
        return v;
    } catch (const std::exception&) {
        throw ConfigurationError("not a number: '" + s + "'");
    }
}

Spin parse_spin(const std::string& s) {
    if (s == "1" || s == "+1" || s == "plus") return Spin::plus;
    if (s == "-1" || s == "minus") return Spin::minus;
    throw ConfigurationError("sigma must be +1 or -1, got '" + s + "'");
}

std::size_t parse_index(const std::string& s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ConfigurationError("bad x_index '" + s + "'");
    return v;
}

struct Row {
    double t;
    std::size_t x;
    Spin s;
    double value;
};

std::vector<Row> read_rows(std::istream& in, bool with_time) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigurationError("empty CSV");
    const auto header = split(trim(line), ',');
    const std::vector<std::string> expected =
        with_time ? std::vector<std::string>{"t", "x_index", "sigma", "value"} : std::vector<std::string>{"x_index", "sigma", "value"};
    if (header != expected) throw ConfigurationError("unexpected CSV header '" + trim(line) + "'");
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != expected.size()) throw ConfigurationError("malformed CSV row '" + line + "'");
        const std::size_t o = with_time ? 1 : 0;
        rows.push_back({with_time ? parse_real(cells[0]) : 0.0, parse_index(cells[o]), parse_spin(cells[o + 1]),
                        parse_real(cells[o + 2])});
    }
    if (rows.empty()) throw ConfigurationError("CSV has no data rows");
    return rows;
}

DensityField field_from_rows(const std::vector<Row>& rows, std::size_t grid) {
    DensityField f(grid);
    std::vector<char> seen(2 * grid, 0);
    for (const auto& r : rows) {
        if (r.x >= grid) throw ConfigurationError("x_index outside the grid");
        char& mark = seen[2 * r.x + layer(r.s)];
        if (mark) throw ConfigurationError("duplicate cell in CSV");
        mark = 1;
        f(r.x, r.s) = r.value;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw ConfigurationError("CSV misses cells");
    return f;
}

std::vector<double> parse_arguments(const std::string& text, const std::string& name, std::size_t count,
                                    std::string* last_word = nullptr) {
    const auto open = text.find('(');
    if (open == std::string::npos || text.back() != ')') throw ConfigurationError("bad profile '" + text + "'");
    auto parts = split(text.substr(open + 1, text.size() - open - 2), ',');
    if (parts.size() != count) {
        throw ConfigurationError(name + " takes " + std::to_string(count) + " arguments");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (last_word && i + 1 == parts.size()) {
            *last_word = parts[i];
        } else {
            out.push_back(parse_real(parts[i]));
        }
    }
    return out;
}

}  // namespace

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_snapshot_csv(std::ostream& out, double t, const LatticeConfiguration& cfg) {
    out << "t,x_index,sigma,count\n";
    const std::string ts = format_real(t);
    for (std::size_t x = 0; x < cfg.n_sites(); ++x) {
        for (Spin s : kSpins) out << ts << ',' << x << ',' << sign(s) << ',' << cfg.count(x, s) << '\n';
    }
}

void write_series_csv(std::ostream& out, const std::vector<double>& times, const std::vector<double>& values) {
    if (times.size() != values.size()) throw ConfigurationError("series length mismatch");
    out << "t,m\n";
    for (std::size_t k = 0; k < times.size(); ++k) out << format_real(times[k]) << ',' << format_real(values[k]) << '\n';
}

void write_trajectory_csv(std::ostream& out, const DensityTrajectory& traj) {
    out << "t,x_index,sigma,value\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const std::string ts = format_real(traj.time(k));
        for (std::size_t x = 0; x < traj.grid_size(); ++x) {
            for (Spin s : kSpins) out << ts << ',' << x << ',' << sign(s) << ',' << format_real(traj[k](x, s)) << '\n';
        }
    }
}

DensityTrajectory read_trajectory_csv(std::istream& in) {
    const auto rows = read_rows(in, true);
    std::map<double, std::vector<Row>> by_time;
    std::size_t grid = 0;
    for (const auto& r : rows) {
        by_time[r.t].push_back(r);
        grid = std::max(grid, r.x + 1);
    }
    std::vector<double> times;
    std::vector<DensityField> slices;
    for (const auto& [t, slice_rows] : by_time) {
        times.push_back(t);
        slices.push_back(field_from_rows(slice_rows, grid));
    }
    if (times.front() != 0.0) throw ConfigurationError("trajectory must start at t = 0");
    const double dt = times.size() > 1 ? times[1] - times[0] : 0.0;
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (std::abs(times[k] - dt * static_cast<double>(k)) > 1e-9 * std::max(1.0, times[k])) {
            throw ConfigurationError("trajectory times are not uniform");
        }
    }
    return DensityTrajectory(dt, std::move(slices));
}

DensityTrajectory read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot open " + path.string());
    return read_trajectory_csv(in);
}

DensityField read_density_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot open " + path.string());
    std::string header;
    std::getline(in, header);
    in.seekg(0);
    if (trim(header).rfind("t,", 0) == 0) return read_trajectory_csv(in).front();
    const auto rows = read_rows(in, false);
    std::size_t grid = 0;
    for (const auto& r : rows) grid = std::max(grid, r.x + 1);
    return field_from_rows(rows, grid);
}

bool is_named_profile(const std::string& text) {
    const auto t = trim(text);
    return t.rfind("uniform(", 0) == 0 || t.rfind("sine(", 0) == 0;
}

DensityField::Profile parse_profile(const std::string& raw) {
    const auto text = trim(raw);
    if (text.rfind("uniform(", 0) == 0) {
        const auto a = parse_arguments(text, "uniform", 2);
        if (a[0] < 0.0 || a[1] < 0.0) throw ConfigurationError("densities must be non-negative");
        return [plus = a[0], minus = a[1]](double, Spin s) { return s == Spin::plus ? plus : minus; };
    }
    if (text.rfind("sine(", 0) == 0) {
        std::string which;
        const auto a = parse_arguments(text, "sine", 3, &which);
        const Spin target = parse_spin(which);
        if (a[0] - std::abs(a[1]) < 0.0) throw ConfigurationError("sine profile would be negative");
        return [mean = a[0], amp = a[1], target](double x, Spin s) {
            return s == target ? mean + amp * std::sin(2.0 * std::numbers::pi * x) : mean;
        };
    }
    throw ConfigurationError("unknown profile '" + text + "'");
}

nlohmann::json load_json_argument(const std::string& arg) {
    const auto text = trim(arg);
    try {
        if (!text.empty() && text.front() == '{') return nlohmann::json::parse(text);
        std::ifstream in(text);
        if (!in) throw ConfigurationError("cannot open " + text);
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigurationError("invalid JSON in " + text + ": " + e.what());
    }
}

}  // namespace rtp::io
