#include "bayesdetect/io.hpp"

#include "bayesdetect/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <vector>

namespace bayesdetect::io {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view s, const std::string& where) {
    s = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw InputError(where + ": cannot parse number '" + std::string(s) + "'");
    }
    return v;
}

int parse_int(std::string_view s, const std::string& where) {
    s = trim(s);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw InputError(where + ": cannot parse integer '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

bool next_content_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        if (!trim(line).empty()) return true;
    }
    return false;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_sample_matrix(std::ostream& out, const SampleMatrix& y) {
    out << y.n_sensors() << ',' << y.n_snapshots() << '\n';
    for (int i = 0; i < y.n_sensors(); ++i) {
        for (int t = 0; t < y.n_snapshots(); ++t) {
            if (t) out << ',';
            out << format_double(y(i, t).real()) << ':' << format_double(y(i, t).imag());
        }
        out << '\n';
    }
}

void write_eigenvalues(std::ostream& out, const EigenSpectrum& x) {
    out << "eigs," << x.n_snapshots << '\n';
    for (double v : x.values) out << format_double(v) << '\n';
}

Observation read_observation(std::istream& in) {
    std::string line;
    if (!next_content_line(in, line)) throw InputError("input is empty");
    const auto header = split(trim(line), ',');
    if (header.size() != 2) throw InputError("header must have two fields: 'N,L' or 'eigs,L'");

    if (trim(header[0]) == "eigs") {
        const int l = parse_int(header[1], "header");
        std::vector<double> values;
        int row = 1;
        while (next_content_line(in, line)) {
            values.push_back(parse_double(line, "line " + std::to_string(++row)));
        }
        return make_spectrum(std::move(values), l);
    }

    const int n = parse_int(header[0], "header");
    const int l = parse_int(header[1], "header");
    if (n < 1 || l < 1) throw InputError("header sizes must be >= 1");
    std::vector<Complex> entries;
    entries.reserve(static_cast<std::size_t>(n) * l);
    for (int i = 0; i < n; ++i) {
        if (!next_content_line(in, line)) {
            throw InputError("expected " + std::to_string(n) + " rows, got " + std::to_string(i));
        }
        const auto cells = split(trim(line), ',');
        if (static_cast<int>(cells.size()) != l) {
            throw InputError("row " + std::to_string(i + 1) + " has " + std::to_string(cells.size()) +
                             " cells, expected " + std::to_string(l));
        }
        for (const auto cell : cells) {
            const auto parts = split(cell, ':');
            if (parts.size() != 2) throw InputError("cell '" + std::string(cell) + "' is not re:im");
            const std::string where = "row " + std::to_string(i + 1);
            entries.emplace_back(parse_double(parts[0], where), parse_double(parts[1], where));
        }
    }
    if (next_content_line(in, line)) throw InputError("trailing content after the last row");
    return SampleMatrix(n, l, std::move(entries));
}

Observation read_observation_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return read_observation(in);
}

EigenSpectrum to_spectrum(const Observation& obs) {
    if (const auto* y = std::get_if<SampleMatrix>(&obs)) return gram_eigenvalues(*y);
    return std::get<EigenSpectrum>(obs);
}

void write_roc_csv(std::ostream& out, const RocCurve& curve, double threshold_scale) {
    out << "threshold,far,cdr\n";
    for (const auto& p : curve.points) {
        const double t = std::isinf(p.threshold) ? p.threshold : p.threshold * threshold_scale;
        out << (std::isinf(t) ? (t > 0 ? "inf" : "-inf") : format_double(t)) << ','
            << format_double(p.far) << ',' << format_double(p.cdr) << '\n';
    }
}

}  // namespace bayesdetect::io
