// SPDX-License-Identifier: Apache-2.0

#include "eegpipe/core/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace eegpipe::core {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError("bad numeric field '" + s + "' in " + where);
    return v;
}

}  // namespace

void write_recording_csv(const Recording& rec, const std::filesystem::path& csv_path) {
    std::FILE* f = std::fopen(csv_path.string().c_str(), "w");
    if (!f) throw ParseError("cannot open " + csv_path.string() + " for writing");
    std::fputs("time", f);
    for (const auto& l : rec.labels) std::fprintf(f, ",%s", l.name.c_str());
    std::fputc('\n', f);
    for (long t = 0; t < rec.length(); ++t) {
        std::fprintf(f, "%.17g", static_cast<double>(t) / rec.rate);
        for (long c = 0; c < rec.channels(); ++c) std::fprintf(f, ",%.17g", rec.samples(c, t));
        std::fputc('\n', f);
    }
    std::fclose(f);
}

void write_markers(const Recording& rec, const std::filesystem::path& markers_path) {
    std::ofstream out(markers_path);
    if (!out) throw ParseError("cannot open " + markers_path.string() + " for writing");
    for (const auto& m : rec.markers) out << m.sample_index << ',' << m.label << '\n';
}

Recording read_recording_csv(const std::filesystem::path& csv_path, double rate,
                             const std::filesystem::path& markers_path) {
    std::ifstream in(csv_path);
    if (!in) throw ParseError("cannot open " + csv_path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty recording file " + csv_path.string());

    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "time")
        throw ParseError("bad recording header in " + csv_path.string());

    Recording rec;
    rec.rate = rate;
    for (std::size_t i = 1; i < header.size(); ++i)
        rec.labels.push_back({header[i], static_cast<int>(i - 1)});

    const std::size_t channels = header.size() - 1;
    std::vector<std::vector<double>> columns(channels);
    long rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw ParseError("row " + std::to_string(rows + 2) + " of " + csv_path.string() +
                             " has " + std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(header.size()));
        for (std::size_t c = 0; c < channels; ++c)
            columns[c].push_back(parse_double(fields[c + 1], csv_path.string()));
        ++rows;
    }

    rec.samples.resize(static_cast<long>(channels), rows);
    for (std::size_t c = 0; c < channels; ++c)
        for (long t = 0; t < rows; ++t) rec.samples(static_cast<long>(c), t) = columns[c][t];

    if (!markers_path.empty() && std::filesystem::exists(markers_path)) {
        std::ifstream min(markers_path);
        while (std::getline(min, line)) {
            if (line.empty()) continue;
            const auto pos = line.find(',');
            if (pos == std::string::npos)
                throw ParseError("bad marker line '" + line + "' in " + markers_path.string());
            EventMarker m;
            m.sample_index = std::lround(parse_double(line.substr(0, pos), markers_path.string()));
            m.label = line.substr(pos + 1);
            if (!m.label.empty() && m.label.back() == '\r') m.label.pop_back();
            rec.markers.push_back(std::move(m));
        }
    }
    rec.validate();
    return rec;
}

}  // namespace eegpipe::core
