#include "etsim/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace etsim::csv {

Writer::Writer(std::vector<std::string> header) : columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_.push_back(',');
        out_ += header[i];
    }
    out_.push_back('\n');
}

std::string Writer::format(Real v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void Writer::row(const std::vector<Real>& values) {
    if (values.size() != columns_) throw std::invalid_argument("csv row width mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out_.push_back(',');
        out_ += format(values[i]);
    }
    out_.push_back('\n');
}

void Writer::raw_row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw std::invalid_argument("csv row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_.push_back(',');
        out_ += cells[i];
    }
    out_.push_back('\n');
}

void Writer::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << out_;
}

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw std::out_of_range("csv column not found: " + name);
}

Table parse(const std::string& text) {
    Table t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != t.header.size())
                throw std::runtime_error("csv parse: ragged row");
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

Table load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

}  // namespace etsim::csv
