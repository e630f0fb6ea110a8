#include "molfield/io.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <system_error>

namespace molfield {
namespace io {

std::string format_double(double value) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    if (res.ec != std::errc()) throw std::runtime_error("number formatting failed");
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::string& path) : out_(nullptr) {
    if (path.empty() || path == "-") {
        out_ = &std::cout;
        return;
    }
    file_.open(path);
    if (!file_) throw std::runtime_error("cannot open output file: " + path);
    out_ = &file_;
}

void CsvWriter::metadata(const std::string& line) { *out_ << line << "\n"; }

void CsvWriter::header(const std::vector<std::string>& columns) { row(columns); }

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) *out_ << ",";
        *out_ << cells[i];
    }
    *out_ << "\n";
}

void CsvWriter::numeric_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    row(cells);
}

}  // namespace io
}  // namespace molfield
