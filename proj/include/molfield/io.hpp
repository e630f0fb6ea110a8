#ifndef MOLFIELD_IO_HPP
#define MOLFIELD_IO_HPP

#include <fstream>
#include <ostream>
#include <string>
#include <vector>

// CSV output: one "# ..." metadata line, a header, then rows. Numbers are
// printed with shortest round-trip formatting, independent of locale.
namespace molfield {
namespace io {

std::string format_double(double value);

class CsvWriter {
public:
    // An empty path or "-" writes to stdout.
    explicit CsvWriter(const std::string& path);

    void metadata(const std::string& line);  // written verbatim; callers include the '#'
    void header(const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& cells);
    void numeric_row(const std::vector<double>& values);

private:
    std::ofstream file_;
    std::ostream* out_;
};

}  // namespace io
}  // namespace molfield

#endif
