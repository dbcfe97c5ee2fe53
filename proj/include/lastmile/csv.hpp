#pragma once

#include <string>
#include <vector>

namespace lastmile::csv {

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

// Minimal CSV writer: header row mandatory, LF line endings, numbers at
// full round-trip precision.
class Writer {
public:
    explicit Writer(std::vector<std::string> header);
    Writer& cell(const std::string& value);
    Writer& cell(double value);
    Writer& cell(int value);
    Writer& cell(long long value);
    void end_row();
    const std::string& str() const { return out_; }
    void write_file(const std::string& path) const;

private:
    std::size_t columns_;
    std::size_t in_row_ = 0;
    std::string out_;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Reads a whole CSV file (no quoting or embedded commas; the formats this
// project defines never need them).
Table read_file(const std::string& path);

double parse_double(const std::string& text, const std::string& context);

}  // namespace lastmile::csv
