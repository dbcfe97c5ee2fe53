#include "lastmile/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "lastmile/errors.hpp"

namespace lastmile::csv {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

Writer::Writer(std::vector<std::string> header) : columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ += ',';
        out_ += header[i];
    }
    out_ += '\n';
}

Writer& Writer::cell(const std::string& value) {
    if (in_row_) out_ += ',';
    out_ += value;
    ++in_row_;
    return *this;
}

Writer& Writer::cell(double value) { return cell(format_double(value)); }
Writer& Writer::cell(int value) { return cell(std::to_string(value)); }
Writer& Writer::cell(long long value) { return cell(std::to_string(value)); }

void Writer::end_row() {
    if (in_row_ != columns_)
        throw std::logic_error("csv row does not match the header width");
    out_ += '\n';
    in_row_ = 0;
}

void Writer::write_file(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << out_;
}

Table read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open csv file: " + path);
    Table table;
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (line.back() == ',') fields.push_back("");
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) throw ConfigError("csv file is empty: " + path);
    return table;
}

double parse_double(const std::string& text, const std::string& context) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{})
        throw ConfigError("cannot parse number '" + text + "' in " + context);
    for (const char* p = res.ptr; p != end; ++p)
        if (*p != ' ' && *p != '\t')
            throw ConfigError("trailing characters in number '" + text + "' in " + context);
    return value;
}

}  // namespace lastmile::csv
