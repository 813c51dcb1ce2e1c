#ifndef SUPOU_CSV_HPP
#define SUPOU_CSV_HPP

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace supou {

// Deterministic CSV output: UTF-8, comma separated, '.' decimal, LF endings,
// mandatory header row. Doubles use %.17g so identical values give identical
// bytes.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path, const std::vector<std::string>& header)
        : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out_ << ',';
            out_ << header[i];
        }
        out_ << '\n';
        columns_ = header.size();
    }

    class Row {
    public:
        explicit Row(CsvWriter& w) : w_(w) {}
        Row& operator<<(double v) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return push(buf);
        }
        Row& operator<<(std::int64_t v) { return push(std::to_string(v)); }
        Row& operator<<(int v) { return push(std::to_string(v)); }
        Row& operator<<(std::uint64_t v) { return push(std::to_string(v)); }
        Row& operator<<(const std::string& v) { return push(v); }
        Row& operator<<(const char* v) { return push(v); }
        ~Row() { w_.end_row(fields_); }
        Row(const Row&) = delete;
        Row& operator=(const Row&) = delete;

    private:
        Row& push(const std::string& s) {
            fields_.push_back(s);
            return *this;
        }
        CsvWriter& w_;
        std::vector<std::string> fields_;
    };

    Row row() { return Row(*this); }

    void close() { out_.close(); }

private:
    friend class Row;
    void end_row(const std::vector<std::string>& fields) {
        if (fields.size() != columns_)
            throw std::logic_error("CsvWriter: row width does not match header");
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
    }
    std::ofstream out_;
    std::size_t columns_ = 0;
};

// minimal reader for regression fixtures: header + comma-split rows
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (line.back() == ',') fields.push_back("");
        if (first) {
            table.header = fields;
            first = false;
        } else {
            table.rows.push_back(fields);
        }
    }
    return table;
}

} // namespace supou

#endif // SUPOU_CSV_HPP
