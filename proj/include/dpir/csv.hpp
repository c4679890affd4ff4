#pragma once
/// Deterministic CSV output: one header row, comma separators, '.' decimal
/// point, '\n' line endings, doubles printed with %.17g so that re-reading
/// reproduces the exact binary value.  No quoting is implemented because no
/// emitted cell ever contains a comma, quote, or newline.

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpir {

inline std::string csv_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string csv_number(long long x) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%lld", x);
    return buf;
}

inline std::string csv_number(int x) { return csv_number(static_cast<long long>(x)); }

/// In-memory table with a fixed column count, saved in one shot.
class CsvTable {
  public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
        if (header_.empty()) throw std::invalid_argument("CsvTable: header must be non-empty");
    }

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != header_.size())
            throw std::invalid_argument("CsvTable: row width does not match header");
        rows_.push_back(std::move(cells));
    }

    std::string to_string() const {
        std::string out;
        append_line(out, header_);
        for (const auto& row : rows_) append_line(out, row);
        return out;
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("CsvTable: cannot open '" + path + "' for writing");
        const std::string body = to_string();
        out.write(body.data(), static_cast<std::streamsize>(body.size()));
        if (!out) throw std::runtime_error("CsvTable: failed writing '" + path + "'");
    }

    std::size_t row_count() const { return rows_.size(); }

  private:
    static void append_line(std::string& out, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace dpir
