#pragma once

// CSV emission: comma separators, LF line endings, numbers at 9 significant
// digits. Rows are buffered so output invariants can be checked before any
// byte is written.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace coopsense {

inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write(std::ostream& out) const {
        write_line(out, header);
        for (const auto& row : rows) write_line(out, row);
    }

  private:
    static void write_line(std::ostream& out, const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out << ',';
            out << fields[i];
        }
        out << '\n';
    }
};

}  // namespace coopsense
