#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "common/error.hpp"

namespace advkit::io {

// Minimal CSV emitter for logs and reports: header row on construction, then
// one row per call. Numbers are printed with enough digits to round-trip.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        require(out_.good(), ErrorCode::io, "cannot open for write: " + path);
        write_row(header);
    }

    void write_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
        out_.flush();
    }

    static std::string num(double v) {
        std::ostringstream os;
        os.precision(12);
        os << v;
        return os.str();
    }

private:
    std::ofstream out_;
};

}  // namespace advkit::io
