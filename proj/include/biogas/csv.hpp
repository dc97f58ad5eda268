#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "biogas/errors.hpp"

namespace biogas {

/// Line-oriented CSV writer with fixed %.12g formatting so identical runs
/// produce byte-identical files.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& header) {
        out_.open(path);
        if (!out_) {
            throw numeric_error("cannot open " + path.string() + " for writing");
        }
        out_ << header << "\n";
    }

    void row(std::initializer_list<double> values) {
        write_row(values.begin(), values.end());
    }

    void row(const std::vector<double>& values) { write_row(values.begin(), values.end()); }

    void raw(const std::string& line) { out_ << line << '\n'; }

private:
    template <typename It>
    void write_row(It begin, It end) {
        char buf[32];
        bool first = true;
        for (It it = begin; it != end; ++it) {
            std::snprintf(buf, sizeof(buf), "%.12g", *it);
            if (!first) out_ << ',';
            out_ << buf;
            first = false;
        }
        out_ << '\n';
    }

    std::ofstream out_;
};

inline std::string format_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace biogas
