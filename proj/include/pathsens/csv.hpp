#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>

#include "pathsens/errors.hpp"

namespace pathsens {

// CSV writer with a provenance comment header. Numeric formatting is fixed
// (%.10g) so identical runs produce byte-identical files.
class CsvWriter {
public:
    CsvWriter(const std::string& path, std::uint64_t config_hash, const std::string& extra = "") {
        out_.open(path);
        if (!out_) throw ConfigError("cannot open output file '" + path + "'");
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(config_hash));
        out_ << "# config_hash=" << buf;
        if (!extra.empty()) out_ << " " << extra;
        out_ << "\n";
    }

    void comment(const std::string& text) { out_ << "# " << text << "\n"; }

    void header(const std::string& line) { out_ << line << "\n"; }

    CsvWriter& field(const std::string& s) {
        sep();
        out_ << s;
        return *this;
    }
    CsvWriter& field(double v) {
        sep();
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.10g", v);
        out_ << buf;
        return *this;
    }
    CsvWriter& field(std::int64_t v) {
        sep();
        out_ << v;
        return *this;
    }
    void endrow() {
        out_ << "\n";
        first_ = true;
    }

private:
    void sep() {
        if (!first_) out_ << ",";
        first_ = false;
    }
    std::ofstream out_;
    bool first_ = true;
};

} // namespace pathsens
