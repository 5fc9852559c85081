#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracperc {

// Shortest round-trip decimal form; deterministic across runs.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Flat "key = value" records with '#' comment lines, the text format used
// by reports and witness files.
class KvWriter {
public:
    KvWriter& comment(const std::string& text) {
        body_ += "# " + text + "\n";
        return *this;
    }
    KvWriter& put(const std::string& key, const std::string& value) {
        body_ += key + " = " + value + "\n";
        return *this;
    }
    KvWriter& put(const std::string& key, double value) { return put(key, fmt_double(value)); }
    KvWriter& put(const std::string& key, std::size_t value) { return put(key, std::to_string(value)); }
    KvWriter& put(const std::string& key, int value) { return put(key, std::to_string(value)); }
    KvWriter& put(const std::string& key, bool value) { return put(key, std::string(value ? "true" : "false")); }
    KvWriter& blank() {
        body_ += "\n";
        return *this;
    }

    const std::string& str() const { return body_; }

    void save(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + path);
        os << body_;
    }

private:
    std::string body_;
};

// Comma-separated tables with '#' header comments.
class CsvWriter {
public:
    CsvWriter& comment(const std::string& text) {
        body_ += "# " + text + "\n";
        return *this;
    }
    CsvWriter& header(const std::vector<std::string>& cols) { return raw_row(cols); }
    CsvWriter& row(const std::vector<std::string>& cols) { return raw_row(cols); }

    const std::string& str() const { return body_; }

    void save(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + path);
        os << body_;
    }

private:
    CsvWriter& raw_row(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) body_ += ",";
            body_ += cols[i];
        }
        body_ += "\n";
        return *this;
    }
    std::string body_;
};

}  // namespace fracperc
