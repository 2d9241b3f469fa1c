#pragma once

// Minimal CSV helpers for the flat, unquoted files this project reads and writes.

#include <charconv>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "loadrank/error.hpp"

namespace loadrank::csv {

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            out.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r' && c != '"') {
            cell.push_back(c);
        }
    }
    out.push_back(std::move(cell));
    return out;
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {
        std::string line;
        if (!std::getline(in_, line)) throw ValidationError("CSV input is empty (missing header)");
        header_ = split(line);
    }

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header_.size(); ++i) {
            if (header_[i] == name) return i;
        }
        throw ValidationError("CSV header lacks column '" + name + "'");
    }

    bool has_column(const std::string& name) const {
        for (const auto& h : header_) {
            if (h == name) return true;
        }
        return false;
    }

    const std::vector<std::string>& header() const { return header_; }

    std::optional<std::vector<std::string>> next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (line.empty() || line == "\r") continue;
            auto cells = split(line);
            if (cells.size() != header_.size()) {
                throw ValidationError("CSV line " + std::to_string(line_no_ + 1) + " has " +
                                      std::to_string(cells.size()) + " cells, header has " +
                                      std::to_string(header_.size()));
            }
            return cells;
        }
        return std::nullopt;
    }

private:
    std::istream& in_;
    std::vector<std::string> header_;
    std::size_t line_no_ = 0;
};

inline double to_double(const std::string& cell, const char* what) {
    double v = 0.0;
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    while (first != last && *first == ' ') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw ValidationError(std::string("cannot parse '") + cell + "' as a number for " + what);
    }
    return v;
}

/// Shortest round-trip representation; identical inputs give identical bytes.
inline std::string fmt(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

}  // namespace loadrank::csv
