/*
   Copyright 2026 The wedge-intensity Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Plain CSV: comma separated, '\n' line endings, no quoting (fields are
// numbers and identifiers). Doubles are written with 17 significant digits so
// they round-trip exactly; a missing value is an empty field.

namespace wedge::csv {

inline std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string number(const std::optional<double>& v) { return v ? number(*v) : std::string(); }

class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> row) {
        if (row.size() != header_.size())
            throw std::logic_error("csv row has " + std::to_string(row.size()) + " fields, header has " +
                                   std::to_string(header_.size()));
        for (const auto& f : row)
            if (f.find_first_of(",\n") != std::string::npos)
                throw std::logic_error("csv field needs quoting: " + f);
        rows_.push_back(std::move(row));
    }

    std::size_t size() const { return rows_.size(); }

    std::string str() const {
        std::string out;
        append_line(out, header_);
        for (const auto& r : rows_)
            append_line(out, r);
        return out;
    }

private:
    static void append_line(std::string& out, const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i)
                out += ',';
            out += fields[i];
        }
        out += '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct Parsed {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return i;
        throw std::out_of_range("no csv column named " + name);
    }

    std::optional<double> value(std::size_t row, const std::string& name) const {
        const std::string& f = rows.at(row).at(column(name));
        if (f.empty())
            return std::nullopt;
        return std::stod(f);
    }
};

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ','))
        out.push_back(field);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

inline Parsed parse(const std::string& text) {
    Parsed p;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        auto fields = split_line(line);
        if (first) {
            p.header = std::move(fields);
            first = false;
            continue;
        }
        if (fields.size() != p.header.size())
            throw std::runtime_error("csv line with " + std::to_string(fields.size()) + " fields: " + line);
        p.rows.push_back(std::move(fields));
    }
    return p;
}

}  // namespace wedge::csv
