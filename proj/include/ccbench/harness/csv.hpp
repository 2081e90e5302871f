#pragma once

// Minimal CSV writing and reading for the result files. Fields never contain
// commas, quotes or newlines (labels are generated internally), so no quoting
// is needed. Numbers go through std::to_chars and are locale independent.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "ccbench/harness/config.hpp"

namespace ccbench::harness {

class csv_writer {
public:
    explicit csv_writer(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary)
    {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
    }

    csv_writer& field(const std::string& s)
    {
        if (!first_) out_ << ',';
        out_ << s;
        first_ = false;
        return *this;
    }
    csv_writer& field(double v) { return field(format_number(v)); }
    csv_writer& field(const char* s) { return field(std::string(s)); }
    template <class I>
        requires std::is_integral_v<I>
    csv_writer& field(I v)
    {
        return field(std::to_string(v));
    }

    void row(const std::vector<std::string>& fields)
    {
        for (const auto& f : fields) field(f);
        end_row();
    }
    void end_row()
    {
        out_ << '\n';
        first_ = true;
    }
    void close()
    {
        out_.close();
        if (!out_) throw std::runtime_error("error writing " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    bool first_ = true;
};

struct csv_table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws when absent.
    std::size_t column(const std::string& name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw std::runtime_error("csv column '" + name + "' not found");
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline csv_table read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    csv_table t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path.string());
    t.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto r = split_csv_line(line);
        if (r.size() != t.header.size())
            throw std::runtime_error("ragged csv row in " + path.string());
        t.rows.push_back(std::move(r));
    }
    return t;
}

} // namespace ccbench::harness
