#include "msfem/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "msfem/error.hpp"

namespace msfem {

std::string format_number(double value)
{
    if (std::isnan(value))
        return "nan";
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    if (value == 0.0)
        return "0";
    char buf[32];
    const double mag = std::abs(value);
    if (mag < 1e-3 || mag >= 1e6)
        std::snprintf(buf, sizeof buf, "%.5e", value);
    else
        std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells)
{
    if (cells.size() != header_.size())
        throw ConfigError("csv row has " + std::to_string(cells.size()) + " cells, header has " +
                          std::to_string(header_.size()));
    rows_.push_back(std::move(cells));
}

void CsvTable::add_numbers(const std::vector<double>& values)
{
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values)
        cells.push_back(format_number(v));
    add_row(std::move(cells));
}

std::string CsvTable::str() const
{
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k)
            out << (k ? "," : "") << cells[k];
        out << '\n';
    };
    line(header_);
    for (const auto& row : rows_)
        line(row);
    return out.str();
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out)
        throw IoError("short write to '" + path.string() + "'");
}

} // namespace

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

void write_cell_grid(const std::filesystem::path& path, int n, const Eigen::VectorXd& values)
{
    std::ostringstream out;
    for (int j = n - 1; j >= 0; --j) {
        for (int i = 0; i < n; ++i)
            out << (i ? "," : "") << format_number(values[j * n + i]);
        out << '\n';
    }
    write_text(path, out.str());
}

} // namespace msfem
