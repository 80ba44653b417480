#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace msfem {

/// Six significant digits; scientific notation below 1e-3 (and from 1e6 up).
std::string format_number(double value);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<std::string> cells);
    /// Convenience for all-numeric rows.
    void add_numbers(const std::vector<double>& values);

    std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Cell field as an n x n grid, top row first so the file reads like the domain.
void write_cell_grid(const std::filesystem::path& path, int n, const Eigen::VectorXd& values);

} // namespace msfem
