// csv.hpp: CSV exports. Every file is written to a temporary sibling and
// renamed into place; numbers use the shortest round-trip representation so
// that identical runs give byte-identical files.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qdstirap/correlators.hpp"

namespace qdstirap {

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(const std::vector<double>& values);
    std::size_t rows() const { return rows_; }
    const std::string& text() const { return text_; }

private:
    std::size_t columns_;
    std::size_t rows_ = 0;
    std::string text_;
};

/// Writes `content` to `path` atomically (temporary file + rename). Creates
/// parent directories. Throws IoError on failure.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string format_number(double x);

CsvTable trajectory_table(const Trajectory& trajectory, const Basis& basis);
CsvTable emission_table(const Trajectory& trajectory);
CsvTable correlation_table(const CorrelationGrid& grid);
CsvTable spectrum_table(const Spectrum& spectrum);
CsvTable eigenenergy_table(const std::vector<double>& t, const std::vector<std::vector<double>>& rows);

/// Bath tables: {T, <B>, delta_P} over temperatures, {tau, Re G_g, Im G_g}
/// and {omega, Re Gamma_g, Re Gamma_u} for one bath.
CsvTable bath_temperature_table(double alpha, double omega_b, const std::vector<double>& temperatures);
CsvTable green_function_table(const PhononBath& bath, int stride = 1);
CsvTable spectral_kernel_table(const PhononBath& bath, const std::vector<double>& omega);

} // namespace qdstirap
