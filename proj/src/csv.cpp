#include "qdstirap/csv.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unistd.h>

#include <fmt/format.h>

namespace qdstirap {

std::string format_number(double x) { return fmt::format("{}", x); }

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (k) text_ += ',';
        text_ += header[k];
    }
    text_ += '\n';
}

void CsvTable::add_row(const std::vector<double>& values) {
    if (values.size() != columns_) throw std::invalid_argument("CsvTable: row width does not match header");
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k) text_ += ',';
        text_ += format_number(values[k]);
    }
    text_ += '\n';
    ++rows_;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError(fmt::format("cannot create {}: {}", path.parent_path().string(), ec.message()));
    }
    const fs::path tmp = path.string() + fmt::format(".tmp{}", static_cast<long>(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(fmt::format("cannot open {} for writing", tmp.string()));
        out << content;
        out.flush();
        if (!out) throw IoError(fmt::format("write to {} failed", tmp.string()));
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError(fmt::format("cannot move {} into place: {}", path.string(), ec.message()));
    }
}

CsvTable trajectory_table(const Trajectory& trajectory, const Basis& basis) {
    CsvTable table({"t", "rho_X", "rho_Y", "rho_XX", "n_cav", "P_e"});
    for (std::size_t k = 0; k < trajectory.t.size(); ++k) {
        table.add_row({trajectory.t[k], trajectory.population(basis, QdLevel::X, k),
                       trajectory.population(basis, QdLevel::Y, k), trajectory.population(basis, QdLevel::XX, k),
                       trajectory.photons(basis, k), trajectory.emitted[k]});
    }
    return table;
}

CsvTable emission_table(const Trajectory& trajectory) {
    CsvTable table({"t", "P_e"});
    for (std::size_t k = 0; k < trajectory.t.size(); ++k) table.add_row({trajectory.t[k], trajectory.emitted[k]});
    return table;
}

CsvTable correlation_table(const CorrelationGrid& grid) {
    CsvTable table({"t", "tau", "Re_g1", "Im_g1", "g2"});
    const double h = grid.step();
    for (int i = 0; i < grid.points(); ++i) {
        for (int j = 0; j < grid.row_length(i); ++j) {
            const cd g1 = grid.g1(i, j);
            table.add_row({i * h, j * h, g1.real(), g1.imag(), grid.has_g2() ? grid.g2(i, j) : 0.0});
        }
    }
    return table;
}

CsvTable spectrum_table(const Spectrum& spectrum) {
    CsvTable table({"omega", "S_c"});
    for (std::size_t k = 0; k < spectrum.omega.size(); ++k) table.add_row({spectrum.omega[k], spectrum.value[k]});
    return table;
}

CsvTable eigenenergy_table(const std::vector<double>& t, const std::vector<std::vector<double>>& rows) {
    const std::size_t d = rows.empty() ? 0 : rows.front().size();
    std::vector<std::string> header{"t"};
    for (std::size_t c = 0; c < d; ++c) header.push_back(fmt::format("lambda_{}", c + 1));
    CsvTable table(header);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        std::vector<double> row{t[k]};
        row.insert(row.end(), rows[k].begin(), rows[k].end());
        table.add_row(row);
    }
    return table;
}

CsvTable bath_temperature_table(double alpha, double omega_b, const std::vector<double>& temperatures) {
    CsvTable table({"T", "B", "delta_P"});
    const double shift = polaron_shift_closed_form(alpha, omega_b);
    for (double temp : temperatures) {
        const double b = std::exp(-0.5 * phi0_quadrature(alpha, omega_b, temp));
        table.add_row({temp, b, shift});
    }
    return table;
}

CsvTable green_function_table(const PhononBath& bath, int stride) {
    if (stride < 1) throw std::invalid_argument("green_function_table: stride must be >= 1");
    CsvTable table({"tau", "Re_G_g", "Im_G_g"});
    const auto& tau = bath.tau_grid();
    const auto& gg = bath.gg_table();
    for (std::size_t k = 0; k < tau.size(); k += static_cast<std::size_t>(stride)) {
        table.add_row({tau[k], gg[k].real(), gg[k].imag()});
    }
    return table;
}

CsvTable spectral_kernel_table(const PhononBath& bath, const std::vector<double>& omega) {
    CsvTable table({"omega", "Re_Gamma_g", "Re_Gamma_u"});
    for (double w : omega) {
        table.add_row({w, bath.gamma(Channel::G, w).real(), bath.gamma(Channel::U, w).real()});
    }
    return table;
}

} // namespace qdstirap
