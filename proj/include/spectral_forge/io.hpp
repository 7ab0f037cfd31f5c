#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "spectral_forge/analysis.hpp"
#include "spectral_forge/spectra.hpp"

namespace spectral_forge {

/// Quasi-product file: the block system plus a frequency set for the base factor.
struct QuasiProductConfig {
    QuasiProductSystem qps;
    IntVectorSet base_L;
};

/// One system per file. A triple file has keys R, B, L; a quasi-product file
/// has R1, C0, G1, base_digits, digit_table, fiber_lattice and base_L.
using SystemConfig = std::variant<IntTriple, QuasiProductConfig>;

/// Missing or unreadable files and malformed JSON raise Parse errors.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

SystemConfig parse_system(const std::string& json_text);
SystemConfig load_system(const std::filesystem::path& path);
IntTriple load_triple(const std::filesystem::path& path);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Header row, comma separated, LF line endings.
std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

std::string format_vector(const BigVec& v);
std::vector<std::string> numbered(const std::string& stem, std::size_t d);

/// level, m, lambda_i, source_i, translate_i, certificate.
CsvTable spectrum_table(const SpectrumLevels& spec);
/// point_i, assembled_i, shell, copy.
CsvTable sparse_table(const SparseProductResult& result);

/// Points read back from a spectrum or sparse-product CSV. Level and m are
/// filled only when the file carries those columns.
struct LoadedSpectrum {
    PointSet points;
    std::vector<unsigned> levels;
    std::vector<unsigned> m;
};

LoadedSpectrum parse_spectrum_csv(const std::string& text);
LoadedSpectrum load_spectrum_csv(const std::filesystem::path& path);

/// xi_i, re, im, abs, depth, tail_bound.
CsvTable ft_table(const std::vector<Frequency>& xis, const std::vector<FTValue>& values);
/// h, sup_count, center_i, density, estimate.
CsvTable density_table(const DimensionEstimate& est, std::size_t d);
/// xi_i, K, S_K.
CsvTable jp_table(const std::vector<JPProfile>& profiles);
/// lambda_i, lambda_prime_i, abs_ft.
CsvTable gram_csv(const PointSet& points, const std::vector<GramEntry>& entries);

}  // namespace spectral_forge
