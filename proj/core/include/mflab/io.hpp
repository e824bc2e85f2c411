#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mflab/grid.hpp"
#include "mflab/modulated_energy.hpp"
#include "mflab/particles.hpp"

namespace mflab {

// Shortest decimal that reads back to the same double.
std::string format_double(double v);

// Files start with "# key=value" comment lines; the hash line is always first.
struct FileMetadata
{
    std::string config_hash;
    std::optional<double> t;
    std::optional<std::uint64_t> seed;
};

// index,x1..xd[,v1..vd]
void write_particles_csv(std::ostream& out, const ParticleSystem& sys, const FileMetadata& meta);
void write_particles_csv(const std::filesystem::path& path, const ParticleSystem& sys, const FileMetadata& meta);
ParticleSystem read_particles_csv(std::istream& in, FileMetadata* meta = nullptr);
ParticleSystem read_particles_csv(const std::filesystem::path& path, FileMetadata* meta = nullptr);

extern const char* const diagnostics_header;

// Writes the hash line and header; rows follow with write_diagnostics_row.
void write_diagnostics_header(std::ostream& out, const std::string& config_hash);
void write_diagnostics_row(std::ostream& out, const DiagnosticsRecord& r);
void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& rows,
                           const std::string& config_hash);
// Throws SchemaError carrying the 1-based line of the first malformed line.
std::vector<DiagnosticsRecord> read_diagnostics_csv(std::istream& in, std::string* config_hash = nullptr);
std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::filesystem::path& path,
                                                    std::string* config_hash = nullptr);

// Little-endian float64 cell values at `stem`.bin with a JSON sidecar at
// `stem`.json holding d, n, box, time and the config hash.
void write_grid(const std::filesystem::path& stem, const MeasureGrid& mu, const std::string& config_hash);
MeasureGrid read_grid(const std::filesystem::path& stem, std::string* config_hash = nullptr);

// Shell averages about the origin: r,density,cumulative_mass with bins one cell wide.
void write_radial_csv(const std::filesystem::path& path, const MeasureGrid& mu, const std::string& config_hash);

// Generic table with a hash line; every row must match the header width.
void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows, const std::string& config_hash);

void append_jsonl(const std::filesystem::path& path, const nlohmann::json& record);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

} // namespace mflab
