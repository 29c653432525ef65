#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pseudoscope/experiments.hpp"
#include "pseudoscope/tails.hpp"

namespace pseudoscope::io {

// Version tag written into every JSON document.
inline constexpr std::string_view kReportSchema = "pseudoscope.report/1";
inline constexpr std::string_view kScalingSchema = "pseudoscope.scaling/1";
inline constexpr std::string_view kTailsSchema = "pseudoscope.tails/1";
inline constexpr std::string_view kManifestSchema = "pseudoscope.manifest/1";

// RFC 4180 field: quoted (with doubled quotes) when it holds a comma, quote,
// CR or LF.
std::string csv_field(std::string_view value);
// Splits one CSV record (without its line break) into fields.
std::vector<std::string> parse_csv_record(std::string_view record);

// eigenvalues.csv: trial,index,re,im for every completed trial, CRLF line
// breaks, shortest round-trip numbers.
void write_eigenvalues_csv(std::ostream& out, const ConcentrationReport& report);

struct EigenvalueRow {
    std::size_t trial = 0;
    std::size_t index = 0;
    Complex value{};
};

// Parses eigenvalues.csv back; throws InvalidArgument on a malformed file.
std::vector<EigenvalueRow> read_eigenvalues_csv(std::istream& in);

// trials.csv: one row per trial with its classification and error text.
void write_trials_csv(std::ostream& out, const ConcentrationReport& report);

// Resolved experiment configuration as a JSON object.
std::string config_json(const ExperimentConfig& cfg);

// report.json: config echo, statistics and the per-trial CSV pointer.
std::string report_json(const ConcentrationReport& report, const std::string& eigenvalues_file);

// scatter.svg: one <circle> per eigenvalue and the region overlay as <path>
// elements, axes auto-fit with a 10% margin.
std::string scatter_svg(const ConcentrationReport& report);

// scaling.csv (d, median_deviation, q90_deviation), scaling.json and a log-log
// scaling.svg with the fitted line.
void write_scaling_csv(std::ostream& out, const ScalingFit& fit);
std::string scaling_json(const ScalingFit& fit, const Structure& structure, double eps, std::size_t trials,
                         std::uint64_t seed);
std::string scaling_svg(const ScalingFit& fit);

// tails.csv: one row per table row, with the table verdict repeated.
void write_tails_csv(std::ostream& out, const TailTable& table);
std::string tails_json(const TailTable& table);

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

struct ManifestArtifact {
    std::string file;
    std::string sha256;
    std::uintmax_t bytes = 0;
};

// Writes manifest.json in `dir` listing every file with its checksum.
// `config_echo` is a JSON document (the resolved configuration).
void write_manifest(const std::filesystem::path& dir, const std::string& command, const std::string& config_path,
                    const std::string& config_echo, const std::vector<std::string>& files);

// Files whose checksum or size no longer matches manifest.json (or that are
// missing); empty when the directory verifies.
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

// Writes `contents` to dir/name in binary mode; throws Error on failure.
void write_file(const std::filesystem::path& dir, const std::string& name, std::string_view contents);

}  // namespace pseudoscope::io
