#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "flowgauge/flow.hpp"

namespace flowgauge {

/// On-disk flow formats. Both accept a trailing `.gz` for gzip.
///
/// flowrec-v1 CSV: header `id,label,ts_ms,src_key,dst_key,sizes,dirs,ipts`,
/// sequence cells `|`-separated. JSONL: one object per line with the same
/// field names, sequences as arrays.
enum class Format { Csv, Jsonl };

std::string_view to_string(Format format);
Format format_from_string(std::string_view text);
/// Guesses the format from the file name (`.jsonl`/`.jsonl.gz` -> Jsonl).
Format format_from_path(const std::filesystem::path& path);

struct IngestReport {
  std::size_t n_rows_read = 0;
  std::size_t n_accepted = 0;
  std::size_t n_rejected = 0;
  std::map<std::string, std::size_t> rejection_reasons;
  /// Accepted rows that were normalized: "ipt0_fixed", "truncated".
  std::map<std::string, std::size_t> repairs;
  std::map<std::string, std::size_t> label_histogram;
  std::map<std::size_t, std::size_t> length_histogram;

  bool operator==(const IngestReport&) const = default;
};

struct LoadedDataset {
  Dataset dataset;
  IngestReport report;
};

/// Loads and validates a dataset. Rows violating structural invariants are
/// rejected with a reason ("malformed", "ragged", "empty", "bad_ts",
/// "bad_size", "bad_dir", "bad_ipt", "duplicate_id"); a nonzero first IPT is
/// reset to 0 and sequences longer than kCaptureCap are truncated.
/// Throws DataError when the file cannot be read or has a bad header.
LoadedDataset load_dataset(const std::filesystem::path& path, Format format,
                           std::string name = {});
LoadedDataset load_dataset(const std::filesystem::path& path);

/// Parses an in-memory document (no decompression).
LoadedDataset parse_dataset(std::string_view text, Format format, std::string name);

void write_dataset(const std::filesystem::path& path, const Dataset& ds, Format format);
std::string format_dataset(const Dataset& ds, Format format);

IngestReport summarize(const Dataset& ds);

/// Dataset name derived from a path: file name minus `.gz` and format suffix.
std::string dataset_name_from_path(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const IngestReport& report);

/// Whole-file read/write with transparent gzip when the name ends in `.gz`.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_real(double value);

}  // namespace flowgauge
