#include "flowgauge/ingest.hpp"

#include <zlib.h>

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "flowgauge/csv.hpp"
#include "flowgauge/error.hpp"

namespace flowgauge {

namespace {

constexpr std::string_view kCsvHeader = "id,label,ts_ms,src_key,dst_key,sizes,dirs,ipts";
constexpr std::array<std::string_view, 8> kColumns = {"id",      "label", "ts_ms", "src_key",
                                                      "dst_key", "sizes", "dirs",  "ipts"};

bool has_gz_suffix(const std::filesystem::path& path) { return path.extension() == ".gz"; }

template <typename T>
bool parse_number(std::string_view text, T& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

template <typename T>
bool parse_sequence(std::string_view cell, std::vector<T>& out) {
  out.clear();
  if (cell.empty()) return true;
  for (;;) {
    auto bar = cell.find('|');
    T value{};
    if (!parse_number(cell.substr(0, bar), value)) return false;
    out.push_back(value);
    if (bar == std::string_view::npos) return true;
    cell.remove_prefix(bar + 1);
  }
}

// Shared acceptance path for both formats. `flow` is nullopt for rows that
// failed to parse.
class Collector {
 public:
  void reject(const std::string& reason) {
    ++report_.n_rows_read;
    ++report_.n_rejected;
    ++report_.rejection_reasons[reason];
  }

  void offer(FlowRecord flow) {
    if (auto violation = find_violation(flow)) {
      if (*violation != "ipt0_nonzero") {
        reject(*violation);
        return;
      }
      flow.ipts.front() = 0.0;
      ++report_.repairs["ipt0_fixed"];
    }
    if (!ids_.insert(flow.id).second) {
      reject("duplicate_id");
      return;
    }
    if (flow.sizes.size() > kCaptureCap) {
      flow.sizes.resize(kCaptureCap);
      flow.dirs.resize(kCaptureCap);
      flow.ipts.resize(kCaptureCap);
      ++report_.repairs["truncated"];
    }
    for (auto& t : flow.ipts) t += 0.0;
    ++report_.n_rows_read;
    ++report_.n_accepted;
    ++report_.label_histogram[flow.label];
    ++report_.length_histogram[flow.length()];
    flows_.push_back(std::move(flow));
  }

  LoadedDataset finish(std::string name) {
    return {Dataset(std::move(name), std::move(flows_)), std::move(report_)};
  }

 private:
  IngestReport report_;
  std::vector<FlowRecord> flows_;
  std::unordered_set<std::string> ids_;
};

std::optional<FlowRecord> parse_csv_row(std::string_view line, std::vector<std::string>& fields) {
  if (!csv::split_line(line, fields) || fields.size() != kColumns.size()) return std::nullopt;
  FlowRecord flow;
  flow.id = fields[0];
  flow.label = fields[1];
  if (flow.id.empty() || !parse_number(fields[2], flow.ts_ms)) return std::nullopt;
  flow.src_key = fields[3];
  flow.dst_key = fields[4];
  if (!parse_sequence(fields[5], flow.sizes) || !parse_sequence(fields[6], flow.dirs) ||
      !parse_sequence(fields[7], flow.ipts)) {
    return std::nullopt;
  }
  return flow;
}

std::optional<FlowRecord> parse_jsonl_row(std::string_view line) {
  auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (!j.is_object()) return std::nullopt;
  try {
    FlowRecord flow;
    j.at("id").get_to(flow.id);
    j.at("label").get_to(flow.label);
    const auto& ts = j.at("ts_ms");
    if (!ts.is_number_integer()) return std::nullopt;
    ts.get_to(flow.ts_ms);
    j.at("src_key").get_to(flow.src_key);
    j.at("dst_key").get_to(flow.dst_key);
    for (const auto& v : j.at("sizes")) {
      if (!v.is_number_integer()) return std::nullopt;
      flow.sizes.push_back(v.get<std::int64_t>());
    }
    for (const auto& v : j.at("dirs")) {
      if (!v.is_number_integer()) return std::nullopt;
      flow.dirs.push_back(v.get<int>());
    }
    for (const auto& v : j.at("ipts")) {
      if (!v.is_number()) return std::nullopt;
      flow.ipts.push_back(v.get<double>());
    }
    if (flow.id.empty()) return std::nullopt;
    return flow;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

template <typename T>
std::string join_sequence(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.push_back('|');
    if constexpr (std::is_floating_point_v<T>) {
      out += format_real(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(Format format) { return format == Format::Csv ? "csv" : "jsonl"; }

Format format_from_string(std::string_view text) {
  if (text == "csv") return Format::Csv;
  if (text == "jsonl") return Format::Jsonl;
  throw UsageError("unknown format: " + std::string(text));
}

Format format_from_path(const std::filesystem::path& path) {
  auto p = path;
  if (has_gz_suffix(p)) p = p.stem();
  return p.extension() == ".jsonl" ? Format::Jsonl : Format::Csv;
}

std::string dataset_name_from_path(const std::filesystem::path& path) {
  auto p = path.filename();
  if (has_gz_suffix(p)) p = p.stem();
  if (p.extension() == ".csv" || p.extension() == ".jsonl") p = p.stem();
  return p.string();
}

std::string format_real(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
  if (has_gz_suffix(path)) {
    gzFile file = gzopen(path.c_str(), "rb");
    if (!file) throw DataError("cannot open " + path.string());
    std::string out;
    std::array<char, 1 << 16> buf{};
    int n = 0;
    while ((n = gzread(file, buf.data(), static_cast<unsigned>(buf.size()))) > 0) {
      out.append(buf.data(), static_cast<std::size_t>(n));
    }
    const bool failed = n < 0;
    gzclose(file);
    if (failed) throw DataError("corrupt gzip stream in " + path.string());
    return out;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw DataError("read failed for " + path.string());
  return std::move(ss).str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (has_gz_suffix(path)) {
    gzFile file = gzopen(path.c_str(), "wb");
    if (!file) throw DataError("cannot write " + path.string());
    const bool ok = content.empty() ||
                    gzwrite(file, content.data(), static_cast<unsigned>(content.size())) ==
                        static_cast<int>(content.size());
    gzclose(file);
    if (!ok) throw DataError("gzip write failed for " + path.string());
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

LoadedDataset parse_dataset(std::string_view text, Format format, std::string name) {
  Collector collector;
  if (format == Format::Csv) {
    bool header_seen = false;
    std::vector<std::string> fields;
    csv::for_each_line(text, [&](std::string_view line) {
      if (!header_seen) {
        if (line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
        if (line != kCsvHeader) {
          throw DataError("bad flowrec-v1 header: expected '" + std::string(kCsvHeader) + "'");
        }
        header_seen = true;
        return;
      }
      if (line.empty()) return;
      if (auto flow = parse_csv_row(line, fields)) {
        collector.offer(std::move(*flow));
      } else {
        collector.reject("malformed");
      }
    });
    if (!header_seen) throw DataError("missing flowrec-v1 header");
  } else {
    csv::for_each_line(text, [&](std::string_view line) {
      if (line.find_first_not_of(" \t") == std::string_view::npos) return;
      if (auto flow = parse_jsonl_row(line)) {
        collector.offer(std::move(*flow));
      } else {
        collector.reject("malformed");
      }
    });
  }
  return collector.finish(std::move(name));
}

LoadedDataset load_dataset(const std::filesystem::path& path, Format format, std::string name) {
  if (name.empty()) name = dataset_name_from_path(path);
  return parse_dataset(read_text_file(path), format, std::move(name));
}

LoadedDataset load_dataset(const std::filesystem::path& path) {
  return load_dataset(path, format_from_path(path));
}

std::string format_dataset(const Dataset& ds, Format format) {
  std::string out;
  if (format == Format::Csv) {
    out += kCsvHeader;
    out += '\n';
    for (const auto& f : ds.flows()) {
      out += csv::escape(f.id) + ',' + csv::escape(f.label) + ',' + std::to_string(f.ts_ms) + ',' +
             csv::escape(f.src_key) + ',' + csv::escape(f.dst_key) + ',' + join_sequence(f.sizes) +
             ',' + join_sequence(f.dirs) + ',' + join_sequence(f.ipts) + '\n';
    }
    return out;
  }
  for (const auto& f : ds.flows()) {
    nlohmann::ordered_json j;
    for (auto column : kColumns) j[std::string(column)] = nullptr;
    j["id"] = f.id;
    j["label"] = f.label;
    j["ts_ms"] = f.ts_ms;
    j["src_key"] = f.src_key;
    j["dst_key"] = f.dst_key;
    j["sizes"] = f.sizes;
    j["dirs"] = f.dirs;
    j["ipts"] = f.ipts;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds, Format format) {
  write_text_file(path, format_dataset(ds, format));
}

IngestReport summarize(const Dataset& ds) {
  IngestReport report;
  report.n_rows_read = report.n_accepted = ds.size();
  for (const auto& f : ds.flows()) {
    ++report.label_histogram[f.label];
    ++report.length_histogram[f.length()];
  }
  return report;
}

void to_json(nlohmann::json& j, const IngestReport& report) {
  nlohmann::json lengths = nlohmann::json::object();
  for (const auto& [len, count] : report.length_histogram) lengths[std::to_string(len)] = count;
  j = nlohmann::json{{"n_rows_read", report.n_rows_read},
                     {"n_accepted", report.n_accepted},
                     {"n_rejected", report.n_rejected},
                     {"rejection_reasons", report.rejection_reasons},
                     {"repairs", report.repairs},
                     {"label_histogram", report.label_histogram},
                     {"length_histogram", lengths}};
}

}  // namespace flowgauge
