#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace flowgauge::cli {

namespace fs = std::filesystem;

struct AuditOptions {
  fs::path input;
  std::string format = "auto";
  std::vector<std::string> benign_labels;
  fs::path out_dir = ".";
};

struct SplitOptions {
  fs::path input;
  std::string format = "auto";
  std::string strategy = "random";
  std::vector<double> fracs{0.6, 0.2, 0.2};
  /// train_end followed by two or more test window edges.
  std::vector<std::int64_t> boundaries;
  double val_frac = 0.0;
  std::string key = "src";
  fs::path fixed_file;
  std::uint64_t seed = 0;
  std::size_t reps = 1;
  fs::path out_dir = ".";
  bool verify = false;
};

struct EvalOptions {
  fs::path input;
  std::string format = "auto";
  std::vector<fs::path> plans;
  std::string config = "default";
  std::string mode = "top1";
  fs::path out_dir = ".";
  bool dump_preds = false;
};

struct TuneOptionsCli {
  fs::path input;
  std::string format = "auto";
  std::vector<fs::path> plans;
  std::size_t budget = 200;
  std::uint64_t seed = 0;
  std::optional<fs::path> space;
  fs::path out_log = "trials.jsonl";
  std::optional<fs::path> resume;
  fs::path out = "best.json";
  std::vector<double> vote_thresholds;
};

struct ReportOptions {
  std::vector<fs::path> audits;
  std::vector<fs::path> evals;
  fs::path out_dir = ".";
};

void cmd_audit(const AuditOptions& opt, std::ostream& out);
void cmd_split(const SplitOptions& opt, std::ostream& out);
void cmd_eval(const EvalOptions& opt, std::ostream& out);
void cmd_tune(const TuneOptionsCli& opt, std::ostream& out);
void cmd_report(const ReportOptions& opt, std::ostream& out);

}  // namespace flowgauge::cli
