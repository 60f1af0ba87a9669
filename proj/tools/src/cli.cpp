#include "flowgauge/cli/cli.hpp"

#include <functional>
#include <ostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "flowgauge/error.hpp"

#ifndef FLOWGAUGE_VERSION
#define FLOWGAUGE_VERSION "unknown"
#endif

namespace flowgauge::cli {

namespace {

void add_input(CLI::App* cmd, fs::path& input, std::string& format) {
  cmd->add_option("-i,--input", input, "Flow file (.csv, .jsonl, optionally .gz)")->required();
  cmd->add_option("--format", format, "Input format")
      ->check(CLI::IsMember({"auto", "csv", "jsonl"}))
      ->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Redundancy audits and input-space baseline evaluation for flow datasets", "flowgauge"};
  app.set_version_flag("--version", FLOWGAUGE_VERSION);
  app.require_subcommand(1);

  std::function<void()> action;

  AuditOptions audit;
  auto* a = app.add_subcommand("audit", "Duplicate accounting, max achievable accuracy, minimal FPR");
  add_input(a, audit.input, audit.format);
  a->add_option("--benign-labels", audit.benign_labels, "Labels counted as benign (enables minimal FPR)")
      ->delimiter(',');
  a->add_option("-o,--out-dir", audit.out_dir, "Output directory")->capture_default_str();
  a->callback([&] { action = [&] { cmd_audit(audit, out); }; });

  SplitOptions split;
  auto* s = app.add_subcommand("split", "Write train/val/test plans");
  add_input(s, split.input, split.format);
  s->add_option("--strategy", split.strategy, "Split strategy")
      ->check(CLI::IsMember({"random", "time", "disjoint", "fixed"}))
      ->capture_default_str();
  s->add_option("--fracs", split.fracs, "train,val,test fractions")->delimiter(',');
  s->add_option("--boundaries", split.boundaries,
                "train_end,test_start,test_end[,...] in ms; extra edges add test windows")
      ->delimiter(',');
  s->add_option("--val-frac", split.val_frac, "Validation share of the train window (time)");
  s->add_option("--key", split.key, "Disjoint key: src or dst")->capture_default_str();
  s->add_option("--fixed-file", split.fixed_file, "flow_id,partition file (fixed)");
  s->add_option("--seed", split.seed, "Base seed")->capture_default_str();
  s->add_option("--reps", split.reps, "Number of plans (seeds seed..seed+reps-1)")->capture_default_str();
  s->add_option("-o,--out-dir", split.out_dir, "Output directory")->capture_default_str();
  s->add_flag("--verify", split.verify, "Check every plan's invariants before writing");
  s->callback([&] { action = [&] { cmd_split(split, out); }; });

  EvalOptions eval;
  auto* e = app.add_subcommand("eval", "Score the baseline on the test partition of each plan");
  add_input(e, eval.input, eval.format);
  e->add_option("--plan,--plans", eval.plans, "Plan CSV files")->required();
  e->add_option("--config", eval.config, "default, a config JSON, or a tuning log (.jsonl)")
      ->capture_default_str();
  e->add_option("--mode", eval.mode, "top1 or vote:<t>")->capture_default_str();
  e->add_option("-o,--out,--out-dir", eval.out_dir, "Output directory")->capture_default_str();
  e->add_flag("--dump-preds", eval.dump_preds, "Write per-flow predictions");
  e->callback([&] { action = [&] { cmd_eval(eval, out); }; });

  TuneOptionsCli tune;
  std::string space_path, resume_path;
  auto* t = app.add_subcommand("tune", "Random search over the baseline's parameters");
  add_input(t, tune.input, tune.format);
  t->add_option("--plan,--plans", tune.plans, "Plan CSV files")->required();
  t->add_option("--budget", tune.budget, "Number of trials")->capture_default_str();
  t->add_option("--seed", tune.seed, "Sampler seed")->capture_default_str();
  t->add_option("--space", space_path, "Search space JSON");
  t->add_option("--out-log", tune.out_log, "Trial log (JSONL)")->capture_default_str();
  t->add_option("--resume", resume_path, "Continue from an existing trial log");
  t->add_option("-o,--out", tune.out, "Best configuration JSON")->capture_default_str();
  t->add_option("--vote-thresholds", tune.vote_thresholds, "Also pick t_maj from these candidates")
      ->delimiter(',');
  t->callback([&] {
    if (!space_path.empty()) tune.space = space_path;
    if (!resume_path.empty()) tune.resume = resume_path;
    action = [&] { cmd_tune(tune, out); };
  });

  ReportOptions report;
  auto* r = app.add_subcommand("report", "Compare best accuracy with max achievable accuracy");
  r->add_option("--audits", report.audits, "Audit directories or audit.json files")->required();
  r->add_option("--evals", report.evals, "Eval directories or eval.json files")->required();
  r->add_option("-o,--out,--out-dir", report.out_dir, "Output directory")->capture_default_str();
  r->callback([&] { action = [&] { cmd_report(report, out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    action();
    return kOk;
  } catch (const UsageError& ex) {
    err << "error: " << ex.what() << "\n";
    return kUsage;
  } catch (const DataError& ex) {
    err << "error: " << ex.what() << "\n";
    return kData;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << "\n";
    return kInternal;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"flowgauge"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace flowgauge::cli
