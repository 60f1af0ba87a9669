#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "flowgauge/csv.hpp"
#include "flowgauge/error.hpp"
#include "flowgauge/ingest.hpp"
#include "flowgauge/metrics.hpp"
#include "flowgauge/pipeline.hpp"
#include "flowgauge/redundancy.hpp"
#include "flowgauge/splitter.hpp"
#include "flowgauge/tuner.hpp"

#ifndef FLOWGAUGE_VERSION
#define FLOWGAUGE_VERSION "unknown"
#endif

namespace flowgauge::cli {

using nlohmann::json;

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Timestamps live only here so outputs are otherwise reproducible.
json meta_block(std::string_view command) {
  return {{"tool", "flowgauge"},
          {"version", FLOWGAUGE_VERSION},
          {"command", command},
          {"generated_at", utc_timestamp()}};
}

std::string pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
  return buf;
}

std::string fixed2(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

double round2(double value) { return std::round(value * 100.0) / 100.0; }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_json(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  const auto text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
}

LoadedDataset load_input(const fs::path& path, const std::string& format) {
  auto loaded = format == "auto" ? load_dataset(path) : load_dataset(path, format_from_string(format));
  if (loaded.dataset.empty()) throw DataError(path.string() + ": no valid flows");
  return loaded;
}

SplitFractions fractions_from(const std::vector<double>& f) {
  if (f.size() != 3) throw UsageError("--fracs takes three values: train,val,test");
  SplitFractions out{f[0], f[1], f[2]};
  out.validate();
  return out;
}

ScalingConfig load_config(const std::string& spec) {
  if (spec == "default") return default_config();
  const fs::path path(spec);
  const auto name = path.filename().string();
  if (name.size() >= 6 && name.substr(name.size() - 6) == ".jsonl") {
    const auto trials = read_trial_log(path);
    if (trials.empty()) throw DataError(spec + ": trial log is empty");
    const TrialResult* best = &trials.front();
    for (const auto& t : trials) {
      if (t.mean_val_accuracy > best->mean_val_accuracy) best = &t;
    }
    return best->cfg;
  }
  const auto j = read_json(path);
  try {
    return (j.is_object() && j.contains("cfg") ? j.at("cfg") : j).get<ScalingConfig>();
  } catch (const UsageError& e) {
    throw DataError(spec + ": " + e.what());
  }
}

RepeatedSplits load_plans(const Dataset& ds, const std::vector<fs::path>& paths) {
  if (paths.empty()) throw UsageError("at least one --plan is required");
  RepeatedSplits splits;
  for (const auto& p : paths) splits.plans.push_back(fixed_split(ds, p));
  return splits;
}

json partition_counts(const SplitPlan& plan) {
  return {{"train", plan.count(Partition::Train)},
          {"val", plan.count(Partition::Val)},
          {"test", plan.count(Partition::Test)},
          {"excluded", plan.count(Partition::Excluded)}};
}

// Benign/malicious composition for the IDS view of an audit.
json ids_summary(const RedundancyReport& report, const std::set<std::string>& benign) {
  std::size_t malicious = 0, malicious_mixed = 0;
  for (const auto& [label, n] : report.label_totals) {
    if (!benign.contains(label)) malicious += n;
  }
  for (const auto& c : report.clusters) {
    std::size_t b = 0, m = 0;
    for (const auto& [label, n] : c.label_counts) (benign.contains(label) ? b : m) += n;
    if (b > 0) malicious_mixed += m;
  }
  const auto total = static_cast<double>(report.n_total);
  return {{"minimal_fpr", minimal_fpr(report, benign)},
          {"malicious_fraction", static_cast<double>(malicious) / total},
          {"malicious_mixed_with_benign_fraction",
           malicious ? static_cast<double>(malicious_mixed) / static_cast<double>(malicious) : 0.0}};
}

fs::path resolve_bundle(const fs::path& p, const char* file) {
  return fs::is_directory(p) ? p / file : p;
}

}  // namespace

void cmd_audit(const AuditOptions& opt, std::ostream& out) {
  const auto loaded = load_input(opt.input, opt.format);
  const Dataset& ds = loaded.dataset;
  const IngestReport& ingest = loaded.report;
  const auto sd = cluster_duplicates(ds, KeyVariant::SizesDirs);
  const auto full = cluster_duplicates(ds, KeyVariant::SizesDirsIpts);

  json j;
  j["meta"] = meta_block("audit");
  j["dataset"] = ds.name();
  j["ingest"] = ingest;
  j["redundancy"] = {{"sizes_dirs", sd}, {"sizes_dirs_ipts", full}};
  j["max_acc_by_variant"] = {{"sizes_dirs", max_achievable_accuracy(sd)},
                             {"sizes_dirs_ipts", max_achievable_accuracy(full)}};
  // The baseline's default features include IPTs, so that variant is headline.
  j["max_acc_variant"] = "sizes_dirs_ipts";
  j["max_acc"] = max_achievable_accuracy(full);
  if (!opt.benign_labels.empty()) {
    const std::set<std::string> benign(opt.benign_labels.begin(), opt.benign_labels.end());
    j["benign_labels"] = benign;
    const auto ids_sd = ids_summary(sd, benign);
    const auto ids_full = ids_summary(full, benign);
    j["minimal_fpr_by_variant"] = {{"sizes_dirs", ids_sd}, {"sizes_dirs_ipts", ids_full}};
    j["minimal_fpr"] = ids_full["minimal_fpr"];
  }

  ensure_dir(opt.out_dir);
  write_json(opt.out_dir / "audit.json", j);
  write_text_file(opt.out_dir / "ecdf_sizes_dirs.csv", ecdf_csv(ecdf_by_length(sd, ds)));
  write_text_file(opt.out_dir / "ecdf_sizes_dirs_ipts.csv", ecdf_csv(ecdf_by_length(full, ds)));
  write_text_file(opt.out_dir / "heatmap.csv",
                  heatmap_csv({{KeyVariant::SizesDirs, heatmap_by_length(sd, ds)},
                               {KeyVariant::SizesDirsIpts, heatmap_by_length(full, ds)}}));

  out << ds.name() << ": " << ds.size() << " flows (" << ingest.n_rejected << " rejected), unique "
      << pct(redundancy_fraction(sd)) << "% / " << pct(redundancy_fraction(full)) << "% with IPTs, max acc "
      << pct(j["max_acc"].get<double>()) << "%";
  if (j.contains("minimal_fpr")) out << ", minimal FPR " << pct(j["minimal_fpr"].get<double>()) << "%";
  out << "\n";
}

void cmd_split(const SplitOptions& opt, std::ostream& out) {
  const auto loaded = load_input(opt.input, opt.format);
  const Dataset& ds = loaded.dataset;
  if (opt.reps == 0) throw UsageError("--reps must be >= 1");

  std::vector<SplitPlan> plans;
  KeyFunction key_of;
  if (opt.strategy == "random") {
    const auto fracs = fractions_from(opt.fracs);
    plans = repeat([&](std::uint64_t s) { return random_split(ds, fracs, s); }, opt.reps, opt.seed).plans;
  } else if (opt.strategy == "disjoint") {
    const auto fracs = fractions_from(opt.fracs);
    const auto field = key_field_from_string(opt.key);
    key_of = key_function(field);
    plans = repeat([&](std::uint64_t s) { return disjoint_key_split(ds, field, fracs, s); }, opt.reps, opt.seed)
                .plans;
  } else if (opt.strategy == "time") {
    if (opt.boundaries.size() < 3) {
      throw UsageError("--boundaries needs train_end,test_start,test_end[,more test edges]");
    }
    const std::span<const std::int64_t> edges(opt.boundaries.begin() + 1, opt.boundaries.end());
    plans = time_split_windows(ds, opt.boundaries.front(), edges, opt.val_frac);
  } else if (opt.strategy == "fixed") {
    if (opt.fixed_file.empty()) throw UsageError("--fixed-file is required for the fixed strategy");
    plans.push_back(fixed_split(ds, opt.fixed_file));
  } else {
    throw UsageError("unknown strategy '" + opt.strategy + "' (random, time, disjoint, fixed)");
  }

  ensure_dir(opt.out_dir);
  json summary;
  summary["meta"] = meta_block("split");
  summary["dataset"] = ds.name();
  summary["strategy"] = opt.strategy;
  summary["n_flows"] = ds.size();
  summary["plans"] = json::array();
  for (std::size_t k = 0; k < plans.size(); ++k) {
    const auto& plan = plans[k];
    const auto file = "plan_" + std::to_string(k) + ".csv";
    if (opt.verify) {
      const auto problem = verify_plan(ds, plan, key_of);
      if (!problem.empty()) throw DataError(file + " failed verification: " + problem);
    }
    write_plan(opt.out_dir / file, plan);
    const auto realized = plan.realized_fractions();
    json entry = {{"file", file},
                  {"seed", plan.seed},
                  {"counts", partition_counts(plan)},
                  {"realized_fracs", {realized[0], realized[1], realized[2]}},
                  {"params", plan.params}};
    if (opt.verify) entry["verified"] = true;
    summary["plans"].push_back(entry);
    out << file << ": train " << plan.count(Partition::Train) << ", val " << plan.count(Partition::Val)
        << ", test " << plan.count(Partition::Test);
    if (plan.count(Partition::Excluded)) out << ", excluded " << plan.count(Partition::Excluded);
    if (opt.verify) out << " (verified)";
    out << "\n";
  }
  write_json(opt.out_dir / "split_summary.json", summary);
}

void cmd_eval(const EvalOptions& opt, std::ostream& out) {
  const auto loaded = load_input(opt.input, opt.format);
  const Dataset& ds = loaded.dataset;
  const auto cfg = load_config(opt.config);
  const auto mode = PredictMode::parse(opt.mode);
  const auto splits = load_plans(ds, opt.plans);
  ensure_dir(opt.out_dir);

  json j;
  j["meta"] = meta_block("eval");
  j["dataset"] = ds.name();
  j["config"] = cfg;
  j["mode"] = mode.to_string();
  j["plans"] = json::array();
  std::vector<double> accs, f1s;
  for (std::size_t k = 0; k < splits.plans.size(); ++k) {
    const auto pe = evaluate_plan(ds, splits.plans[k], cfg, mode, Partition::Test);
    const auto& m = pe.evaluation.metrics;
    accs.push_back(m.accuracy);
    f1s.push_back(m.weighted_f1);
    j["plans"].push_back({{"plan", opt.plans[k].string()},
                          {"n_train", splits.plans[k].count(Partition::Train)},
                          {"n_test", pe.rows.size()},
                          {"metrics", m}});
    if (opt.dump_preds) {
      std::string csv = "flow_id,truth,pred,nn_distance,n_voters\n";
      for (std::size_t i = 0; i < pe.rows.size(); ++i) {
        const auto& flow = ds[pe.rows[i]];
        const auto& p = pe.evaluation.predictions[i];
        csv += csv::escape(flow.id) + ',' + csv::escape(flow.label) + ',' + csv::escape(p.label) + ',' +
               format_real(p.nn_distance) + ',' + std::to_string(p.n_voters) + '\n';
      }
      write_text_file(opt.out_dir / ("preds_" + std::to_string(k) + ".csv"), csv);
    }
    out << opt.plans[k].string() << ": accuracy " << pct(m.accuracy) << "%, weighted F1 " << pct(m.weighted_f1)
        << "%\n";
  }
  const auto acc = mean_std(accs);
  const auto f1 = mean_std(f1s);
  j["aggregate"] = {{"accuracy", acc}, {"weighted_f1", f1}};
  write_json(opt.out_dir / "eval.json", j);
  out << "mean accuracy " << pct(acc.mean) << "%";
  if (acc.stddev) out << " +- " << pct(*acc.stddev);
  out << ", mean weighted F1 " << pct(f1.mean) << "%";
  if (f1.stddev) out << " +- " << pct(*f1.stddev);
  out << " over " << acc.n << " plan(s)\n";
}

void cmd_tune(const TuneOptionsCli& opt, std::ostream& out) {
  const auto loaded = load_input(opt.input, opt.format);
  const Dataset& ds = loaded.dataset;
  const auto splits = load_plans(ds, opt.plans);
  SearchSpace space;
  if (opt.space) {
    try {
      space = read_json(*opt.space).get<SearchSpace>();
    } catch (const json::exception& e) {
      throw DataError(opt.space->string() + ": " + e.what());
    }
  }

  TuneOptions options;
  options.budget = opt.budget;
  options.seed = opt.seed;
  if (opt.resume) options.resume = read_trial_log(*opt.resume);
  if (options.resume.size() > options.budget) options.resume.resize(options.budget);

  // The log is rewritten from the resumed prefix so it always holds trials
  // 0..k in order, even when --resume and --out-log name the same file.
  if (opt.out_log.has_parent_path()) ensure_dir(opt.out_log.parent_path());
  std::ofstream log(opt.out_log, std::ios::trunc);
  if (!log) throw DataError("cannot write " + opt.out_log.string());
  for (const auto& t : options.resume) log << json(t).dump() << '\n';
  log.flush();
  options.on_trial = [&](const TrialResult& t) {
    log << json(t).dump() << '\n';
    log.flush();
  };
  if (!options.resume.empty()) out << "resuming at trial " << options.resume.size() << "\n";

  const auto result = tune(ds, splits, space, options);
  if (!log) throw DataError("failed writing " + opt.out_log.string());

  json best;
  best["meta"] = meta_block("tune");
  best["dataset"] = ds.name();
  best["seed"] = opt.seed;
  best["budget"] = opt.budget;
  best["space"] = space;
  best["trial"] = result.best.trial;
  best["cfg"] = result.best.cfg;
  best["per_rep"] = result.best.per_rep;
  best["mean_val_accuracy"] = result.best.mean_val_accuracy;
  if (!opt.vote_thresholds.empty()) {
    const auto voting = tune_voting(ds, splits, result.best.cfg, opt.vote_thresholds);
    json acc = json::array();
    for (const auto& [t, a] : voting.accuracies) acc.push_back({{"t_maj", t}, {"mean_val_accuracy", a}});
    best["voting"] = {{"best_t_maj", voting.best_t_maj}, {"accuracies", acc}};
  }
  if (opt.out.has_parent_path()) ensure_dir(opt.out.parent_path());
  write_json(opt.out, best);
  out << "best trial " << result.best.trial << " of " << result.trials.size() << ": mean val accuracy "
      << pct(result.best.mean_val_accuracy) << "%, cfg " << json(result.best.cfg).dump() << "\n";
  if (best.contains("voting")) out << "best t_maj " << format_real(best["voting"]["best_t_maj"]) << "\n";
}

void cmd_report(const ReportOptions& opt, std::ostream& out) {
  struct AuditRow {
    double max_acc;
    double same_class;
  };
  std::vector<std::string> order;
  std::map<std::string, AuditRow> audits;
  for (const auto& p : opt.audits) {
    const auto j = read_json(resolve_bundle(p, "audit.json"));
    try {
      const auto name = j.at("dataset").get<std::string>();
      if (!audits.contains(name)) order.push_back(name);
      audits[name] = {j.at("max_acc").get<double>(),
                      j.at("redundancy").at("sizes_dirs").at("same_class_dup_fraction").get<double>()};
    } catch (const json::exception& e) {
      throw DataError(p.string() + ": not an audit bundle: " + e.what());
    }
  }
  std::map<std::string, double> best;
  for (const auto& p : opt.evals) {
    const auto j = read_json(resolve_bundle(p, "eval.json"));
    try {
      const auto name = j.at("dataset").get<std::string>();
      const double acc = j.at("aggregate").at("accuracy").at("mean").get<double>();
      auto [it, inserted] = best.try_emplace(name, acc);
      if (!inserted) it->second = std::max(it->second, acc);
    } catch (const json::exception& e) {
      throw DataError(p.string() + ": not an eval bundle: " + e.what());
    }
  }

  json rows = json::array();
  std::string csv = "dataset,best_input_space,max_acc,gap,same_class_dup\n";
  std::vector<double> xs, ys;
  for (const auto& name : order) {
    auto it = best.find(name);
    if (it == best.end()) continue;
    const double best_pct = it->second * 100.0;
    const double max_pct = audits[name].max_acc * 100.0;
    const double g = gap(best_pct, max_pct);
    const double same_pct = audits[name].same_class * 100.0;
    rows.push_back({{"dataset", name},
                    {"best_input_space", round2(best_pct)},
                    {"max_acc", round2(max_pct)},
                    {"gap", round2(g)},
                    {"same_class_dup", round2(same_pct)}});
    csv += csv::escape(name) + ',' + fixed2(best_pct) + ',' + fixed2(max_pct) + ',' + fixed2(g) + ',' +
           fixed2(same_pct) + '\n';
    xs.push_back(audits[name].same_class);
    ys.push_back(it->second);
    out << name << ": best " << fixed2(best_pct) << ", max acc " << fixed2(max_pct) << ", gap " << fixed2(g)
        << "\n";
  }
  if (rows.empty()) throw UsageError("report needs at least one dataset with both an audit and an eval");

  json j;
  j["meta"] = meta_block("report");
  j["rows"] = rows;
  if (xs.size() >= 3) {
    try {
      const auto r = spearman(xs, ys);
      j["spearman"] = {{"x", "same_class_dup_fraction"}, {"y", "best_input_space"}, {"result", r}};
      out << "spearman rho " << fixed2(r.rho) << ", p " << format_real(r.p_value) << " (n=" << r.n << ")\n";
    } catch (const UsageError& e) {
      j["spearman"] = nullptr;
      j["spearman_note"] = e.what();
    }
  } else {
    j["spearman"] = nullptr;
    j["spearman_note"] = "omitted: needs at least 3 datasets, got " + std::to_string(xs.size());
    out << "spearman omitted (" << xs.size() << " dataset(s))\n";
  }
  ensure_dir(opt.out_dir);
  write_text_file(opt.out_dir / "report.csv", csv);
  write_json(opt.out_dir / "report.json", j);
}

}  // namespace flowgauge::cli
