// Command line front end: experiment orchestration over the tracematch
// library. Progress goes to stderr, data to files; every run leaves a
// manifest.json sufficient to reproduce it.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "tracematch/analysis.hpp"
#include "tracematch/ingest.hpp"
#include "tracematch/matcher.hpp"
#include "tracematch/parallel.hpp"
#include "tracematch/synthetic.hpp"
#include "tracematch/uniqueness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tracematch;

namespace {

constexpr const char* kToolVersion = "1.0.0";

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Removes everything it wrote unless commit() is called, so failed runs
// leave no partial artifacts behind.
class OutputGuard {
 public:
  explicit OutputGuard(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }
  ~OutputGuard() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : files_) fs::remove(p, ec);
  }

  fs::path track(const std::string& name) {
    files_.push_back(dir_ / name);
    return files_.back();
  }

  void write_text(const std::string& name, const std::string& content) {
    std::ofstream out(track(name), std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot write {}", name));
    out << content;
  }

  void write_manifest(const std::string& subcommand, const json& params) {
    json manifest;
    manifest["tool"] = "tracematch";
    manifest["tool_version"] = kToolVersion;
    manifest["dataset_format_version"] = 1;
    manifest["subcommand"] = subcommand;
    manifest["parameters"] = params;
    manifest["config_hash"] = fmt::format("{:016x}", fnv1a(params.dump()));
    write_text("manifest.json", manifest.dump(2) + "\n");
  }

  const fs::path& dir() const { return dir_; }
  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
  bool committed_ = false;
};

std::string csv_double(double v) { return fmt::format("{:.9f}", v); }

json cfg_to_json(const DiscretizationConfig& cfg) {
  return json{{"delta_xy_m", cfg.delta_xy},
              {"delta_t_s", cfg.delta_t},
              {"day_start", cfg.day_start},
              {"day_length", cfg.day_length},
              {"grid_origin_x", cfg.grid_origin.x},
              {"grid_origin_y", cfg.grid_origin.y}};
}

struct CommonOptions {
  std::string out_dir;
  std::uint64_t seed = 0;
  int workers = default_workers();
};

void add_common(CLI::App* cmd, CommonOptions* common, bool with_seed = true) {
  cmd->add_option("-o,--out", common->out_dir, "output directory")
      ->required();
  if (with_seed) {
    cmd->add_option("--seed", common->seed, "rng seed")->required();
  }
  cmd->add_option("--workers", common->workers,
                  "worker threads (default: TRACEMATCH_WORKERS or hardware)");
}

void log_line(const std::string& line) { std::cerr << line << "\n"; }

// ---------------------------------------------------------------- generate

int run_generate(const CommonOptions& common,
                 const SyntheticPopulationConfig& pop,
                 const DiscretizationConfig& dcfg,
                 const std::string& events_csv) {
  OutputGuard out(common.out_dir);
  std::vector<RawEventRecord> events;
  const Dataset dataset = generate_synthetic(
      pop, dcfg, common.workers, events_csv.empty() ? nullptr : &events);
  dataset.save(out.track("dataset.bin"));
  if (!events_csv.empty()) {
    write_event_csv(out.track(events_csv), events);
  }
  json params{{"num_users", pop.num_users},
              {"num_sites", pop.num_sites},
              {"zipf_exponent", pop.zipf_exponent},
              {"events_per_user_mean", pop.events_per_user_mean},
              {"events_per_user_dispersion", pop.events_per_user_dispersion},
              {"pool_size_mean", pop.pool_size_mean},
              {"anchor_affinity", pop.anchor_affinity},
              {"travel_radius_m", pop.travel_radius_m},
              {"seed", pop.seed},
              {"discretization", cfg_to_json(dcfg)}};
  out.write_manifest("generate", params);
  log_line(fmt::format("generated {} users, {} events, {} distinct cells",
                       dataset.size(), dataset.raw_event_count(),
                       dataset.num_distinct_cells()));
  out.commit();
  return 0;
}

// ------------------------------------------------------------------ ingest

int run_ingest(const CommonOptions& common, const std::string& input,
               BuildOptions options) {
  OutputGuard out(common.out_dir);
  CsvStats stats;
  const auto records = read_event_csv(input, &stats);
  const auto result = build_traces(records, options);
  result.dataset.save(out.track("dataset.bin"));
  json params{{"input", input},
              {"merge_threshold_m", options.merge_threshold_m},
              {"origin_lat", result.origin_lat},
              {"origin_lon", result.origin_lon},
              {"discretization", cfg_to_json(result.dataset.cfg())}};
  out.write_manifest("ingest", params);
  log_line(fmt::format(
      "ingested {} records ({} malformed, {} out of window), {} users, "
      "{} sites in {} clusters",
      stats.total_records, stats.rejected_records, result.rejected_records,
      result.dataset.size(), result.num_sites, result.num_site_clusters));
  out.commit();
  return 0;
}

// ------------------------------------------------------------- match-leaks

std::string leaks_csv(const MatchReport& report) {
  std::string csv = "leak_id,owner_user,k,nu,nu_normalized,xi\n";
  const double n = static_cast<double>(report.dataset_size);
  for (const auto& rec : report.records) {
    csv += fmt::format("{},{},{},{},{},{}\n", rec.leak_id, rec.owner, rec.k,
                       rec.nu, csv_double(static_cast<double>(rec.nu) / n),
                       rec.xi ? 1 : 0);
  }
  return csv;
}

std::string rho_csv(const MatchReport& report) {
  std::string csv = "k,rho,stddev,samples\n";
  for (const auto& [k, est] : report.rho_by_k) {
    csv += fmt::format("{},{},{},{}\n", k, csv_double(est.rho),
                       csv_double(est.stddev), est.sample_count);
  }
  return csv;
}

int run_match_leaks(const CommonOptions& common, const std::string& dataset_path,
                    const RhoOptions& base) {
  OutputGuard out(common.out_dir);
  const Dataset dataset = Dataset::load(dataset_path);
  RhoOptions options = base;
  options.seed = common.seed;
  options.workers = common.workers;
  const MatchReport report = estimate_rho(dataset, options);
  out.write_text("leaks.csv", leaks_csv(report));
  out.write_text("rho.csv", rho_csv(report));
  json params{{"dataset", dataset_path},
              {"k", options.k},
              {"sample_size", options.sample_size},
              {"leaks_per_user", options.leaks_per_user},
              {"strategy", to_string(options.strategy)},
              {"seed", options.seed},
              {"nu_normalization", report.nu_normalization},
              {"discretization", cfg_to_json(dataset.cfg())}};
  out.write_manifest("match-leaks", params);
  log_line(fmt::format("rho_{} = {:.4f} over {} leaks ({} short traces skipped)",
                       options.k, report.rho_by_k.at(options.k).rho,
                       report.records.size(), report.skipped_short_traces));
  out.commit();
  return 0;
}

// ------------------------------------------------------------------- sweep

int run_sweep(const CommonOptions& common, const std::string& dataset_path,
              SweepOptions options) {
  OutputGuard out(common.out_dir);
  const Dataset dataset = Dataset::load(dataset_path);
  options.seed = common.seed;
  options.workers = common.workers;
  const SweepGrid grid = sweep(dataset, options);
  std::string csv = "delta_t_s,delta_xy_m,k,rho\n";
  for (std::size_t it = 0; it < grid.delta_t_axis.size(); ++it) {
    for (std::size_t ix = 0; ix < grid.delta_xy_axis.size(); ++ix) {
      for (std::size_t ik = 0; ik < grid.k_list.size(); ++ik) {
        csv += fmt::format("{},{},{},{}\n", grid.delta_t_axis[it],
                           grid.delta_xy_axis[ix], grid.k_list[ik],
                           csv_double(grid.rho[it][ix][ik]));
      }
    }
  }
  out.write_text("sweep.csv", csv);
  json params{{"dataset", dataset_path},
              {"k_list", options.k_list},
              {"delta_t_list", options.delta_t_list},
              {"delta_xy_list", options.delta_xy_list},
              {"sample_size", options.sample_size},
              {"strategy", to_string(options.strategy)},
              {"seed", options.seed}};
  out.write_manifest("sweep", params);
  log_line(fmt::format("swept {} grid points over {} sampled users",
                       grid.delta_t_axis.size() * grid.delta_xy_axis.size(),
                       grid.sampled_users.size()));
  out.commit();
  return 0;
}

// ------------------------------------------------- popularity / timeofday

int run_popularity(const CommonOptions& common, const std::string& dataset_path,
                   RhoOptions options, std::size_t bins) {
  OutputGuard out(common.out_dir);
  const Dataset dataset = Dataset::load(dataset_path);
  options.seed = common.seed;
  options.workers = common.workers;
  const MatchReport report = estimate_rho(dataset, options);
  const auto profile = popularity_profile(dataset, report, bins);
  std::string csv = "popularity_bin,weight\n";
  for (std::size_t b = 0; b < profile.size(); ++b) {
    csv += fmt::format("{},{}\n", b, csv_double(profile[b]));
  }
  out.write_text("popularity.csv", csv);
  json params{{"dataset", dataset_path},
              {"k", options.k},
              {"sample_size", options.sample_size},
              {"bins", bins},
              {"seed", options.seed}};
  out.write_manifest("popularity", params);
  if (profile.empty()) log_line("no uniquely matching leak in the sample");
  out.commit();
  return 0;
}

int run_timeofday(const CommonOptions& common, const std::string& dataset_path,
                  RhoOptions options) {
  OutputGuard out(common.out_dir);
  const Dataset dataset = Dataset::load(dataset_path);
  options.seed = common.seed;
  options.workers = common.workers;
  const MatchReport report = estimate_rho(dataset, options);
  const auto profile = time_of_day_profile(report, dataset.cfg());
  std::string csv = "time_bin,weight\n";
  for (std::size_t b = 0; b < profile.size(); ++b) {
    csv += fmt::format("{},{}\n", b, csv_double(profile[b]));
  }
  out.write_text("timeofday.csv", csv);
  json params{{"dataset", dataset_path},
              {"k", options.k},
              {"sample_size", options.sample_size},
              {"seed", options.seed}};
  out.write_manifest("timeofday", params);
  out.commit();
  return 0;
}

// ----------------------------------------------------------------- cohorts

void append_cohort(std::string& csv, const std::string& name,
                   const CohortSummary& s) {
  const auto row = [&](const char* metric, double mean, double sd) {
    csv += fmt::format("{},{},{},{}\n", name, metric, csv_double(mean),
                       csv_double(sd));
  };
  csv += fmt::format("{},count,{},0.000000000\n", name, s.count);
  row("num_events", static_cast<double>(s.mean.num_events),
      static_cast<double>(s.stddev.num_events));
  row("num_unique_locations", static_cast<double>(s.mean.num_unique_locations),
      static_cast<double>(s.stddev.num_unique_locations));
  row("bbox_area_km2", s.mean.bbox_area_km2, s.stddev.bbox_area_km2);
  row("dist_per_slot_km", s.mean.dist_per_slot_km, s.stddev.dist_per_slot_km);
  row("total_distance_km", s.mean.total_distance_km,
      s.stddev.total_distance_km);
  row("temporal_entropy_bits", s.mean.temporal_entropy_bits,
      s.stddev.temporal_entropy_bits);
  row("spatial_entropy_bits", s.mean.spatial_entropy_bits,
      s.stddev.spatial_entropy_bits);
}

int run_cohorts(const CommonOptions& common, const std::string& dataset_path,
                CohortOptions options) {
  OutputGuard out(common.out_dir);
  const Dataset dataset = Dataset::load(dataset_path);
  options.seed = common.seed;
  options.workers = common.workers;
  const CohortReport report = cohort_compare(dataset, options);
  std::string csv = "cohort,metric,mean,stddev\n";
  append_cohort(csv, "always_unique", report.always_unique);
  append_cohort(csv, "rarely_unique", report.rarely_unique);
  out.write_text("cohorts.csv", csv);
  json params{{"dataset", dataset_path},
              {"k", options.k},
              {"repeat", options.repeat},
              {"sample_size", options.sample_size},
              {"seed", options.seed}};
  out.write_manifest("cohorts", params);
  log_line(fmt::format("cohorts: {} always unique, {} rarely unique, of {}",
                       report.always_unique.count, report.rarely_unique.count,
                       report.sampled_users));
  out.commit();
  return 0;
}

// -------------------------------------------------------------- uniqueness

int run_uniqueness(const CommonOptions& common, const std::string& dataset_path,
                   UniquenessOptions options) {
  OutputGuard out(common.out_dir);
  const Dataset dataset = Dataset::load(dataset_path);
  options.seed = common.seed;
  options.workers = common.workers;
  const UniquenessReport report = estimate_trace_uniqueness(dataset, options);
  std::string csv = "user,match_count,skipped_by_prefilter\n";
  for (const auto& rec : report.records) {
    csv += fmt::format("{},{},{}\n", dataset.user_id(rec.user),
                       rec.match_count, rec.skipped_by_prefilter);
  }
  out.write_text("uniqueness.csv", csv);
  std::string summary =
      "mode,r,exhaustive,mutual_equality,sampled,probability_unique,"
      "total_skipped_by_prefilter\n";
  summary += fmt::format("{},{},{},{},{},{},{}\n", to_string(options.mode),
                         csv_double(options.r), options.exhaustive ? 1 : 0,
                         options.mutual_equality ? 1 : 0,
                         report.records.size(),
                         csv_double(report.probability_unique),
                         report.total_skipped_by_prefilter);
  out.write_text("uniqueness_summary.csv", summary);
  json params{{"dataset", dataset_path},
              {"mode", to_string(options.mode)},
              {"r", options.r},
              {"exhaustive", options.exhaustive},
              {"mutual_equality", options.mutual_equality},
              {"sample_size", options.sample_size},
              {"seed", options.seed}};
  out.write_manifest("uniqueness", params);
  log_line(fmt::format("P(unique) = {:.4f} over {} sampled traces",
                       report.probability_unique, report.records.size()));
  out.commit();
  return 0;
}

// ---------------------------------------------------------------- selftest

void self_check(bool ok, const std::string& what) {
  log_line(fmt::format("[{}] {}", ok ? "ok" : "FAIL", what));
  if (!ok) throw InvariantError("selftest failed: " + what);
}

int run_selftest(int workers) {
  SyntheticPopulationConfig pop;
  pop.num_users = 1000;
  pop.num_sites = 3000;
  pop.events_per_user_mean = 60.0;
  pop.seed = 20240101;
  DiscretizationConfig dcfg;
  const Dataset dataset = generate_synthetic(pop, dcfg, workers);

  // strategy equivalence against the naive oracle
  bool equal = true;
  RhoOptions options;
  options.k = 3;
  options.sample_size = 200;
  options.seed = 1;
  options.workers = workers;
  std::vector<std::uint32_t> reference;
  for (const auto strategy :
       {MatchStrategy::kNaive, MatchStrategy::kPruned, MatchStrategy::kIndexed}) {
    options.strategy = strategy;
    const auto report = estimate_rho(dataset, options);
    std::vector<std::uint32_t> nus;
    for (const auto& rec : report.records) nus.push_back(rec.nu);
    if (strategy == MatchStrategy::kNaive) {
      reference = nus;
    } else {
      equal = equal && nus == reference;
    }
  }
  self_check(equal, "pruned and indexed match counts equal the naive oracle");

  // nested monotonicity
  const auto sample = sample_nested_leaks(dataset, 100, 5, 2);
  const auto nus = evaluate_nested_leaks(dataset, sample, {1, 2, 3, 4, 5},
                                         MatchStrategy::kIndexed, workers);
  bool monotone = true;
  for (const auto& per_user : nus) {
    for (std::size_t j = 1; j < per_user.size(); ++j) {
      monotone = monotone && per_user[j] <= per_user[j - 1];
    }
  }
  self_check(monotone, "nu is non-increasing along nested leak chains");

  // strict implies relaxed on random trace pairs
  bool implied = true;
  Rng rng(3);
  for (int i = 0; i < 20000; ++i) {
    const auto& a = dataset.trace(rng.uniform_below(dataset.size()));
    const auto& b = dataset.trace(rng.uniform_below(dataset.size()));
    if (strict_trace_match(a, b) && !relaxed_trace_match(a, b)) implied = false;
  }
  self_check(implied, "strict trace matches are relaxed trace matches");

  // unit checks
  std::vector<SpatioTemporalTuple> uniform;
  for (std::int32_t i = 0; i < 16; ++i) uniform.push_back({GridCell{i, 0}, i});
  const auto stats =
      mobility_stats(MobilityTrace::from_tuples("u", uniform), dcfg);
  self_check(std::abs(stats.temporal_entropy_bits - 4.0) <= 1e-9,
             "uniform 16-bin trace has exactly 4 bits of temporal entropy");
  const auto box = bounding_box(
      std::vector<SpatioTemporalTuple>{{GridCell{0, 0}, 0}}, dcfg);
  self_check(box.area() == dcfg.delta_xy * dcfg.delta_xy,
             "single-cell bounding box area is delta_xy^2");

  log_line("selftest passed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spatio-temporal trace matching and uniqueness experiments"};
  app.set_config("--config", "", "declarative config file; flags win");
  app.require_subcommand(1);

  // generate
  CommonOptions gen_common;
  SyntheticPopulationConfig pop;
  DiscretizationConfig gen_dcfg;
  std::string events_csv;
  auto* gen = app.add_subcommand("generate", "generate a synthetic corpus");
  add_common(gen, &gen_common);
  gen->add_option("--num-users", pop.num_users, "population size");
  gen->add_option("--num-sites", pop.num_sites, "antenna site count");
  gen->add_option("--zipf-exponent", pop.zipf_exponent, "site popularity skew");
  gen->add_option("--events-mean", pop.events_per_user_mean,
                  "mean events per user");
  gen->add_option("--events-dispersion", pop.events_per_user_dispersion,
                  "negative binomial dispersion");
  gen->add_option("--pool-size-mean", pop.pool_size_mean,
                  "mean personal site pool size");
  gen->add_option("--anchor-affinity", pop.anchor_affinity,
                  "share of events at anchor sites");
  gen->add_option("--travel-radius", pop.travel_radius_m,
                  "exploration radius around home, meters");
  gen->add_option("--delta-xy", gen_dcfg.delta_xy, "cell edge, meters");
  gen->add_option("--delta-t", gen_dcfg.delta_t, "time bin, seconds");
  gen->add_option("--events-csv", events_csv,
                  "also write the raw events as CSV (filename in --out)");

  // ingest
  CommonOptions ing_common;
  std::string ing_input;
  BuildOptions build_options;
  double ing_origin_lat = 0.0, ing_origin_lon = 0.0;
  auto* ing = app.add_subcommand("ingest", "build a dataset from an event CSV");
  add_common(ing, &ing_common, /*with_seed=*/false);
  ing->add_option("-i,--input", ing_input, "event CSV, gzip by extension")
      ->required();
  ing->add_option("--delta-xy", build_options.delta_xy, "cell edge, meters");
  ing->add_option("--delta-t", build_options.delta_t, "time bin, seconds");
  ing->add_option("--merge-threshold", build_options.merge_threshold_m,
                  "site merge distance, meters");
  auto* olat = ing->add_option("--origin-lat", ing_origin_lat,
                               "projection origin latitude");
  auto* olon = ing->add_option("--origin-lon", ing_origin_lon,
                               "projection origin longitude");

  // shared experiment flags
  const auto add_rho_flags = [](CLI::App* cmd, RhoOptions* options,
                                std::string* dataset_path,
                                std::string* strategy) {
    cmd->add_option("-d,--dataset", *dataset_path, "dataset container")
        ->required();
    cmd->add_option("-k", options->k, "leak size");
    cmd->add_option("--sample-size", options->sample_size, "sampled users");
    cmd->add_option("--strategy", *strategy, "naive, pruned, or indexed");
  };

  // match-leaks
  CommonOptions ml_common;
  RhoOptions ml_options;
  std::string ml_dataset, ml_strategy = "indexed";
  auto* ml = app.add_subcommand("match-leaks",
                                "estimate unique-match probability rho_k");
  add_common(ml, &ml_common);
  add_rho_flags(ml, &ml_options, &ml_dataset, &ml_strategy);
  ml->add_option("--leaks-per-user", ml_options.leaks_per_user,
                 "independent leaks per sampled user");

  // sweep
  CommonOptions sw_common;
  SweepOptions sw_options;
  std::string sw_dataset, sw_strategy = "indexed";
  auto* sw = app.add_subcommand("sweep", "rho grid over granularity ladders");
  add_common(sw, &sw_common);
  sw->add_option("-d,--dataset", sw_dataset, "dataset container")->required();
  sw->add_option("--k-list", sw_options.k_list, "leak sizes");
  sw->add_option("--delta-t-list", sw_options.delta_t_list,
                 "time bin ladder, seconds, ascending integer-ratio chain")
      ->required();
  sw->add_option("--delta-xy-list", sw_options.delta_xy_list,
                 "cell edge ladder, meters, ascending integer-ratio chain")
      ->required();
  sw->add_option("--sample-size", sw_options.sample_size, "sampled users");
  sw->add_option("--strategy", sw_strategy, "naive, pruned, or indexed");

  // popularity
  CommonOptions pop_common;
  RhoOptions pop_options;
  std::string pop_dataset, pop_strategy = "indexed";
  std::size_t bins = 100;
  auto* popc = app.add_subcommand(
      "popularity", "which popularity bins drive unique matches");
  add_common(popc, &pop_common);
  add_rho_flags(popc, &pop_options, &pop_dataset, &pop_strategy);
  popc->add_option("--bins", bins, "popularity bins");

  // timeofday
  CommonOptions tod_common;
  RhoOptions tod_options;
  std::string tod_dataset, tod_strategy = "indexed";
  auto* tod = app.add_subcommand("timeofday",
                                 "time bins of uniquely matching leaks");
  add_common(tod, &tod_common);
  add_rho_flags(tod, &tod_options, &tod_dataset, &tod_strategy);

  // cohorts
  CommonOptions co_common;
  CohortOptions co_options;
  std::string co_dataset, co_strategy = "indexed";
  auto* co = app.add_subcommand(
      "cohorts", "mobility statistics of always- vs rarely-unique users");
  add_common(co, &co_common);
  co->add_option("-d,--dataset", co_dataset, "dataset container")->required();
  co->add_option("-k", co_options.k, "leak size");
  co->add_option("--repeat", co_options.repeat, "leak draws per user");
  co->add_option("--sample-size", co_options.sample_size, "sampled users");
  co->add_option("--strategy", co_strategy, "naive, pruned, or indexed");

  // uniqueness
  CommonOptions un_common;
  UniquenessOptions un_options;
  std::string un_dataset, un_mode = "strict";
  auto* un = app.add_subcommand("uniqueness",
                                "whole-trace uniqueness bounds");
  add_common(un, &un_common);
  un->add_option("-d,--dataset", un_dataset, "dataset container")->required();
  un->add_option("--mode", un_mode, "strict or relaxed");
  un->add_option("-r", un_options.r, "bbox overlap prefilter threshold");
  un->add_flag("--exhaustive", un_options.exhaustive,
               "compare every pair, no prefilter");
  un->add_flag("--mutual-equality", un_options.mutual_equality,
               "strict mode requires set equality");
  un->add_option("--sample-size", un_options.sample_size, "sampled traces");

  // selftest
  int st_workers = default_workers();
  auto* st = app.add_subcommand(
      "selftest", "oracle equivalence and invariants on an embedded corpus");
  st->add_option("--workers", st_workers, "worker threads");

  try {
    app.parse(argc, argv);

    if (gen->parsed()) {
      pop.seed = gen_common.seed;
      return run_generate(gen_common, pop, gen_dcfg, events_csv);
    }
    if (ing->parsed()) {
      if (*olat) build_options.origin_lat = ing_origin_lat;
      if (*olon) build_options.origin_lon = ing_origin_lon;
      return run_ingest(ing_common, ing_input, build_options);
    }
    if (ml->parsed()) {
      ml_options.strategy = parse_match_strategy(ml_strategy);
      return run_match_leaks(ml_common, ml_dataset, ml_options);
    }
    if (sw->parsed()) {
      sw_options.strategy = parse_match_strategy(sw_strategy);
      return run_sweep(sw_common, sw_dataset, sw_options);
    }
    if (popc->parsed()) {
      pop_options.strategy = parse_match_strategy(pop_strategy);
      return run_popularity(pop_common, pop_dataset, pop_options, bins);
    }
    if (tod->parsed()) {
      tod_options.strategy = parse_match_strategy(tod_strategy);
      return run_timeofday(tod_common, tod_dataset, tod_options);
    }
    if (co->parsed()) {
      co_options.strategy = parse_match_strategy(co_strategy);
      return run_cohorts(co_common, co_dataset, co_options);
    }
    if (un->parsed()) {
      un_options.mode = parse_trace_match_mode(un_mode);
      return run_uniqueness(un_common, un_dataset, un_options);
    }
    if (st->parsed()) {
      return run_selftest(st_workers);
    }
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
