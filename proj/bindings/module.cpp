#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tracematch/analysis.hpp"
#include "tracematch/ingest.hpp"
#include "tracematch/matcher.hpp"
#include "tracematch/parallel.hpp"
#include "tracematch/synthetic.hpp"
#include "tracematch/uniqueness.hpp"

namespace py = pybind11;
using namespace tracematch;

PYBIND11_MODULE(_tracematch, m) {
  m.doc() = "spatio-temporal trace matching and uniqueness estimation";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

  py::class_<DiscretizationConfig>(m, "DiscretizationConfig")
      .def(py::init<>())
      .def_readwrite("delta_xy", &DiscretizationConfig::delta_xy)
      .def_readwrite("delta_t", &DiscretizationConfig::delta_t)
      .def_readwrite("day_start", &DiscretizationConfig::day_start)
      .def_readwrite("day_length", &DiscretizationConfig::day_length)
      .def("num_time_bins", &DiscretizationConfig::num_time_bins)
      .def("validate", &DiscretizationConfig::validate);

  py::class_<SyntheticPopulationConfig>(m, "SyntheticPopulationConfig")
      .def(py::init<>())
      .def_readwrite("num_users", &SyntheticPopulationConfig::num_users)
      .def_readwrite("num_sites", &SyntheticPopulationConfig::num_sites)
      .def_readwrite("zipf_exponent",
                     &SyntheticPopulationConfig::zipf_exponent)
      .def_readwrite("events_per_user_mean",
                     &SyntheticPopulationConfig::events_per_user_mean)
      .def_readwrite("events_per_user_dispersion",
                     &SyntheticPopulationConfig::events_per_user_dispersion)
      .def_readwrite("pool_size_mean",
                     &SyntheticPopulationConfig::pool_size_mean)
      .def_readwrite("anchor_affinity",
                     &SyntheticPopulationConfig::anchor_affinity)
      .def_readwrite("travel_radius_m",
                     &SyntheticPopulationConfig::travel_radius_m)
      .def_readwrite("seed", &SyntheticPopulationConfig::seed);

  py::class_<Dataset>(m, "Dataset")
      .def("__len__", &Dataset::size)
      .def_property_readonly("cfg", &Dataset::cfg)
      .def("user_id", &Dataset::user_id)
      .def("trace_tuples",
           [](const Dataset& d, std::size_t i) {
             std::vector<std::tuple<int, int, int>> out;
             for (const auto& t : d.trace(i).tuples) {
               out.emplace_back(t.cell.x, t.cell.y, t.bin);
             }
             return out;
           })
      .def("raw_event_count", &Dataset::raw_event_count)
      .def("num_distinct_cells", &Dataset::num_distinct_cells)
      .def("mean_events_per_user", &Dataset::mean_events_per_user)
      .def("coarsened", &Dataset::coarsened)
      .def("save", &Dataset::save)
      .def_static("load", &Dataset::load);

  m.def("generate_synthetic",
        [](const SyntheticPopulationConfig& pop,
           const DiscretizationConfig& dcfg, int workers) {
          return generate_synthetic(pop, dcfg, workers);
        },
        py::arg("population"), py::arg("discretization"),
        py::arg("workers") = 1);

  m.def("ingest_csv",
        [](const std::filesystem::path& path, double delta_xy,
           std::int64_t delta_t, double merge_threshold_m,
           std::optional<double> origin_lat,
           std::optional<double> origin_lon) {
          const auto records = read_event_csv(path);
          BuildOptions options;
          options.delta_xy = delta_xy;
          options.delta_t = delta_t;
          options.merge_threshold_m = merge_threshold_m;
          options.origin_lat = origin_lat;
          options.origin_lon = origin_lon;
          return build_traces(records, options).dataset;
        },
        py::arg("path"), py::arg("delta_xy") = 200.0, py::arg("delta_t") = 300,
        py::arg("merge_threshold_m") = 150.0,
        py::arg("origin_lat") = std::nullopt,
        py::arg("origin_lon") = std::nullopt);

  py::class_<RhoEstimate>(m, "RhoEstimate")
      .def_readonly("rho", &RhoEstimate::rho)
      .def_readonly("stddev", &RhoEstimate::stddev)
      .def_readonly("sample_count", &RhoEstimate::sample_count);

  py::class_<LeakRecord>(m, "LeakRecord")
      .def_readonly("leak_id", &LeakRecord::leak_id)
      .def_readonly("owner", &LeakRecord::owner)
      .def_readonly("k", &LeakRecord::k)
      .def_readonly("nu", &LeakRecord::nu)
      .def_readonly("xi", &LeakRecord::xi);

  py::class_<MatchReport>(m, "MatchReport")
      .def_readonly("records", &MatchReport::records)
      .def_readonly("rho_by_k", &MatchReport::rho_by_k)
      .def_readonly("skipped_short_traces", &MatchReport::skipped_short_traces)
      .def_readonly("dataset_size", &MatchReport::dataset_size);

  m.def("estimate_rho",
        [](const Dataset& dataset, std::size_t k, std::size_t sample_size,
           std::uint64_t seed, const std::string& strategy, int workers,
           std::size_t leaks_per_user) {
          RhoOptions options;
          options.k = k;
          options.sample_size = sample_size;
          options.seed = seed;
          options.strategy = parse_match_strategy(strategy);
          options.workers = workers;
          options.leaks_per_user = leaks_per_user;
          return estimate_rho(dataset, options);
        },
        py::arg("dataset"), py::arg("k") = 3, py::arg("sample_size") = 1000,
        py::arg("seed") = 0, py::arg("strategy") = "indexed",
        py::arg("workers") = 1, py::arg("leaks_per_user") = 1);

  py::class_<UniquenessRecord>(m, "UniquenessRecord")
      .def_readonly("user", &UniquenessRecord::user)
      .def_readonly("match_count", &UniquenessRecord::match_count)
      .def_readonly("skipped_by_prefilter",
                    &UniquenessRecord::skipped_by_prefilter);

  py::class_<UniquenessReport>(m, "UniquenessReport")
      .def_readonly("records", &UniquenessReport::records)
      .def_readonly("probability_unique",
                    &UniquenessReport::probability_unique)
      .def_readonly("total_skipped_by_prefilter",
                    &UniquenessReport::total_skipped_by_prefilter);

  m.def("estimate_trace_uniqueness",
        [](const Dataset& dataset, const std::string& mode, double r,
           bool exhaustive, bool mutual_equality, std::size_t sample_size,
           std::uint64_t seed, int workers) {
          UniquenessOptions options;
          options.mode = parse_trace_match_mode(mode);
          options.r = r;
          options.exhaustive = exhaustive;
          options.mutual_equality = mutual_equality;
          options.sample_size = sample_size;
          options.seed = seed;
          options.workers = workers;
          return estimate_trace_uniqueness(dataset, options);
        },
        py::arg("dataset"), py::arg("mode") = "strict", py::arg("r") = 0.5,
        py::arg("exhaustive") = false, py::arg("mutual_equality") = false,
        py::arg("sample_size") = 1000, py::arg("seed") = 0,
        py::arg("workers") = 1);

  py::class_<SweepGrid>(m, "SweepGrid")
      .def_readonly("delta_t_axis", &SweepGrid::delta_t_axis)
      .def_readonly("delta_xy_axis", &SweepGrid::delta_xy_axis)
      .def_readonly("k_list", &SweepGrid::k_list)
      .def_readonly("rho", &SweepGrid::rho)
      .def_readonly("sampled_users", &SweepGrid::sampled_users);

  m.def("sweep",
        [](const Dataset& dataset, std::vector<std::uint32_t> k_list,
           std::vector<std::int64_t> delta_t_list,
           std::vector<double> delta_xy_list, std::size_t sample_size,
           std::uint64_t seed, const std::string& strategy, int workers) {
          SweepOptions options;
          options.k_list = std::move(k_list);
          options.delta_t_list = std::move(delta_t_list);
          options.delta_xy_list = std::move(delta_xy_list);
          options.sample_size = sample_size;
          options.seed = seed;
          options.strategy = parse_match_strategy(strategy);
          options.workers = workers;
          return sweep(dataset, options);
        },
        py::arg("dataset"), py::arg("k_list"), py::arg("delta_t_list"),
        py::arg("delta_xy_list"), py::arg("sample_size") = 1000,
        py::arg("seed") = 0, py::arg("strategy") = "indexed",
        py::arg("workers") = 1);

  m.def("popularity_profile", &popularity_profile, py::arg("dataset"),
        py::arg("report"), py::arg("bins") = 100);
  m.def("time_of_day_profile", &time_of_day_profile, py::arg("report"),
        py::arg("cfg"));

  py::class_<MobilityStats>(m, "MobilityStats")
      .def_readonly("num_events", &MobilityStats::num_events)
      .def_readonly("num_unique_locations",
                    &MobilityStats::num_unique_locations)
      .def_readonly("bbox_area_km2", &MobilityStats::bbox_area_km2)
      .def_readonly("dist_per_slot_km", &MobilityStats::dist_per_slot_km)
      .def_readonly("total_distance_km", &MobilityStats::total_distance_km)
      .def_readonly("temporal_entropy_bits",
                    &MobilityStats::temporal_entropy_bits)
      .def_readonly("spatial_entropy_bits",
                    &MobilityStats::spatial_entropy_bits);

  m.def("mobility_stats",
        [](const Dataset& dataset, std::size_t user) {
          return mobility_stats(dataset.trace(user), dataset.cfg());
        },
        py::arg("dataset"), py::arg("user"));

  py::class_<CohortSummary>(m, "CohortSummary")
      .def_readonly("count", &CohortSummary::count)
      .def_readonly("mean", &CohortSummary::mean)
      .def_readonly("stddev", &CohortSummary::stddev);

  py::class_<CohortReport>(m, "CohortReport")
      .def_readonly("always_unique", &CohortReport::always_unique)
      .def_readonly("rarely_unique", &CohortReport::rarely_unique)
      .def_readonly("sampled_users", &CohortReport::sampled_users);

  m.def("cohort_compare",
        [](const Dataset& dataset, std::uint32_t k, std::uint32_t repeat,
           std::size_t sample_size, std::uint64_t seed,
           const std::string& strategy, int workers) {
          CohortOptions options;
          options.k = k;
          options.repeat = repeat;
          options.sample_size = sample_size;
          options.seed = seed;
          options.strategy = parse_match_strategy(strategy);
          options.workers = workers;
          return cohort_compare(dataset, options);
        },
        py::arg("dataset"), py::arg("k") = 3, py::arg("repeat") = 20,
        py::arg("sample_size") = 1000, py::arg("seed") = 0,
        py::arg("strategy") = "indexed", py::arg("workers") = 1);

  m.def("default_workers", &default_workers);
}
