#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fedpso/types.hpp"

namespace fedpso {

struct Row {
  std::int64_t hour = 0;  // epoch hours
  int series = 0;         // source client / machine id
  std::vector<double> features;
  double target = 0.0;  // regression value, or class index for classification
};

struct TimeSeriesDataset {
  Task task = Task::kRegression;
  int feature_width = 1;
  int num_classes = 1;
  std::vector<std::string> feature_names;
  std::vector<Row> rows;  // sorted by (series, hour), strictly increasing hours per series
};

// One training example: a lookback window of feature rows and the target of
// the row immediately after the window.
struct Sample {
  std::vector<double> window;  // lookback x feature_width, row-major
  double target = 0.0;
};

struct SampleSet {
  Task task = Task::kRegression;
  int lookback = 24;
  int feature_width = 1;
  int num_classes = 1;
  double target_scale = 1.0;  // multiplies normalized RMSE back into data units
  std::vector<Sample> samples;
};

// A client's private windowed slice. training_reads counts how many times
// the shard was handed to a local training pass (data-locality accounting).
struct ClientShard {
  int client_id = 0;
  SampleSet data;
  long source_rows = 0;
  mutable long training_reads = 0;
};

struct PartitionedDataset {
  Task task = Task::kRegression;
  int lookback = 24;
  int feature_width = 1;
  int num_classes = 1;
  std::vector<ClientShard> shards;
  SampleSet test;
  long test_source_rows = 0;
  long total_source_rows = 0;
  std::vector<double> feature_mean, feature_std;  // over training rows
  double target_mean = 0.0, target_std = 1.0;
};

// --- synthetic generators ---------------------------------------------------

// Hourly car counts per client: daily + weekly sinusoids, a client offset,
// seeded noise, clipped at zero.
TimeSeriesDataset traffic_rows(std::uint64_t seed, int n_clients, int rows_per_client);

struct TelemetryFailure {
  int machine = 0;
  std::int64_t hour = 0;
  int component = 0;  // 1..4
};

struct TelemetryRows {
  TimeSeriesDataset dataset;
  std::vector<TelemetryFailure> failures;
};

inline constexpr std::array<double, 4> kDefaultHazard{0.0025, 0.0025, 0.0025, 0.0025};

// Hourly volt/rotate/pressure/vibration per machine with seeded drift,
// per-component failure hazards, 24h-before-failure labels and trailing
// 24h rolling-mean features.
TelemetryRows telemetry_rows(std::uint64_t seed, int n_machines, int hours,
                             const std::array<double, 4>& hazard = kDefaultHazard);

PartitionedDataset gen_traffic(std::uint64_t seed, int n_clients, int rows_per_client,
                               double test_fraction = 0.2, int lookback = 24);

PartitionedDataset gen_telemetry(std::uint64_t seed, int n_machines, int hours,
                                 double test_fraction = 0.2, int lookback = 24,
                                 const std::array<double, 4>& hazard = kDefaultHazard);

// --- CSV ingestion ------------------------------------------------------------

struct CsvSchema {
  Task task = Task::kRegression;
  std::vector<std::string> columns;

  static CsvSchema traffic();    // timestamp,count
  static CsvSchema telemetry();  // timestamp,machine_id,volt,rotate,pressure,vibration,failure
};

// Throws std::runtime_error naming the file, column or 1-based line number
// on any malformed input. Rows come back sorted by (series, hour).
TimeSeriesDataset load_csv(const std::string& path, const CsvSchema& schema);

// For telemetry ingests: rows whose failure column named a component mark a
// failure event at that hour. Derives the labels (every row within the 24
// hours before a component-c failure gets class c, nearest failure wins),
// then appends trailing rolling-mean features per channel.
void prepare_telemetry(TimeSeriesDataset& ds, int lag_hours = 24);

// --- windowing & partitioning --------------------------------------------------

// series.size() must exceed lookback; sample i covers rows [i, i+lookback)
// and takes its target from row i+lookback.
std::vector<Sample> make_windows(const std::vector<Row>& series, int lookback = 24);

// Splits a single series into k contiguous shards; the tail test_fraction of
// each shard's row range is held out into the shared test set.
PartitionedDataset partition(const TimeSeriesDataset& ds, int k, double test_fraction,
                             int lookback = 24);

// One shard per source series (client = machine/sensor).
PartitionedDataset partition_by_series(const TimeSeriesDataset& ds, double test_fraction,
                                       int lookback = 24);

}  // namespace fedpso
