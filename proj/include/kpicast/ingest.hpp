#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kpicast/time.hpp"

namespace kpicast {

/// Thrown for unrecoverable input problems (unreadable stream, bad header).
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One hour of a KPI, summarized by seven aggregates over the sub-hour
/// measurements. Values are in KPI-native units.
struct AggregatedSample {
  long long count = 0;
  double mean = 0.0;
  double std = 0.0;
  double first = 0.0;
  double last = 0.0;
  double max = 0.0;
  double min = 0.0;

  friend bool operator==(const AggregatedSample&, const AggregatedSample&) = default;

  /// True when min <= max and mean/first/last lie within [min, max].
  bool consistent() const;
};

struct SeriesKey {
  std::string host_id;
  std::string kpi_name;

  friend auto operator<=>(const SeriesKey&, const SeriesKey&) = default;
  std::string to_string() const { return host_id + "/" + kpi_name; }
};

/// Hour-aligned sequence of slots for one (host, kpi) pair; slot i is the
/// hour labelled start + i. A disengaged optional marks a gap.
class KpiSeries {
 public:
  KpiSeries(SeriesKey key, HourStamp start, std::vector<std::optional<AggregatedSample>> slots);

  const SeriesKey& key() const { return key_; }
  HourStamp start() const { return start_; }
  HourStamp end() const { return start_ + (static_cast<std::int64_t>(slots_.size()) - 1); }
  std::size_t size() const { return slots_.size(); }
  const std::vector<std::optional<AggregatedSample>>& slots() const { return slots_; }
  const std::optional<AggregatedSample>& operator[](std::size_t i) const { return slots_[i]; }
  HourStamp stamp(std::size_t i) const { return start_ + static_cast<std::int64_t>(i); }

  std::size_t gap_count() const;
  double gap_fraction() const;

  /// Inclusive slice [a, b]; yields exactly b - a + 1 slots.
  KpiSeries slice(std::size_t a, std::size_t b) const;

 private:
  SeriesKey key_;
  HourStamp start_;
  std::vector<std::optional<AggregatedSample>> slots_;
};

struct Record {
  EpochSeconds timestamp = 0;
  AggregatedSample sample;
};

enum class Column : std::size_t {
  host_id,
  kpi_name,
  timestamp,
  count,
  mean,
  std,
  first,
  last,
  max,
  min,
};
inline constexpr std::size_t kColumnCount = 10;

/// Maps each role to the header name that carries it. Defaults to the
/// canonical header.
class ColumnMapping {
 public:
  ColumnMapping();

  const std::string& name(Column role) const { return names_[static_cast<std::size_t>(role)]; }
  void set(Column role, std::string header_name);

  /// Accepts a role name such as "mean" or "host_id".
  void set(const std::string& role, std::string header_name);

  /// Reads a JSON object of the form {"mean": "avg_value", ...}.
  static ColumnMapping from_json_file(const std::string& path);

 private:
  std::array<std::string, kColumnCount> names_;
};

/// Canonical role names in column order.
const std::array<std::string, kColumnCount>& canonical_columns();

struct ParseStats {
  std::size_t rows = 0;
  std::size_t accepted = 0;
  std::size_t malformed = 0;
  std::size_t duplicates = 0;
  /// Rows whose seven aggregate fields are all empty: explicit missing hours.
  std::size_t gap_rows = 0;
  std::size_t inconsistent = 0;
  /// Up to a handful of diagnostics for the first rejected rows.
  std::vector<std::string> messages;
};

struct ParsedCorpus {
  /// Keys seen in the input, including ones that only carried gap rows.
  std::map<SeriesKey, std::vector<Record>> series;
  ParseStats stats;
};

/// Parses delimited KPI telemetry. Rows are deduplicated by (key, timestamp),
/// keeping the first occurrence.
ParsedCorpus parse_corpus(std::istream& input, const ColumnMapping& mapping = {});
ParsedCorpus parse_corpus_file(const std::string& path, const ColumnMapping& mapping = {});

struct AssembleReport {
  std::size_t snapped = 0;
  std::size_t collisions = 0;
};

/// Builds the hourly grid spanning the earliest to the latest record; absent
/// hours become gaps. Off-hour timestamps are floored to their hour. The
/// result does not depend on the order of `records`.
KpiSeries assemble_series(const SeriesKey& key, std::vector<Record> records,
                          AssembleReport* report = nullptr);

/// Writes the canonical header and one row per non-gap slot.
void write_canonical_header(std::ostream& out);
void write_series_csv(std::ostream& out, const KpiSeries& series);

}  // namespace kpicast
