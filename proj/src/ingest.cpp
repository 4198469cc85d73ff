#include "kpicast/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <tuple>

#include <json.hpp>

#include "kpicast/csv.hpp"

namespace kpicast {

namespace {

constexpr std::size_t kMaxMessages = 8;

void note(ParseStats& stats, std::size_t line_no, const std::string& what) {
  if (stats.messages.size() < kMaxMessages) {
    stats.messages.push_back("line " + std::to_string(line_no) + ": " + what);
  }
}

auto sample_tuple(const AggregatedSample& s) {
  return std::make_tuple(s.count, s.mean, s.std, s.first, s.last, s.max, s.min);
}

}  // namespace

bool AggregatedSample::consistent() const {
  return min <= max && min <= mean && mean <= max && min <= first && first <= max &&
         min <= last && last <= max;
}

KpiSeries::KpiSeries(SeriesKey key, HourStamp start,
                     std::vector<std::optional<AggregatedSample>> slots)
    : key_(std::move(key)), start_(start), slots_(std::move(slots)) {
  if (slots_.empty()) throw std::invalid_argument("series " + key_.to_string() + " has no slots");
}

std::size_t KpiSeries::gap_count() const {
  return static_cast<std::size_t>(
      std::count_if(slots_.begin(), slots_.end(), [](const auto& s) { return !s.has_value(); }));
}

double KpiSeries::gap_fraction() const {
  return static_cast<double>(gap_count()) / static_cast<double>(slots_.size());
}

KpiSeries KpiSeries::slice(std::size_t a, std::size_t b) const {
  if (a > b || b >= slots_.size()) {
    throw std::out_of_range("slice [" + std::to_string(a) + ", " + std::to_string(b) +
                            "] outside series of length " + std::to_string(slots_.size()));
  }
  return KpiSeries(key_, stamp(a),
                   {slots_.begin() + static_cast<std::ptrdiff_t>(a),
                    slots_.begin() + static_cast<std::ptrdiff_t>(b) + 1});
}

const std::array<std::string, kColumnCount>& canonical_columns() {
  static const std::array<std::string, kColumnCount> names = {
      "host_id", "kpi_name", "timestamp", "count", "mean", "std", "first", "last", "max", "min"};
  return names;
}

ColumnMapping::ColumnMapping() : names_(canonical_columns()) {}

void ColumnMapping::set(Column role, std::string header_name) {
  names_[static_cast<std::size_t>(role)] = std::move(header_name);
}

void ColumnMapping::set(const std::string& role, std::string header_name) {
  const auto& roles = canonical_columns();
  const auto it = std::find(roles.begin(), roles.end(), role);
  if (it == roles.end()) throw std::invalid_argument("unknown column role '" + role + "'");
  names_[static_cast<std::size_t>(it - roles.begin())] = std::move(header_name);
}

ColumnMapping ColumnMapping::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open column mapping '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IngestError("invalid column mapping '" + path + "': " + e.what());
  }
  if (!doc.is_object()) throw IngestError("column mapping must be a JSON object");
  ColumnMapping mapping;
  for (const auto& [role, value] : doc.items()) {
    if (!value.is_string()) throw IngestError("column mapping value for '" + role + "' must be a string");
    mapping.set(role, value.get<std::string>());
  }
  return mapping;
}

ParsedCorpus parse_corpus(std::istream& input, const ColumnMapping& mapping) {
  if (!input) throw IngestError("input stream is not readable");

  std::string line;
  if (!std::getline(input, line)) throw IngestError("input is empty: header row required");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = csv::split_line(csv::trim(line));
  if (!header) throw IngestError("unterminated quote in header");

  std::array<std::size_t, kColumnCount> index{};
  for (std::size_t role = 0; role < kColumnCount; ++role) {
    const auto& wanted = mapping.name(static_cast<Column>(role));
    const auto it = std::find_if(header->begin(), header->end(),
                                 [&](const std::string& h) { return csv::trim(h) == wanted; });
    if (it == header->end()) {
      throw IngestError("missing mandatory column '" + wanted + "' (role " +
                        canonical_columns()[role] + ")");
    }
    index[role] = static_cast<std::size_t>(it - header->begin());
  }
  const std::size_t needed = *std::max_element(index.begin(), index.end()) + 1;

  ParsedCorpus corpus;
  ParseStats& stats = corpus.stats;
  std::set<std::pair<SeriesKey, EpochSeconds>> seen;
  std::size_t line_no = 1;

  while (std::getline(input, line)) {
    ++line_no;
    const auto trimmed = csv::trim(line);
    if (trimmed.empty()) continue;
    ++stats.rows;

    const auto fields = csv::split_line(trimmed);
    if (!fields || fields->size() < needed) {
      ++stats.malformed;
      note(stats, line_no, "wrong number of fields");
      continue;
    }
    auto field = [&](Column c) -> std::string_view {
      return csv::trim((*fields)[index[static_cast<std::size_t>(c)]]);
    };

    SeriesKey key{std::string(field(Column::host_id)), std::string(field(Column::kpi_name))};
    if (key.host_id.empty() || key.kpi_name.empty()) {
      ++stats.malformed;
      note(stats, line_no, "empty host_id or kpi_name");
      continue;
    }

    EpochSeconds ts = 0;
    try {
      ts = parse_iso8601(field(Column::timestamp));
    } catch (const std::invalid_argument& e) {
      ++stats.malformed;
      note(stats, line_no, e.what());
      continue;
    }

    constexpr std::array<Column, 7> aggregates = {Column::count, Column::mean, Column::std,
                                                  Column::first, Column::last, Column::max,
                                                  Column::min};
    const bool all_empty = std::all_of(aggregates.begin(), aggregates.end(),
                                       [&](Column c) { return field(c).empty(); });
    if (all_empty) {
      ++stats.gap_rows;
      corpus.series.try_emplace(std::move(key));
      continue;
    }

    const auto count = csv::parse_integer(field(Column::count));
    std::array<std::optional<double>, 6> reals = {
        csv::parse_real(field(Column::mean)),  csv::parse_real(field(Column::std)),
        csv::parse_real(field(Column::first)), csv::parse_real(field(Column::last)),
        csv::parse_real(field(Column::max)),   csv::parse_real(field(Column::min))};
    const bool reals_ok = std::all_of(reals.begin(), reals.end(),
                                      [](const auto& v) { return v && std::isfinite(*v); });
    if (!count || *count < 0 || !reals_ok) {
      ++stats.malformed;
      note(stats, line_no, "unparsable or out-of-range aggregate");
      continue;
    }

    if (!seen.emplace(key, ts).second) {
      ++stats.duplicates;
      note(stats, line_no, "duplicate (key, timestamp); first occurrence kept");
      continue;
    }

    AggregatedSample sample{*count,     *reals[0], *reals[1], *reals[2],
                            *reals[3],  *reals[4], *reals[5]};
    if (!sample.consistent()) ++stats.inconsistent;
    corpus.series[std::move(key)].push_back(Record{ts, sample});
    ++stats.accepted;
  }
  if (input.bad()) throw IngestError("read error on input stream");
  return corpus;
}

ParsedCorpus parse_corpus_file(const std::string& path, const ColumnMapping& mapping) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open input '" + path + "'");
  return parse_corpus(in, mapping);
}

KpiSeries assemble_series(const SeriesKey& key, std::vector<Record> records,
                          AssembleReport* report) {
  if (records.empty()) throw std::invalid_argument("series " + key.to_string() + " has no samples");

  // Total order on (timestamp, sample) so the outcome is independent of input order.
  std::sort(records.begin(), records.end(), [](const Record& a, const Record& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return sample_tuple(a.sample) < sample_tuple(b.sample);
  });

  AssembleReport local;
  const HourStamp first = snap_to_hour(records.front().timestamp);
  const HourStamp last = snap_to_hour(records.back().timestamp);
  std::vector<std::optional<AggregatedSample>> slots(static_cast<std::size_t>(last - first) + 1);
  for (const auto& r : records) {
    bool snapped = false;
    const HourStamp h = snap_to_hour(r.timestamp, &snapped);
    if (snapped) ++local.snapped;
    auto& slot = slots[static_cast<std::size_t>(h - first)];
    if (slot) {
      ++local.collisions;
      continue;
    }
    slot = r.sample;
  }
  if (report) *report = local;
  return KpiSeries(key, first, std::move(slots));
}

void write_canonical_header(std::ostream& out) {
  const auto& names = canonical_columns();
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
  out << '\n';
}

void write_series_csv(std::ostream& out, const KpiSeries& series) {
  const std::string host = csv::escape(series.key().host_id);
  const std::string kpi = csv::escape(series.key().kpi_name);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& slot = series[i];
    if (!slot) continue;
    out << host << ',' << kpi << ',' << format_hour(series.stamp(i)) << ',' << slot->count << ','
        << csv::format_real(slot->mean) << ',' << csv::format_real(slot->std) << ','
        << csv::format_real(slot->first) << ',' << csv::format_real(slot->last) << ','
        << csv::format_real(slot->max) << ',' << csv::format_real(slot->min) << '\n';
  }
}

}  // namespace kpicast
