#include "datapop/trace.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <unordered_map>

#include "datapop/csv.hpp"
#include "datapop/error.hpp"

namespace datapop {
namespace {

void check_id(std::string_view id) {
  if (id.empty()) throw ValidationError("empty dataset_id");
  if (id.find_first_of(",\n\r#") != std::string_view::npos) {
    throw ValidationError("dataset_id '" + std::string(id) + "' contains a reserved character");
  }
}

}  // namespace

Trace::Trace(std::vector<AccessEvent> events, std::vector<DatasetMeta> metas, int horizon_weeks)
    : horizon_(horizon_weeks) {
  if (horizon_ < 1) throw ValidationError("horizon_weeks must be >= 1");

  std::ranges::sort(metas, {}, &DatasetMeta::dataset_id);
  for (std::size_t i = 0; i < metas.size(); ++i) {
    const auto& m = metas[i];
    check_id(m.dataset_id);
    if (i > 0 && metas[i - 1].dataset_id == m.dataset_id) {
      throw ValidationError("duplicate dataset_id '" + m.dataset_id + "'");
    }
    if (m.size_bytes <= 0) throw ValidationError("dataset '" + m.dataset_id + "': size_bytes must be > 0");
    if (m.initial_replicas < 1) {
      throw ValidationError("dataset '" + m.dataset_id + "': initial_replicas must be >= 1");
    }
    if (m.creation_week < 0) throw ValidationError("dataset '" + m.dataset_id + "': negative creation_week");
  }
  metas_ = std::move(metas);

  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(metas_.size());
  for (std::size_t i = 0; i < metas_.size(); ++i) index.emplace(metas_[i].dataset_id, i);

  std::vector<std::pair<std::size_t, AccessEvent>> keyed;
  keyed.reserve(events.size());
  for (auto& e : events) {
    const auto it = index.find(e.dataset_id);
    if (it == index.end()) throw ValidationError("event for unknown dataset '" + e.dataset_id + "'");
    const auto& meta = metas_[it->second];
    if (e.count < 1) throw ValidationError("dataset '" + e.dataset_id + "': event count must be >= 1");
    if (e.week < 0 || e.week >= horizon_) {
      throw ValidationError("dataset '" + e.dataset_id + "': event week " + std::to_string(e.week) +
                            " outside [0, " + std::to_string(horizon_) + ")");
    }
    if (e.week < meta.creation_week) {
      throw ValidationError("dataset '" + e.dataset_id + "': event at week " + std::to_string(e.week) +
                            " before creation_week " + std::to_string(meta.creation_week));
    }
    keyed.emplace_back(it->second, std::move(e));
  }
  std::ranges::sort(keyed, [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second.week < b.second.week;
  });

  events_.reserve(keyed.size());
  offsets_.assign(metas_.size() + 1, 0);
  for (auto& [ds, e] : keyed) {
    if (!events_.empty() && events_.back().dataset_id == e.dataset_id && events_.back().week == e.week) {
      events_.back().count += e.count;
    } else {
      events_.push_back(std::move(e));
      ++offsets_[ds + 1];
    }
  }
  for (std::size_t i = 0; i < metas_.size(); ++i) offsets_[i + 1] += offsets_[i];
}

std::optional<std::size_t> Trace::index_of(std::string_view dataset_id) const {
  const auto it = std::ranges::lower_bound(metas_, dataset_id, {}, &DatasetMeta::dataset_id);
  if (it == metas_.end() || it->dataset_id != dataset_id) return std::nullopt;
  return static_cast<std::size_t>(it - metas_.begin());
}

std::span<const AccessEvent> Trace::events_of(std::size_t dataset) const {
  return std::span(events_).subspan(offsets_[dataset], offsets_[dataset + 1] - offsets_[dataset]);
}

std::vector<double> Trace::weekly_counts(std::size_t dataset, int begin, int end) const {
  std::vector<double> counts(static_cast<std::size_t>(std::max(0, end - begin)), 0.0);
  for (const auto& e : events_of(dataset)) {
    if (e.week >= begin && e.week < end) counts[static_cast<std::size_t>(e.week - begin)] += e.count;
  }
  return counts;
}

Trace read_trace(std::istream& events, std::istream& metas, const std::string& events_source,
                 const std::string& metas_source) {
  std::vector<DatasetMeta> meta_rows;
  {
    csv::Reader reader(metas, metas_source);
    reader.expect_header(kMetasHeader);
    std::unordered_map<std::string, std::size_t> seen;
    while (auto row = reader.next()) {
      if (row->size() != 6) reader.fail("expected 6 fields, got " + std::to_string(row->size()));
      DatasetMeta m;
      m.dataset_id = std::string((*row)[0]);
      m.creation_week = static_cast<int>(reader.to_int((*row)[1], "creation_week"));
      m.dtype = static_cast<int>(reader.to_int((*row)[2], "dtype"));
      m.extension = static_cast<int>(reader.to_int((*row)[3], "extension"));
      m.size_bytes = reader.to_int((*row)[4], "size_bytes");
      m.initial_replicas = static_cast<int>(reader.to_int((*row)[5], "initial_replicas"));
      if (m.dataset_id.empty()) reader.fail("empty dataset_id");
      if (m.size_bytes <= 0) reader.fail("size_bytes must be > 0");
      if (m.initial_replicas < 1) reader.fail("initial_replicas must be >= 1");
      if (m.creation_week < 0) reader.fail("creation_week must be >= 0");
      if (!seen.emplace(m.dataset_id, reader.line()).second) {
        reader.fail("duplicate dataset_id '" + m.dataset_id + "'");
      }
      meta_rows.push_back(std::move(m));
    }
  }

  std::vector<AccessEvent> event_rows;
  int horizon = 0;
  std::optional<int> declared;
  {
    csv::Reader reader(events, events_source);
    reader.expect_header(kEventsHeader);
    if (auto h = csv::comment_value(reader.comments(), "horizon_weeks")) {
      declared = static_cast<int>(reader.to_int(*h, "horizon_weeks"));
    }
    while (auto row = reader.next()) {
      if (row->size() != 3) reader.fail("expected 3 fields, got " + std::to_string(row->size()));
      AccessEvent e;
      e.dataset_id = std::string((*row)[0]);
      e.week = static_cast<int>(reader.to_int((*row)[1], "week"));
      e.count = reader.to_int((*row)[2], "count");
      if (e.week < 0) reader.fail("week must be >= 0");
      if (e.count < 1) reader.fail("count must be >= 1");
      horizon = std::max(horizon, e.week + 1);
      event_rows.push_back(std::move(e));
    }
  }
  if (declared) {
    if (*declared < horizon) {
      throw ValidationError(events_source + ": declared horizon_weeks=" + std::to_string(*declared) +
                            " but events reach week " + std::to_string(horizon - 1));
    }
    horizon = *declared;
  }
  if (horizon == 0) throw ValidationError(events_source + ": no events and no declared horizon_weeks");
  return Trace(std::move(event_rows), std::move(meta_rows), horizon);
}

Trace import_trace(const std::filesystem::path& events_path, const std::filesystem::path& metas_path) {
  std::ifstream events(events_path);
  if (!events) throw Error("cannot open events file " + events_path.string());
  std::ifstream metas(metas_path);
  if (!metas) throw Error("cannot open metas file " + metas_path.string());
  return read_trace(events, metas, events_path.string(), metas_path.string());
}

void write_events(const Trace& trace, std::ostream& out, const std::string& comment) {
  out << (comment.empty() ? std::string("#") : comment) << " horizon_weeks=" << trace.horizon_weeks()
      << '\n';
  out << kEventsHeader << '\n';
  for (const auto& e : trace.events()) out << e.dataset_id << ',' << e.week << ',' << e.count << '\n';
}

void write_metas(const Trace& trace, std::ostream& out, const std::string& comment) {
  if (!comment.empty()) out << comment << '\n';
  out << kMetasHeader << '\n';
  for (const auto& m : trace.metas()) {
    out << m.dataset_id << ',' << m.creation_week << ',' << m.dtype << ',' << m.extension << ','
        << m.size_bytes << ',' << m.initial_replicas << '\n';
  }
}

}  // namespace datapop
