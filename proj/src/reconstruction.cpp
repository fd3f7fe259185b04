#include "footprint/reconstruction.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "footprint/csv.hpp"
#include "footprint/serialize.hpp"

namespace footprint {

std::string_view to_string(ReconstructionErrorKind kind) {
  switch (kind) {
    case ReconstructionErrorKind::chronology_violation: return "ChronologyViolation";
    case ReconstructionErrorKind::out_of_day: return "OutOfDay";
    case ReconstructionErrorKind::session_finalized: return "SessionFinalized";
    case ReconstructionErrorKind::empty_session: return "EmptySession";
    case ReconstructionErrorKind::invalid_episode: return "InvalidEpisode";
  }
  return "?";
}

ReconstructionError::ReconstructionError(ReconstructionErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

namespace {

const std::set<std::string_view> kFixedColumns{"episode_id", "start", "end", "activity", "notes"};

bool valid_scale_name(std::string_view name) {
  if (name.empty() || kFixedColumns.contains(name)) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-';
  });
}

[[noreturn]] void fail(ReconstructionErrorKind kind, const std::string& detail) {
  throw ReconstructionError(kind, detail);
}

}  // namespace

ReconstructionSession::ReconstructionSession(std::string session_id, DayWindow day)
    : id_(std::move(session_id)), day_(day) {}

void ReconstructionSession::check_episode(const Episode& e) const {
  if (!(e.start < e.end)) fail(ReconstructionErrorKind::invalid_episode, "start must precede end");
  if (e.activity.empty()) fail(ReconstructionErrorKind::invalid_episode, "activity is required");
  for (const auto& [scale, rating] : e.affect) {
    if (!valid_scale_name(scale)) {
      fail(ReconstructionErrorKind::invalid_episode, "bad affect scale name '" + scale + "'");
    }
    if (rating < kMinRating || rating > kMaxRating) {
      fail(ReconstructionErrorKind::invalid_episode,
           "rating for '" + scale + "' must be within 1..7");
    }
  }
  if (e.start < day_.start || e.end > day_.end) {
    fail(ReconstructionErrorKind::out_of_day, "episode must lie within " + format_date(day_.date));
  }
}

std::string ReconstructionSession::next_episode_id() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "e%04zu", episodes_.size() + 1);
  return buf;
}

const Episode& ReconstructionSession::append_episode(Episode episode) {
  if (finalized()) fail(ReconstructionErrorKind::session_finalized, "session " + id_ + " is finalized");
  check_episode(episode);
  if (!episodes_.empty() && episode.start < episodes_.back().end) {
    fail(ReconstructionErrorKind::chronology_violation,
         "episode starts at " + format_timestamp(episode.start) + ", before the previous end " +
             format_timestamp(episodes_.back().end));
  }
  if (episode.episode_id.empty()) episode.episode_id = next_episode_id();
  for (const auto& e : episodes_) {
    if (e.episode_id == episode.episode_id) {
      fail(ReconstructionErrorKind::invalid_episode, "duplicate episode_id " + episode.episode_id);
    }
  }
  episodes_.push_back(std::move(episode));
  return episodes_.back();
}

const Episode& ReconstructionSession::amend_last_episode(Episode replacement) {
  if (finalized()) fail(ReconstructionErrorKind::session_finalized, "session " + id_ + " is finalized");
  if (episodes_.empty()) fail(ReconstructionErrorKind::empty_session, "nothing to amend");
  check_episode(replacement);
  if (episodes_.size() >= 2 && replacement.start < episodes_[episodes_.size() - 2].end) {
    fail(ReconstructionErrorKind::chronology_violation,
         "amended episode starts before the previous episode ends");
  }
  replacement.episode_id = episodes_.back().episode_id;
  episodes_.back() = std::move(replacement);
  return episodes_.back();
}

GapSummary ReconstructionSession::gap_summary() const {
  GapSummary g;
  Timestamp cursor = day_.start;
  auto add = [&](Timestamp until) {
    if (cursor < until) {
      g.gaps.emplace_back(cursor, until);
      g.total_s += to_seconds(until - cursor);
    }
  };
  for (const auto& e : episodes_) {
    add(e.start);
    cursor = std::max(cursor, e.end);
  }
  add(day_.end);
  g.count = g.gaps.size();
  return g;
}

GapSummary ReconstructionSession::finalize() {
  if (finalized()) fail(ReconstructionErrorKind::session_finalized, "session " + id_ + " is finalized");
  state_ = SessionState::finalized;
  return gap_summary();
}

ReconstructionSession ReconstructionSession::restore(std::string session_id, DayWindow day,
                                                     std::vector<Episode> episodes,
                                                     SessionState state) {
  ReconstructionSession s(std::move(session_id), day);
  for (auto& e : episodes) {
    if (e.episode_id.empty()) fail(ReconstructionErrorKind::invalid_episode, "stored episode without id");
    s.append_episode(std::move(e));
  }
  s.state_ = state;
  return s;
}

std::string export_episodes(const ReconstructionSession& session, ExportFormat format) {
  if (format == ExportFormat::json) {
    nlohmann::json doc;
    doc["session_id"] = session.id();
    doc["date"] = format_date(session.day().date);
    doc["state"] = session.finalized() ? "finalized" : "open";
    doc["episodes"] = nlohmann::json::array();
    for (const auto& e : session.episodes()) doc["episodes"].push_back(to_json(e));
    return doc.dump(2) + "\n";
  }

  std::set<std::string> scales;
  for (const auto& e : session.episodes()) {
    for (const auto& [name, rating] : e.affect) scales.insert(name);
  }
  std::vector<std::string> header{"episode_id", "start", "end", "activity", "notes"};
  header.insert(header.end(), scales.begin(), scales.end());
  std::string out = csv::join(header) + "\n";
  for (const auto& e : session.episodes()) {
    std::vector<std::string> row{e.episode_id, format_timestamp(e.start), format_timestamp(e.end),
                                 e.activity, e.notes};
    for (const auto& scale : scales) {
      auto it = e.affect.find(scale);
      row.push_back(it == e.affect.end() ? "" : std::to_string(it->second));
    }
    out += csv::join(row) + "\n";
  }
  return out;
}

std::vector<Episode> import_episodes(std::string_view text, ExportFormat format) {
  std::vector<Episode> out;
  if (format == ExportFormat::json) {
    auto doc = nlohmann::json::parse(text);
    for (const auto& e : doc.at("episodes")) out.push_back(episode_from_json(e));
    return out;
  }

  auto records = csv::read(text);
  if (records.empty()) throw std::runtime_error("episode csv: missing header");
  const auto& header = records.front().fields;
  if (header.size() < 5 || header[0] != "episode_id" || header[1] != "start" || header[2] != "end" ||
      header[3] != "activity" || header[4] != "notes") {
    throw std::runtime_error("episode csv: unexpected header");
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r].fields;
    const std::string where = "episode csv line " + std::to_string(records[r].line);
    if (f.size() != header.size()) throw std::runtime_error(where + ": wrong column count");
    Episode e;
    e.episode_id = f[0];
    auto start = parse_timestamp(f[1]);
    auto end = parse_timestamp(f[2]);
    if (!start || !end) throw std::runtime_error(where + ": bad timestamp");
    e.start = *start;
    e.end = *end;
    e.activity = f[3];
    e.notes = f[4];
    for (std::size_t c = 5; c < f.size(); ++c) {
      if (f[c].empty()) continue;
      int rating = 0;
      auto [p, ec] = std::from_chars(f[c].data(), f[c].data() + f[c].size(), rating);
      if (ec != std::errc{} || p != f[c].data() + f[c].size()) {
        throw std::runtime_error(where + ": bad rating");
      }
      e.affect[header[c]] = rating;
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace footprint
