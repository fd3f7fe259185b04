#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "footprint/time.hpp"

namespace footprint {

/// One reconstructed activity. Affect ratings are 1..7 per named scale.
struct Episode {
  std::string episode_id;
  Timestamp start{};
  Timestamp end{};
  std::string activity;
  std::string notes;
  std::map<std::string, int> affect;
  Timestamp created_at{};
  bool operator==(const Episode&) const = default;
};

inline constexpr int kMinRating = 1;
inline constexpr int kMaxRating = 7;

enum class SessionState { open, finalized };

enum class ReconstructionErrorKind {
  chronology_violation,
  out_of_day,
  session_finalized,
  empty_session,
  invalid_episode,
};

std::string_view to_string(ReconstructionErrorKind kind);

class ReconstructionError : public std::runtime_error {
 public:
  ReconstructionError(ReconstructionErrorKind kind, const std::string& detail);
  ReconstructionErrorKind kind() const { return kind_; }

 private:
  ReconstructionErrorKind kind_;
};

struct GapSummary {
  std::size_t count = 0;
  double total_s = 0.0;
  std::vector<std::pair<Timestamp, Timestamp>> gaps;
  bool operator==(const GapSummary&) const = default;
};

/// Episodes are entered in time order and never overlap. Mutators give the
/// strong guarantee: on a thrown ReconstructionError the session is unchanged.
class ReconstructionSession {
 public:
  ReconstructionSession(std::string session_id, DayWindow day);

  const std::string& id() const { return id_; }
  const DayWindow& day() const { return day_; }
  const std::vector<Episode>& episodes() const { return episodes_; }
  SessionState state() const { return state_; }
  bool finalized() const { return state_ == SessionState::finalized; }

  /// Appends; episode_id is assigned when left empty.
  const Episode& append_episode(Episode episode);
  /// Replaces the final episode, keeping its episode_id.
  const Episode& amend_last_episode(Episode replacement);
  GapSummary finalize();

  /// Uncovered stretches of the day between episodes.
  GapSummary gap_summary() const;

  /// Rebuilds a session from stored parts, re-checking every invariant.
  static ReconstructionSession restore(std::string session_id, DayWindow day,
                                       std::vector<Episode> episodes, SessionState state);

  bool operator==(const ReconstructionSession&) const = default;

 private:
  void check_episode(const Episode& e) const;
  std::string next_episode_id() const;

  std::string id_;
  DayWindow day_;
  std::vector<Episode> episodes_;
  SessionState state_ = SessionState::open;
};

enum class ExportFormat { csv, json };

/// CSV: `episode_id,start,end,activity,notes,<scales sorted>`; JSON mirrors Episode.
std::string export_episodes(const ReconstructionSession& session, ExportFormat format);

/// Inverse of export_episodes. CSV carries no created_at; it comes back as epoch.
std::vector<Episode> import_episodes(std::string_view text, ExportFormat format);

}  // namespace footprint
