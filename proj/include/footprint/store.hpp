#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "footprint/reconstruction.hpp"
#include "footprint/time.hpp"

namespace footprint {

namespace fs = std::filesystem;

/// Writes `bytes` to a sibling temp file, fsyncs it, renames it over `path`,
/// then fsyncs the directory. Readers see the old or the new file, never a mix.
void atomic_write(const fs::path& path, std::string_view bytes);

std::string read_file(const fs::path& path);

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AlreadyIngested : public StoreError {
 public:
  using StoreError::StoreError;
};

inline constexpr std::string_view kDayLogDoc = "daylog.json";
inline constexpr std::string_view kAnalysisDoc = "analysis.json";
inline constexpr std::string_view kTimelineDoc = "timeline.json";

/// Artifacts of one ingested day, written together.
struct DayArtifacts {
  std::map<std::string, std::string> documents;  // file name -> bytes
  std::map<std::string, std::string> media;      // file name under media/ -> bytes
};

/// On-disk layout:
///   <root>/days/<date>/{daylog,analysis,timeline}.json
///   <root>/days/<date>/sessions/<session_id>.json
///   <root>/days/<date>/media/<file>
/// A day is published by renaming a fully written staging directory into
/// place, so it appears (or is replaced) as a unit.
class Store {
 public:
  /// Creates the layout if needed and repairs interrupted writes.
  explicit Store(fs::path root);

  const fs::path& root() const { return root_; }
  fs::path day_dir(Date date) const;

  bool has_day(Date date) const;
  std::vector<Date> days() const;

  /// Throws AlreadyIngested when the day exists and `replace` is false.
  /// On replace, existing sessions are carried over.
  void publish_day(Date date, const DayArtifacts& artifacts, bool replace);

  std::optional<std::string> read_document(Date date, std::string_view name) const;
  std::optional<fs::path> media_file(Date date, std::string_view file_name) const;

  std::vector<std::string> session_ids(Date date) const;
  std::optional<ReconstructionSession> load_session(Date date, std::string_view session_id) const;
  void save_session(Date date, const ReconstructionSession& session);

  /// Removes temp files and staging leftovers, restores a day whose
  /// replacement was interrupted. Idempotent.
  void recover();

 private:
  fs::path root_;
};

/// Session ids are `s` + digits; anything else is rejected before touching disk.
bool valid_session_id(std::string_view id);

/// Re-reads every persisted document and checks the invariants of what it
/// holds. Returns one line per problem; empty means the store is sound.
std::vector<std::string> verify_store(const fs::path& root);

}  // namespace footprint
