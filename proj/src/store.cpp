#include "footprint/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "footprint/model.hpp"
#include "footprint/serialize.hpp"
#include "footprint/timeline.hpp"

namespace footprint {

namespace {

std::atomic<unsigned long> g_temp_counter{0};

std::string unique_suffix() {
  return std::to_string(::getpid()) + "-" + std::to_string(g_temp_counter.fetch_add(1));
}

[[noreturn]] void throw_errno(const std::string& what, const fs::path& p) {
  throw StoreError(what + " " + p.string() + ": " + std::strerror(errno));
}

void fsync_path(const fs::path& p, bool directory) {
  int fd = ::open(p.c_str(), directory ? (O_RDONLY | O_DIRECTORY) : O_RDONLY);
  if (fd < 0) throw_errno("open", p);
  if (::fsync(fd) != 0) {
    ::close(fd);
    throw_errno("fsync", p);
  }
  ::close(fd);
}

void write_and_sync(const fs::path& path, std::string_view bytes) {
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw_errno("create", path);
  const char* p = bytes.data();
  std::size_t left = bytes.size();
  while (left > 0) {
    ssize_t n = ::write(fd, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      throw_errno("write", path);
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    throw_errno("fsync", path);
  }
  if (::close(fd) != 0) throw_errno("close", path);
}

bool is_temp_name(const fs::path& p) {
  const auto name = p.filename().string();
  return name.size() > 4 && name.ends_with(".tmp");
}

}  // namespace

void atomic_write(const fs::path& path, std::string_view bytes) {
  const fs::path tmp = path.parent_path() / ("." + path.filename().string() + "." + unique_suffix() + ".tmp");
  write_and_sync(tmp, bytes);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw StoreError("rename " + tmp.string() + " -> " + path.string() + " failed");
  }
  fsync_path(path.parent_path(), true);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool valid_session_id(std::string_view id) {
  if (id.size() < 2 || id.size() > 32 || id[0] != 's') return false;
  for (char c : id.substr(1)) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

Store::Store(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_ / "days");
  recover();
}

fs::path Store::day_dir(Date date) const { return root_ / "days" / format_date(date); }

bool Store::has_day(Date date) const {
  return fs::exists(day_dir(date) / std::string(kDayLogDoc));
}

std::vector<Date> Store::days() const {
  std::vector<Date> out;
  for (const auto& entry : fs::directory_iterator(root_ / "days")) {
    if (!entry.is_directory()) continue;
    auto d = parse_date(entry.path().filename().string());
    if (d && has_day(*d)) out.push_back(*d);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void Store::publish_day(Date date, const DayArtifacts& artifacts, bool replace) {
  const fs::path target = day_dir(date);
  if (fs::exists(target) && !replace) {
    throw AlreadyIngested("day " + format_date(date) + " is already ingested");
  }

  const fs::path staging = root_ / ".staging" / (format_date(date) + "-" + unique_suffix());
  fs::create_directories(staging / "media");
  fs::create_directories(staging / "sessions");
  for (const auto& [name, bytes] : artifacts.media) write_and_sync(staging / "media" / name, bytes);
  for (const auto& [name, bytes] : artifacts.documents) write_and_sync(staging / name, bytes);
  if (fs::exists(target / "sessions")) {
    for (const auto& entry : fs::directory_iterator(target / "sessions")) {
      if (entry.is_regular_file() && !is_temp_name(entry.path())) {
        write_and_sync(staging / "sessions" / entry.path().filename(), read_file(entry.path()));
      }
    }
  }
  fsync_path(staging / "media", true);
  fsync_path(staging / "sessions", true);
  fsync_path(staging, true);

  fs::path trash;
  if (fs::exists(target)) {
    trash = root_ / ".trash" / (format_date(date) + "-" + unique_suffix());
    fs::create_directories(trash.parent_path());
    fs::rename(target, trash);
  }
  fs::rename(staging, target);
  fsync_path(root_ / "days", true);
  if (!trash.empty()) fs::remove_all(trash);
}

std::optional<std::string> Store::read_document(Date date, std::string_view name) const {
  const fs::path p = day_dir(date) / std::string(name);
  if (!fs::exists(p)) return std::nullopt;
  return read_file(p);
}

std::optional<fs::path> Store::media_file(Date date, std::string_view file_name) const {
  const fs::path p = day_dir(date) / "media" / std::string(file_name);
  if (file_name.empty() || file_name.find('/') != std::string_view::npos || !fs::is_regular_file(p)) {
    return std::nullopt;
  }
  return p;
}

std::vector<std::string> Store::session_ids(Date date) const {
  std::vector<std::string> ids;
  const fs::path dir = day_dir(date) / "sessions";
  if (!fs::exists(dir)) return ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto& p = entry.path();
    if (p.extension() == ".json" && valid_session_id(p.stem().string())) ids.push_back(p.stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::optional<ReconstructionSession> Store::load_session(Date date, std::string_view session_id) const {
  if (!valid_session_id(session_id)) return std::nullopt;
  const fs::path p = day_dir(date) / "sessions" / (std::string(session_id) + ".json");
  if (!fs::exists(p)) return std::nullopt;
  return session_from_json(Json::parse(read_file(p)));
}

void Store::save_session(Date date, const ReconstructionSession& session) {
  if (!valid_session_id(session.id())) throw StoreError("invalid session id " + session.id());
  const fs::path dir = day_dir(date) / "sessions";
  fs::create_directories(dir);
  atomic_write(dir / (session.id() + ".json"), canonical_dump(to_json(session)));
}

void Store::recover() {
  // A replacement interrupted after the old day moved to .trash: put it back.
  const fs::path trash = root_ / ".trash";
  if (fs::exists(trash)) {
    for (const auto& entry : fs::directory_iterator(trash)) {
      const auto name = entry.path().filename().string();
      auto date = parse_date(std::string_view(name).substr(0, 10));
      if (date && !fs::exists(day_dir(*date))) fs::rename(entry.path(), day_dir(*date));
    }
    fs::remove_all(trash);
  }
  fs::remove_all(root_ / ".staging");

  std::vector<fs::path> leftovers;
  for (const auto& entry : fs::recursive_directory_iterator(root_ / "days")) {
    if (entry.is_regular_file() && is_temp_name(entry.path())) leftovers.push_back(entry.path());
  }
  for (const auto& p : leftovers) {
    std::error_code ec;
    fs::remove(p, ec);
  }
}

std::vector<std::string> verify_store(const fs::path& root) {
  std::vector<std::string> problems;
  const fs::path days = root / "days";
  if (!fs::exists(days)) return {"missing " + days.string()};

  for (const auto& entry : fs::directory_iterator(days)) {
    const std::string where = entry.path().filename().string();
    auto date = parse_date(where);
    if (!entry.is_directory() || !date) {
      problems.push_back(where + ": unexpected entry");
      continue;
    }
    try {
      auto day = daylog_from_json(Json::parse(read_file(entry.path() / std::string(kDayLogDoc))));
      if (day.window.date != *date) problems.push_back(where + ": daylog date mismatch");
      for (const auto& v : validate_day(day)) problems.push_back(where + ": daylog " + v.field + " " + v.rule);

      auto analysis = analysis_from_json(Json::parse(read_file(entry.path() / std::string(kAnalysisDoc))));
      for (std::size_t i = 1; i < analysis.stay_points.size(); ++i) {
        if (analysis.stay_points[i].arrival < analysis.stay_points[i - 1].departure) {
          problems.push_back(where + ": overlapping stay points");
        }
      }

      auto timeline = timeline_from_json(Json::parse(read_file(entry.path() / std::string(kTimelineDoc))));
      for (Channel c : kAllChannels) {
        for (const auto& p : check_partition(timeline.track(c), day.window)) problems.push_back(where + ": " + p);
      }

      const fs::path sessions = entry.path() / "sessions";
      if (fs::exists(sessions)) {
        for (const auto& s : fs::directory_iterator(sessions)) {
          if (is_temp_name(s.path())) {
            problems.push_back(where + ": leftover temp file " + s.path().filename().string());
            continue;
          }
          // session_from_json re-checks ordering, overlap, ratings and day bounds.
          auto session = session_from_json(Json::parse(read_file(s.path())));
          if (session.id() + ".json" != s.path().filename().string()) {
            problems.push_back(where + ": session file name mismatch " + s.path().filename().string());
          }
          if (session.day().date != *date) problems.push_back(where + ": session for another day");
        }
      }
    } catch (const std::exception& e) {
      problems.push_back(where + ": " + e.what());
    }
  }
  return problems;
}

}  // namespace footprint
