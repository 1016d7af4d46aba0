#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "ridelink/session/history.hpp"

namespace ridelink::service {

struct JournalLoad {
  std::vector<session::HistoryEvent> events;
  std::vector<std::string> warnings;
};

/// Append-only JSON-lines journal of HistoryEvents.
class Journal {
 public:
  /// Reads every record. A final line without its newline that does not
  /// parse is dropped with a warning (and cut from the file so appends stay
  /// well-formed); any other unreadable line throws Error{CorruptJournal}.
  /// A missing file is an empty journal.
  static JournalLoad load(const std::string& path);

  /// Opens for appending. An empty path keeps the journal in memory only.
  explicit Journal(std::string path);

  /// Writes and flushes one line.
  void append(const session::HistoryEvent& ev);
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
};

session::History replay(const std::vector<session::HistoryEvent>& events);

}  // namespace ridelink::service
