#include "ridelink/service/journal.hpp"

#include <filesystem>
#include <sstream>

#include "ridelink/error.hpp"
#include "ridelink/service/json_io.hpp"

namespace ridelink::service {

JournalLoad Journal::load(const std::string& path) {
  JournalLoad out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::stringstream ss;
  ss << in.rdbuf();
  const auto text = ss.str();

  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    ++line_no;
    const auto nl = text.find('\n', pos);
    const bool complete = nl != std::string::npos;
    const auto line = text.substr(pos, complete ? nl - pos : std::string::npos);
    try {
      if (!line.empty()) out.events.push_back(history_event_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      if (complete) {
        throw Error(Errc::CorruptJournal, path + " line " + std::to_string(line_no) + ": " + e.what());
      }
      out.warnings.push_back(path + ": dropped truncated final record at line " + std::to_string(line_no));
      std::filesystem::resize_file(path, pos);
      break;
    }
    if (!complete) {
      // A parseable record that only lacks its newline: keep it, finish the line.
      std::ofstream fix(path, std::ios::app | std::ios::binary);
      fix << '\n';
      break;
    }
    pos = nl + 1;
  }
  return out;
}

Journal::Journal(std::string path) : path_(std::move(path)) {
  if (path_.empty()) return;
  out_.open(path_, std::ios::app | std::ios::binary);
  if (!out_) throw Error(Errc::CorruptJournal, "cannot open " + path_ + " for writing");
}

void Journal::append(const session::HistoryEvent& ev) {
  if (path_.empty()) return;
  out_ << to_json(ev).dump() << '\n';
  out_.flush();
}

session::History replay(const std::vector<session::HistoryEvent>& events) {
  session::History h;
  for (const auto& ev : events) h.apply(ev);
  return h;
}

}  // namespace ridelink::service
