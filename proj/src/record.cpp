#include "ridelink/record.hpp"

#include "ridelink/clock.hpp"

namespace ridelink {
namespace {

bool needs_quotes(std::string_view v) {
  if (v.empty()) return true;
  for (char c : v) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '"' || c == '\\' || c == '=') return true;
  }
  return false;
}

}  // namespace

const std::string* Record::get(std::string_view key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::string quote_value(std::string_view v) {
  if (!needs_quotes(v)) return std::string(v);
  std::string out = "\"";
  for (char c : v) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

std::string format_record(const Record& r) {
  std::string out = r.timestamp + " " + r.channel + " " + r.name;
  for (const auto& [k, v] : r.fields) out += " " + k + "=" + quote_value(v);
  return out;
}

std::string format_record(std::int64_t wall_ms, std::string_view channel, std::string_view name,
                          const Fields& fields) {
  return format_record(Record{iso_timestamp(wall_ms), std::string(channel), std::string(name), fields});
}

std::optional<Record> parse_record(std::string_view line) {
  std::size_t pos = 0;
  auto word = [&]() -> std::optional<std::string> {
    const auto end = line.find(' ', pos);
    const auto w = line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    if (w.empty()) return std::nullopt;
    pos = end == std::string_view::npos ? line.size() : end + 1;
    return std::string(w);
  };

  Record r;
  auto ts = word();
  auto ch = word();
  auto name = word();
  if (!ts || !ch || !name) return std::nullopt;
  r.timestamp = *ts;
  r.channel = *ch;
  r.name = *name;

  while (pos < line.size()) {
    const auto eq = line.find('=', pos);
    if (eq == std::string_view::npos || eq == pos) return std::nullopt;
    std::string key(line.substr(pos, eq - pos));
    if (key.find(' ') != std::string::npos) return std::nullopt;
    pos = eq + 1;
    std::string value;
    if (pos < line.size() && line[pos] == '"') {
      ++pos;
      bool closed = false;
      while (pos < line.size()) {
        const char c = line[pos++];
        if (c == '"') {
          closed = true;
          break;
        }
        if (c != '\\') {
          value += c;
          continue;
        }
        if (pos >= line.size()) return std::nullopt;
        switch (line[pos++]) {
          case '"': value += '"'; break;
          case '\\': value += '\\'; break;
          case 'n': value += '\n'; break;
          case 'r': value += '\r'; break;
          case 't': value += '\t'; break;
          default: return std::nullopt;
        }
      }
      if (!closed) return std::nullopt;
    } else {
      const auto end = line.find(' ', pos);
      value = std::string(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
      pos = end == std::string_view::npos ? line.size() : end;
    }
    if (pos < line.size()) {
      if (line[pos] != ' ') return std::nullopt;
      ++pos;
    }
    r.fields.emplace_back(std::move(key), std::move(value));
  }
  return r;
}

}  // namespace ridelink
