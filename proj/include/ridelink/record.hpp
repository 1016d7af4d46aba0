#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ridelink {

using Fields = std::vector<std::pair<std::string, std::string>>;

/// One line of the structured-text grammar shared by vehicle transcripts and
/// the service push channel:
///
///   <iso-timestamp> <channel> <name> <key=value ...>
///
/// Values that are empty or contain whitespace, '"', '\\' or '=' are written
/// as double-quoted strings with \" \\ \n \r \t escapes.
struct Record {
  std::string timestamp;
  std::string channel;  // RX, TX, STATE, DIRECTIVE, API ...
  std::string name;
  Fields fields;

  const std::string* get(std::string_view key) const;
  friend bool operator==(const Record&, const Record&) = default;
};

std::string format_record(const Record& r);
std::string format_record(std::int64_t wall_ms, std::string_view channel, std::string_view name,
                          const Fields& fields = {});

/// Inverse of format_record. Returns nullopt on malformed input.
std::optional<Record> parse_record(std::string_view line);

std::string quote_value(std::string_view v);

}  // namespace ridelink
