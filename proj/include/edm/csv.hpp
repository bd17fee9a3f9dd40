#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace edm::csv {

// Minimal RFC 4180 reader/writer: comma separated, double-quote escaping,
// quoted fields may span lines. Lines starting with '#' before the header are
// returned as comments, without the '#' and one following space.
struct Table {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name, or nullopt.
  std::optional<std::size_t> find(std::string_view column) const;
  /// Column index by name; throws SchemaError listing available columns.
  std::size_t require(std::string_view column, std::string_view context) const;
};

Table parse(std::string_view text);

/// Streaming reader for files too large to hold as a Table.
class Reader {
 public:
  /// Opens the file and reads the header; throws SchemaError naming a missing file.
  explicit Reader(const std::filesystem::path& path);
  ~Reader();
  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  const std::vector<std::string>& header() const { return header_; }
  std::optional<std::size_t> find(std::string_view column) const;
  std::size_t require(std::string_view column, std::string_view context) const;

  /// Reads the next non-blank record into fields; false at end of file.
  bool next(std::vector<std::string>& fields);

 private:
  int get();
  int peek();

  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::vector<std::string> header_;
};

/// Reads a file; throws SchemaError naming the file when it is missing.
Table read_file(const std::filesystem::path& path);

std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

/// Strict numeric parse of the whole field (surrounding spaces allowed).
std::optional<double> parse_double(std::string_view field);
std::optional<long long> parse_int(std::string_view field);

}  // namespace edm::csv
