#include "edm/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "edm/errors.hpp"

namespace edm::csv {

std::optional<std::size_t> Table::find(std::string_view column) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == column) return i;
  }
  return std::nullopt;
}

std::size_t Table::require(std::string_view column, std::string_view context) const {
  if (auto idx = find(column)) return *idx;
  std::string available;
  for (const auto& h : header) {
    if (!available.empty()) available += ", ";
    available += h;
  }
  throw SchemaError(std::string(context) + ": required column '" + std::string(column) +
                    "' absent; available columns: " + available);
}

namespace {

// Splits one record starting at pos; advances pos past the record terminator.
std::vector<std::string> next_record(std::string_view text, std::size_t& pos) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  while (pos < text.size()) {
    const char c = text[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
          continue;
        }
        quoted = false;
        ++pos;
        continue;
      }
      field.push_back(c);
      ++pos;
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
      ++pos;
      continue;
    }
    if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_started = false;
      ++pos;
      continue;
    }
    if (c == '\r' || c == '\n') {
      if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
      ++pos;
      fields.push_back(std::move(field));
      return fields;
    }
    field.push_back(c);
    field_started = true;
    ++pos;
  }
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace

Table parse(std::string_view text) {
  Table table;
  std::size_t pos = 0;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;
  // Comment block.
  while (pos < text.size() && text[pos] == '#') {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos + 1, end - pos - 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    table.comments.emplace_back(line);
    pos = end + 1;
  }
  if (pos >= text.size()) return table;
  table.header = next_record(text, pos);
  while (pos < text.size()) {
    auto record = next_record(text, pos);
    if (record.size() == 1 && record[0].empty()) continue;  // blank line
    table.rows.push_back(std::move(record));
  }
  return table;
}

Table read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("missing file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

struct Reader::Impl {
  std::ifstream in;
  std::vector<char> buffer = std::vector<char>(1 << 16);
  std::size_t pos = 0;
  std::size_t len = 0;
};

Reader::Reader(const std::filesystem::path& path) : impl_(std::make_unique<Impl>()) {
  impl_->in.open(path, std::ios::binary);
  if (!impl_->in) {
    throw SchemaError("missing file: " + path.string());
  }
  if (!next(header_)) header_.clear();
  if (!header_.empty() && header_[0].starts_with("\xEF\xBB\xBF")) header_[0].erase(0, 3);
}

Reader::~Reader() = default;

int Reader::peek() {
  if (impl_->pos == impl_->len) {
    impl_->in.read(impl_->buffer.data(), static_cast<std::streamsize>(impl_->buffer.size()));
    impl_->len = static_cast<std::size_t>(impl_->in.gcount());
    impl_->pos = 0;
    if (impl_->len == 0) return -1;
  }
  return static_cast<unsigned char>(impl_->buffer[impl_->pos]);
}

int Reader::get() {
  int c = peek();
  if (c >= 0) ++impl_->pos;
  return c;
}

std::optional<std::size_t> Reader::find(std::string_view column) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == column) return i;
  }
  return std::nullopt;
}

std::size_t Reader::require(std::string_view column, std::string_view context) const {
  Table t;
  t.header = header_;
  return t.require(column, context);
}

bool Reader::next(std::vector<std::string>& fields) {
  for (;;) {
    fields.clear();
    if (peek() < 0) return false;
    std::string field;
    bool quoted = false;
    bool started = false;
    for (;;) {
      int c = get();
      if (c < 0) {
        fields.push_back(std::move(field));
        break;
      }
      if (quoted) {
        if (c == '"') {
          if (peek() == '"') {
            get();
            field.push_back('"');
          } else {
            quoted = false;
          }
        } else {
          field.push_back(static_cast<char>(c));
        }
        continue;
      }
      if (c == '"' && !started) {
        quoted = started = true;
        continue;
      }
      if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
        started = false;
        continue;
      }
      if (c == '\r' || c == '\n') {
        if (c == '\r' && peek() == '\n') get();
        fields.push_back(std::move(field));
        break;
      }
      field.push_back(static_cast<char>(c));
      started = true;
    }
    if (fields.size() == 1 && fields[0].empty()) continue;
    return true;
  }
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {
std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}
}  // namespace

std::optional<double> parse_double(std::string_view field) {
  field = trim(field);
  if (field.empty()) return std::nullopt;
  if (field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) return std::nullopt;
  return value;
}

std::optional<long long> parse_int(std::string_view field) {
  field = trim(field);
  if (field.empty()) return std::nullopt;
  if (field.front() == '+') field.remove_prefix(1);
  long long value = 0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) return std::nullopt;
  return value;
}

}  // namespace edm::csv
