#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "edm/csv.hpp"
#include "edm/digest.hpp"
#include "edm/errors.hpp"
#include "edm/experiments.hpp"

namespace edm {

namespace fs = std::filesystem;

namespace {

std::string cell_text(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

std::string render_markdown(const ResultTable& t, const std::string& provenance) {
  std::ostringstream s;
  s << "<!-- provenance: " << provenance << " -->\n\n";
  s << "**" << t.caption << "**\n\n|";
  s << " |";
  for (const auto& c : t.col_labels) s << ' ' << c << " |";
  s << "\n|---|";
  for (std::size_t i = 0; i < t.col_labels.size(); ++i) s << "---:|";
  s << '\n';
  for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
    s << "| " << t.row_labels[r] << " |";
    for (double v : t.cells[r]) s << ' ' << cell_text(v) << " |";
    s << '\n';
  }
  if (!t.notes.empty()) {
    s << '\n';
    for (const auto& n : t.notes) s << "- " << n << '\n';
  }
  return s.str();
}

std::string render_csv(const ResultTable& t, const std::string& provenance) {
  std::ostringstream s;
  s << "# provenance: " << provenance << '\n';
  s << "# caption: " << t.caption << '\n';
  for (const auto& n : t.notes) s << "# note: " << n << '\n';
  std::vector<std::string> header = {""};
  header.insert(header.end(), t.col_labels.begin(), t.col_labels.end());
  csv::write_row(s, header);
  for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
    std::vector<std::string> row = {t.row_labels[r]};
    for (double v : t.cells[r]) row.push_back(cell_text(v));
    csv::write_row(s, row);
  }
  return s.str();
}

ResultTable parse_result_csv(const std::string& text, const std::string& name) {
  const auto table = csv::parse(text);
  ResultTable t;
  t.name = name;
  for (const auto& c : table.comments) {
    auto body = c.substr(c.find_first_not_of("# "));
    if (body.rfind("caption: ", 0) == 0) t.caption = body.substr(9);
    else if (body.rfind("note: ", 0) == 0) t.notes.push_back(body.substr(6));
  }
  if (table.header.empty()) throw SchemaError("result table has no header");
  t.col_labels.assign(table.header.begin() + 1, table.header.end());
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw SchemaError("result table is not rectangular");
    t.row_labels.push_back(row[0]);
    std::vector<double> cells;
    for (std::size_t i = 1; i < row.size(); ++i) {
      if (row[i].empty()) {
        cells.push_back(std::nan(""));
        continue;
      }
      auto v = csv::parse_double(row[i]);
      if (!v) throw SchemaError("result table cell '" + row[i] + "' is not a number");
      cells.push_back(*v);
    }
    t.cells.push_back(std::move(cells));
  }
  return t;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["tool_version"] = tool_version;
  j["config_path"] = config_path;
  j["config"] = config.to_json();
  j["config_sha256"] = config_digest();
  j["seed"] = config.seed;
  j["inputs"] = nlohmann::json::array();
  for (const auto& [label, digest] : inputs) j["inputs"].push_back({{"dataset", label}, {"sha256", digest}});
  return j;
}

std::string RunManifest::config_digest() const { return sha256_hex(config.to_json().dump()); }

std::vector<fs::path> emit_report(const ExperimentOutput& output, const RunManifest& manifest, const fs::path& dir) {
  const fs::path root = dir / std::string(to_string(output.experiment));
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec || !fs::is_directory(root)) throw Error("cannot create output directory " + root.string());

  std::string inputs;
  for (const auto& [label, digest] : manifest.inputs) inputs += " " + label + "=" + digest.substr(0, 16);
  const std::string provenance = "config_sha256=" + manifest.config_digest() +
                                 " seed=" + std::to_string(manifest.config.seed) + " version=" + manifest.tool_version +
                                 (inputs.empty() ? "" : " inputs:" + inputs);

  std::vector<fs::path> written;
  nlohmann::json files = nlohmann::json::array();
  auto emit = [&](const std::string& rel, const std::string& content) {
    const fs::path p = root / rel;
    write_file(p, content);
    written.push_back(p);
    files.push_back({{"path", rel}, {"sha256", sha256_hex(content)}});
  };
  for (const auto& t : output.tables) {
    emit(t.name + ".md", render_markdown(t, provenance));
    emit(t.name + ".csv", render_csv(t, provenance));
  }
  for (const auto& [rel, content] : output.files) {
    if (rel.size() > 4 && rel.substr(rel.size() - 4) == ".csv") {
      emit(rel, "# provenance: " + provenance + "\n" + content);
    } else if (rel.size() > 5 && rel.substr(rel.size() - 5) == ".json") {
      nlohmann::json wrapped = {{"provenance", provenance}, {"content", nlohmann::json::parse(content)}};
      emit(rel, wrapped.dump(2) + "\n");
    } else {
      emit(rel, content);
    }
  }
  nlohmann::json m = manifest.to_json();
  m["experiment"] = std::string(to_string(output.experiment));
  m["files"] = files;
  m["leakage"] = {{"checks", output.leakage_checks}, {"violations", output.leakage_violations}};
  const fs::path mp = root / "manifest.json";
  write_file(mp, m.dump(2) + "\n");
  written.push_back(mp);
  return written;
}

}  // namespace edm
