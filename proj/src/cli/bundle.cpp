#include <charconv>
#include <fstream>
#include <system_error>

#include "gwt/cli.hpp"

namespace gwt::cli {

namespace fs = std::filesystem;

namespace {

void append_double(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

double parse_double(std::string_view field, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    throw ConfigError("curves.csv line " + std::to_string(line) + ": bad number '" +
                      std::string(field) + "'");
  return v;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.close();
  if (!out) throw std::runtime_error("failed to write " + path.string());
}

}  // namespace

std::string format_curves_csv(const std::vector<CurveRow>& rows) {
  std::string out = "label,log_x,log_neg_log_survival\n";
  out.reserve(out.size() + rows.size() * 48);
  for (const auto& r : rows) {
    out += r.label;
    out += ',';
    append_double(out, r.log_x);
    out += ',';
    append_double(out, r.log_neg_log_survival);
    out += '\n';
  }
  return out;
}

std::vector<CurveRow> parse_curves_csv(std::string_view text) {
  std::vector<CurveRow> rows;
  std::size_t line_no = 0;
  bool header = true;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (header) {
      if (line != "label,log_x,log_neg_log_survival")
        throw ConfigError("curves.csv: unexpected header");
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string_view::npos ? c1 : c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos)
      throw ConfigError("curves.csv line " + std::to_string(line_no) + ": expected 3 fields");
    rows.push_back({std::string(line.substr(0, c1)),
                    parse_double(line.substr(c1 + 1, c2 - c1 - 1), line_no),
                    parse_double(line.substr(c2 + 1), line_no)});
  }
  return rows;
}

std::string dump_summary(const nlohmann::json& summary) { return summary.dump(2) + "\n"; }

void write_bundle(const fs::path& dir, const nlohmann::json& summary,
                  const std::vector<CurveRow>& curves, const nlohmann::json& run_info) {
  fs::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> files = {
      {"summary.json", dump_summary(summary)},
      {"curves.csv", format_curves_csv(curves)},
      {"run_info.json", run_info.dump(2) + "\n"},
  };
  std::vector<fs::path> staged;
  try {
    for (const auto& [name, content] : files) {
      const fs::path tmp = dir / ("." + name + ".tmp");
      staged.push_back(tmp);
      write_file(tmp, content);
    }
    for (std::size_t i = 0; i < files.size(); ++i) fs::rename(staged[i], dir / files[i].first);
  } catch (...) {
    std::error_code ec;
    for (const auto& p : staged) fs::remove(p, ec);
    throw;
  }
}

}  // namespace gwt::cli
