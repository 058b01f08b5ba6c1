#include "analogy/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "analogy/error.hpp"
#include "analogy/text.hpp"

namespace analogy {

namespace {

constexpr double kZ95 = 1.959963985;
const char* const kNumericColumns[] = {"k", "n", "acc", "ci_low", "ci_high", "acc_3dp", "ci_low_3dp", "ci_high_3dp"};

std::string exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fixed3(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3f", round3(x));
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "not a number: '" + s + "'");
  }
}

AccuracyCell make_cell(std::vector<std::string> key, long k, long n, const AggregateOptions& o) {
  AccuracyCell c;
  c.key = std::move(key);
  c.k = k;
  c.n = n;
  c.acc = static_cast<double>(k) / static_cast<double>(n);
  c.ci = binomial_ci(k, n, o.level, o.method);
  return c;
}

}  // namespace

double z_for_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidCounts, "confidence level must be in (0, 1)");
  if (level == 0.95) return kZ95;
  return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + level / 2.0);
}

Interval binomial_ci(long k, long n, double level, CiMethod method) {
  if (n < 1 || k < 0 || k > n) {
    throw Error(ErrorCode::InvalidCounts, "need 0 <= k <= n and n >= 1, got k=" + std::to_string(k) + " n=" + std::to_string(n));
  }
  const double z = z_for_level(level);
  const double p = static_cast<double>(k) / static_cast<double>(n);
  const double nn = static_cast<double>(n);
  if (method == CiMethod::Wald) return wald_from_rate(p, n, level);
  const double denom = 1.0 + z * z / nn;
  const double centre = (p + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

Interval wald_from_rate(double acc, long n, double level) {
  if (n < 1 || acc < 0.0 || acc > 1.0) throw Error(ErrorCode::InvalidCounts, "rate outside [0, 1] or n < 1");
  const double half = z_for_level(level) * std::sqrt(acc * (1.0 - acc) / static_cast<double>(n));
  return {std::max(0.0, acc - half), std::min(1.0, acc + half)};
}

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

AccuracyTable aggregate(const std::vector<RunRecord>& records, const std::vector<std::string>& group_by,
                        const AggregateOptions& options) {
  std::map<std::vector<std::string>, std::pair<long, long>> counts;
  for (const auto& r : records) {
    if (r.failed || options.rejected.count(r.respondent)) continue;
    if (options.exclude_attention_checks) {
      auto it = r.tags.find("task");
      if (it != r.tags.end() && it->second == "attention_check") continue;
    }
    std::vector<std::string> key;
    for (const auto& tag : group_by) {
      auto it = r.tags.find(tag);
      if (it == r.tags.end()) throw Error(ErrorCode::UnknownTag, "record " + r.item_id + " has no tag '" + tag + "'");
      key.push_back(it->second);
    }
    auto& [k, n] = counts[key];
    ++n;
    if (r.correct) ++k;
  }
  AccuracyTable t;
  t.groups = group_by;
  for (auto& [key, kn] : counts) t.cells.push_back(make_cell(key, kn.first, kn.second, options));
  return t;
}

std::string emit_csv(const AccuracyTable& t) {
  std::ostringstream out;
  for (const auto& g : t.groups) out << csv_field(g) << ",";
  for (std::size_t i = 0; i < std::size(kNumericColumns); ++i) out << (i ? "," : "") << kNumericColumns[i];
  out << "\n";
  for (const auto& c : t.cells) {
    for (const auto& v : c.key) out << csv_field(v) << ",";
    out << c.k << "," << c.n << "," << exact(c.acc) << "," << exact(c.ci.low) << "," << exact(c.ci.high) << ","
        << fixed3(c.acc) << "," << fixed3(c.ci.low) << "," << fixed3(c.ci.high) << "\n";
  }
  return out.str();
}

AccuracyTable parse_csv(std::string_view text) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in{std::string(text)};
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw Error(ErrorCode::ParseError, "empty CSV");
  const auto header = csv_split(lines[0]);
  const std::size_t numeric = std::size(kNumericColumns);
  if (header.size() < numeric) throw Error(ErrorCode::ParseError, "CSV header is too short");
  const std::size_t groups = header.size() - numeric;
  for (std::size_t i = 0; i < numeric; ++i) {
    if (header[groups + i] != kNumericColumns[i]) throw Error(ErrorCode::ParseError, "unexpected CSV column " + header[groups + i]);
  }
  AccuracyTable t;
  t.groups.assign(header.begin(), header.begin() + static_cast<std::ptrdiff_t>(groups));
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto f = csv_split(lines[li]);
    if (f.size() != header.size()) throw Error(ErrorCode::ParseError, "CSV row " + std::to_string(li) + " has wrong width");
    AccuracyCell c;
    c.key.assign(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(groups));
    c.k = static_cast<long>(parse_double(f[groups]));
    c.n = static_cast<long>(parse_double(f[groups + 1]));
    c.acc = parse_double(f[groups + 2]);
    c.ci = {parse_double(f[groups + 3]), parse_double(f[groups + 4])};
    t.cells.push_back(std::move(c));
  }
  return t;
}

nlohmann::json emit_json(const AccuracyTable& t) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : t.cells) {
    cells.push_back({{"key", c.key},
                     {"k", c.k},
                     {"n", c.n},
                     {"acc", c.acc},
                     {"ci", {c.ci.low, c.ci.high}},
                     {"rounded", {{"acc", round3(c.acc)}, {"ci", {round3(c.ci.low), round3(c.ci.high)}}}}});
  }
  return {{"groups", t.groups}, {"cells", cells}};
}

AccuracyTable parse_json(const nlohmann::json& j) {
  try {
    AccuracyTable t;
    t.groups = j.at("groups").get<std::vector<std::string>>();
    for (const auto& cj : j.at("cells")) {
      AccuracyCell c;
      c.key = cj.at("key").get<std::vector<std::string>>();
      c.k = cj.at("k").get<long>();
      c.n = cj.at("n").get<long>();
      c.acc = cj.at("acc").get<double>();
      c.ci = {cj.at("ci").at(0).get<double>(), cj.at("ci").at(1).get<double>()};
      t.cells.push_back(std::move(c));
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("accuracy table: ") + e.what());
  }
}

TableFormat table_format_from_string(std::string_view name) {
  if (name == "csv") return TableFormat::Csv;
  if (name == "json") return TableFormat::Json;
  throw Error(ErrorCode::ConfigInvalid, "format must be csv or json");
}

void write_table(const std::filesystem::path& path, const AccuracyTable& t, TableFormat format) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << (format == TableFormat::Csv ? emit_csv(t) : emit_json(t).dump(2) + "\n");
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

AccuracyTable read_table(const std::filesystem::path& path, TableFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (format == TableFormat::Csv) return parse_csv(text);
  try {
    return parse_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

Pivot pivot(const AccuracyTable& t, std::size_t row_group, std::size_t col_group) {
  if (row_group >= t.groups.size() || col_group >= t.groups.size()) {
    throw Error(ErrorCode::UnknownTag, "pivot axis outside the table's groups");
  }
  Pivot p;
  for (const auto& c : t.cells) {
    if (std::find(p.row_labels.begin(), p.row_labels.end(), c.key[row_group]) == p.row_labels.end()) {
      p.row_labels.push_back(c.key[row_group]);
    }
    if (std::find(p.col_labels.begin(), p.col_labels.end(), c.key[col_group]) == p.col_labels.end()) {
      p.col_labels.push_back(c.key[col_group]);
    }
  }
  p.cells.assign(p.row_labels.size(), std::vector<std::optional<AccuracyCell>>(p.col_labels.size()));
  for (const auto& c : t.cells) {
    const auto r = std::find(p.row_labels.begin(), p.row_labels.end(), c.key[row_group]) - p.row_labels.begin();
    const auto col = std::find(p.col_labels.begin(), p.col_labels.end(), c.key[col_group]) - p.col_labels.begin();
    auto& slot = p.cells[r][col];
    if (!slot) {
      slot = c;
      slot->key = {c.key[row_group], c.key[col_group]};
    } else {
      // Collapse any remaining groups into the two-way margin.
      slot->k += c.k;
      slot->n += c.n;
      slot->acc = static_cast<double>(slot->k) / static_cast<double>(slot->n);
      slot->ci = binomial_ci(slot->k, slot->n);
    }
  }
  return p;
}

std::string format_cell(const AccuracyCell& c) {
  return fixed3(c.acc) + " [" + fixed3(c.ci.low) + ", " + fixed3(c.ci.high) + "]";
}

std::string render_pivot(const Pivot& p) {
  std::ostringstream out;
  for (const auto& c : p.col_labels) out << "\t" << c;
  out << "\n";
  for (std::size_t r = 0; r < p.row_labels.size(); ++r) {
    out << p.row_labels[r];
    for (const auto& cell : p.cells[r]) out << "\t" << (cell ? format_cell(*cell) : "-");
    out << "\n";
  }
  return out.str();
}

std::set<std::string> rejected_sessions(const std::filesystem::path& sessions_jsonl) {
  std::set<std::string> out;
  std::ifstream in(sessions_jsonl);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.value("status", "") == "rejected") out.insert(j.at("session_id").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, sessions_jsonl.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace analogy
