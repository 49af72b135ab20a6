#include "robofruit/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "robofruit/error.hpp"

namespace robofruit::metrics {

using orchestrator::Outcome;
using orchestrator::TrialLog;

std::string_view to_string(FailureClass f) {
  switch (f) {
    case FailureClass::Detection: return "detection";
    case FailureClass::CutCommand: return "cut_command";
    case FailureClass::GripCut: return "grip_cut";
    case FailureClass::Validation: return "validation";
    case FailureClass::Position: return "position";
  }
  return "detection";
}

namespace {

std::optional<double> percent(int num, int den) {
  if (den == 0) return std::nullopt;
  return 100.0 * num / den;
}

std::string pct(const std::optional<double>& v) {
  return v ? fmt::format("{:.1f}", *v) : std::string("NA");
}

std::string pct_sign(const std::optional<double>& v) {
  return v ? pct(v) + "%" : std::string("NA");
}

}  // namespace

int HarvestMetrics::failure_total() const {
  return std::accumulate(failures.begin(), failures.end(), 0);
}

void HarvestMetrics::derive_rates() {
  S_r = percent(N_s, N_p);
  SD_r = percent(N_s, N_d);
  SD_r_alt = percent(N_d, N_p);
  detection_ratio = percent(N_d, N_p);
  attempts_per_fruit =
      N_p == 0 ? std::nullopt : std::optional<double>(static_cast<double>(A_t) / N_p);
  const int total = failure_total();
  for (std::size_t i = 0; i < kFailureClasses; ++i) {
    failure_shares[i] = percent(failures[i], total);
  }
}

HarvestMetrics compute_metrics(const std::vector<TrialLog>& logs) {
  if (logs.empty()) throw Error(ErrorKind::EmptyInput, "no trial logs");
  HarvestMetrics m;
  std::vector<double> trial_times;
  std::vector<double> pick_times;
  for (const auto& log : logs) {
    ++m.trials;
    m.N_a += log.total_fruit;
    m.N_p += log.pluckable;
    m.N_d += log.detected_pluckable;
    m.N_s += log.successes;
    m.A_t += log.attempt_count();
    m.false_positive_attempts += log.false_positive_attempts;
    m.failures[0] += log.count(Outcome::DetectionMiss);
    m.failures[1] += log.count(Outcome::CutCommandFailure);
    m.failures[2] += log.count(Outcome::GripCutFailure);
    m.failures[3] += log.count(Outcome::ValidationFailure);
    m.failures[4] += log.count(Outcome::PositionFailure);
    trial_times.push_back(log.total_time);
    for (const auto& a : log.attempts) {
      if (a.outcome == Outcome::Success && a.target_pluckable) pick_times.push_back(a.duration);
    }
  }
  // Sorted summation keeps the result independent of log order.
  std::sort(trial_times.begin(), trial_times.end());
  std::sort(pick_times.begin(), pick_times.end());
  m.total_time = std::accumulate(trial_times.begin(), trial_times.end(), 0.0);
  if (!pick_times.empty()) {
    m.mean_pick_time = std::accumulate(pick_times.begin(), pick_times.end(), 0.0) /
                       static_cast<double>(pick_times.size());
  }
  m.derive_rates();
  return m;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return cells;
}

template <typename T>
T parse_number(const std::string& s, std::size_t line_no) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::ParseError,
                fmt::format("line {}: '{}' is not a valid number", line_no, s));
  }
  return v;
}

const std::vector<std::string>& table_columns() {
  static const std::vector<std::string> cols{
      "trial_no",      "total_fruit", "pluckable", "not_detected",
      "cut_cmd_fail",  "grip_cut_fail", "valid_fail", "pos_fail",
      "success",       "attempts",    "time_s"};
  return cols;
}

TableRow parse_row(const std::vector<std::string>& c, std::size_t line_no, bool totals) {
  TableRow r;
  if (!totals) r.trial_no = parse_number<int>(c[0], line_no);
  int* fields[] = {&r.total_fruit, &r.pluckable,  &r.not_detected, &r.cut_cmd_fail,
                   &r.grip_cut_fail, &r.valid_fail, &r.pos_fail,  &r.success,
                   &r.attempts};
  for (std::size_t i = 0; i < std::size(fields); ++i) {
    *fields[i] = parse_number<int>(c[i + 1], line_no);
    if (*fields[i] < 0) {
      throw Error(ErrorKind::ParseError, fmt::format("line {}: negative count", line_no));
    }
  }
  r.time_s = parse_number<double>(c[10], line_no);
  return r;
}

void check_row(const TableRow& r, const std::string& where) {
  const int fails = r.cut_cmd_fail + r.grip_cut_fail + r.valid_fail + r.pos_fail;
  const bool ok = r.pluckable <= r.total_fruit && r.not_detected <= r.pluckable &&
                  r.success <= r.pluckable - r.not_detected && r.success <= r.attempts &&
                  fails <= r.attempts;
  if (!ok) {
    throw Error(ErrorKind::InconsistentTotals, where + " violates the count inequalities");
  }
}

}  // namespace

FieldTable parse_field_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "empty table");
  if (split(line) != table_columns()) {
    throw Error(ErrorKind::ParseError,
                fmt::format("header must be: {}", fmt::join(table_columns(), ",")));
  }
  FieldTable table;
  bool have_totals = false;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (have_totals) {
      throw Error(ErrorKind::ParseError, fmt::format("line {}: data after totals row", line_no));
    }
    const auto cells = split(line);
    if (cells.size() != table_columns().size()) {
      throw Error(ErrorKind::ParseError,
                  fmt::format("line {}: expected {} cells, got {}", line_no,
                              table_columns().size(), cells.size()));
    }
    if (cells[0] == "Total") {
      table.totals = parse_row(cells, line_no, true);
      have_totals = true;
    } else {
      table.rows.push_back(parse_row(cells, line_no, false));
      check_row(table.rows.back(), fmt::format("trial {}", table.rows.back().trial_no));
    }
  }
  if (table.rows.empty()) throw Error(ErrorKind::ParseError, "no trial rows");
  if (!have_totals) throw Error(ErrorKind::ParseError, "missing Total row");

  TableRow sum;
  for (const auto& r : table.rows) {
    sum.total_fruit += r.total_fruit;
    sum.pluckable += r.pluckable;
    sum.not_detected += r.not_detected;
    sum.cut_cmd_fail += r.cut_cmd_fail;
    sum.grip_cut_fail += r.grip_cut_fail;
    sum.valid_fail += r.valid_fail;
    sum.pos_fail += r.pos_fail;
    sum.success += r.success;
    sum.attempts += r.attempts;
    sum.time_s += r.time_s;
  }
  const auto& t = table.totals;
  if (sum.total_fruit != t.total_fruit || sum.pluckable != t.pluckable ||
      sum.not_detected != t.not_detected || sum.cut_cmd_fail != t.cut_cmd_fail ||
      sum.grip_cut_fail != t.grip_cut_fail || sum.valid_fail != t.valid_fail ||
      sum.pos_fail != t.pos_fail || sum.success != t.success || sum.attempts != t.attempts ||
      std::abs(sum.time_s - t.time_s) > 1e-6) {
    throw Error(ErrorKind::InconsistentTotals, "column sums disagree with the Total row");
  }
  check_row(t, "Total row");
  return table;
}

HarvestMetrics metrics_from_table(const FieldTable& table) {
  const auto& t = table.totals;
  HarvestMetrics m;
  m.trials = static_cast<int>(table.rows.size());
  m.N_a = t.total_fruit;
  m.N_p = t.pluckable;
  m.N_d = t.pluckable - t.not_detected;
  m.N_s = t.success;
  m.A_t = t.attempts;
  m.failures = {t.not_detected, t.cut_cmd_fail, t.grip_cut_fail, t.valid_fail, t.pos_fail};
  m.total_time = t.time_s;
  m.derive_rates();

  // Shares quoted alongside the table that its counts do not reproduce.
  const double total = m.failure_total();
  if (total > 0) {
    const double cut = 100.0 * t.cut_cmd_fail / total;
    const double confirm_validate = 100.0 * (t.cut_cmd_fail + t.valid_fail) / total;
    if (std::abs(cut - 29.0) > 0.5) {
      m.notes.push_back(fmt::format(
          "quoted cut-command share 29% disagrees with the table counts ({:.1f}%)", cut));
    }
    if (std::abs(confirm_validate - 12.9) > 0.5) {
      m.notes.push_back(fmt::format(
          "quoted confirmation+validation share 12.9% disagrees with the table counts ({:.1f}%)",
          confirm_validate));
    }
  }
  return m;
}

HarvestMetrics replay_field_table(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + csv_path);
  return metrics_from_table(parse_field_table(in));
}

ReportFormat report_format_from_string(std::string_view s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "text") return ReportFormat::Text;
  throw Error(ErrorKind::InvalidConfig, "unknown report format '" + std::string(s) + "'");
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "trials",          "N_a",
      "N_p",             "N_d",
      "N_s",             "A_t",
      "S_r",             "SD_r",
      "SD_r_alt",        "detection_ratio",
      "attempts_per_fruit", "fail_detection",
      "fail_cut_command", "fail_grip_cut",
      "fail_validation", "fail_position",
      "share_detection", "share_cut_command",
      "share_grip_cut",  "share_validation",
      "share_position",  "total_time_s",
      "mean_pick_time_s", "false_positive_attempts"};
  return cols;
}

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json rounded(const std::optional<double>& v, int decimals) {
  if (!v) return nullptr;
  const double scale = std::pow(10.0, decimals);
  return std::round(*v * scale) / scale;
}

std::string apf(const std::optional<double>& v) {
  return v ? fmt::format("{:.3f}", *v) : std::string("NA");
}

std::string json_report(const HarvestMetrics& m) {
  ordered_json j;
  j["trials"] = m.trials;
  j["N_a"] = m.N_a;
  j["N_p"] = m.N_p;
  j["N_d"] = m.N_d;
  j["N_s"] = m.N_s;
  j["A_t"] = m.A_t;
  j["S_r"] = rounded(m.S_r, 1);
  j["SD_r"] = rounded(m.SD_r, 1);
  j["SD_r_alt"] = rounded(m.SD_r_alt, 1);
  j["detection_ratio"] = rounded(m.detection_ratio, 1);
  j["attempts_per_fruit"] = rounded(m.attempts_per_fruit, 3);
  ordered_json failures, shares;
  for (std::size_t i = 0; i < kFailureClasses; ++i) {
    const std::string key(to_string(static_cast<FailureClass>(i)));
    failures[key] = m.failures[i];
    shares[key] = rounded(m.failure_shares[i], 1);
  }
  j["failures"] = failures;
  j["failure_shares"] = shares;
  j["total_time_s"] = m.total_time;
  j["mean_pick_time_s"] = m.mean_pick_time ? ordered_json(*m.mean_pick_time) : nullptr;
  j["false_positive_attempts"] = m.false_positive_attempts;
  j["notes"] = m.notes;
  return j.dump(2) + "\n";
}

std::string csv_report(const HarvestMetrics& m) {
  std::vector<std::string> v{
      std::to_string(m.trials), std::to_string(m.N_a), std::to_string(m.N_p),
      std::to_string(m.N_d),    std::to_string(m.N_s), std::to_string(m.A_t),
      pct(m.S_r),               pct(m.SD_r),           pct(m.SD_r_alt),
      pct(m.detection_ratio),   apf(m.attempts_per_fruit)};
  for (int f : m.failures) v.push_back(std::to_string(f));
  for (const auto& s : m.failure_shares) v.push_back(pct(s));
  v.push_back(fmt::format("{:.3f}", m.total_time));
  v.push_back(m.mean_pick_time ? fmt::format("{:.3f}", *m.mean_pick_time) : "NA");
  v.push_back(std::to_string(m.false_positive_attempts));
  return fmt::format("{}\n{}\n", fmt::join(csv_columns(), ","), fmt::join(v, ","));
}

std::string text_report(const HarvestMetrics& m) {
  std::string out;
  auto line = [&out](std::string s) { out += s + "\n"; };
  line(fmt::format("trials {}", m.trials));
  line(fmt::format("fruit N_a={} pluckable N_p={} detected N_d={} harvested N_s={} attempts A_t={}",
                   m.N_a, m.N_p, m.N_d, m.N_s, m.A_t));
  line(fmt::format("S_r {}", pct_sign(m.S_r)));
  line(fmt::format("SD_r {}", pct_sign(m.SD_r)));
  line(fmt::format("detection ratio {}", pct_sign(m.detection_ratio)));
  line(fmt::format("attempts per fruit {}", apf(m.attempts_per_fruit)));
  line(fmt::format("failures ({} total):", m.failure_total()));
  for (std::size_t i = 0; i < kFailureClasses; ++i) {
    line(fmt::format("  {:<12} {:>4}  {}", to_string(static_cast<FailureClass>(i)),
                     m.failures[i], pct_sign(m.failure_shares[i])));
  }
  line(fmt::format("total time {:.1f} s", m.total_time));
  if (m.mean_pick_time) line(fmt::format("mean pick time {:.1f} s", *m.mean_pick_time));
  if (m.false_positive_attempts > 0) {
    line(fmt::format("attempts on unripe berries {}", m.false_positive_attempts));
  }
  for (const auto& n : m.notes) line("note: " + n);
  return out;
}

}  // namespace

std::string emit_report(const HarvestMetrics& m, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: return json_report(m);
    case ReportFormat::Csv: return csv_report(m);
    case ReportFormat::Text: return text_report(m);
  }
  return json_report(m);
}

HarvestMetrics metrics_from_json(const std::string& document) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(document);
    HarvestMetrics m;
    m.trials = j.at("trials").get<int>();
    m.N_a = j.at("N_a").get<int>();
    m.N_p = j.at("N_p").get<int>();
    m.N_d = j.at("N_d").get<int>();
    m.N_s = j.at("N_s").get<int>();
    m.A_t = j.at("A_t").get<int>();
    for (std::size_t i = 0; i < kFailureClasses; ++i) {
      m.failures[i] =
          j.at("failures").at(std::string(to_string(static_cast<FailureClass>(i)))).get<int>();
    }
    m.total_time = j.at("total_time_s").get<double>();
    if (!j.at("mean_pick_time_s").is_null()) {
      m.mean_pick_time = j.at("mean_pick_time_s").get<double>();
    }
    m.false_positive_attempts = j.at("false_positive_attempts").get<int>();
    m.notes = j.at("notes").get<std::vector<std::string>>();
    m.derive_rates();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

}  // namespace robofruit::metrics
