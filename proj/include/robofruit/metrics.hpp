#pragma once

// Harvest statistics over trial logs and over the recorded field-trial table.

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "robofruit/orchestrator.hpp"

namespace robofruit::metrics {

/// Failure classes in the order the field table lists them.
enum class FailureClass { Detection, CutCommand, GripCut, Validation, Position };
inline constexpr std::size_t kFailureClasses = 5;
std::string_view to_string(FailureClass f);

struct HarvestMetrics {
  int trials = 0;
  int N_a = 0;  // all fruit
  int N_p = 0;  // pluckable
  int N_d = 0;  // detected pluckable
  int N_s = 0;  // successfully harvested
  int A_t = 0;  // attempts

  // Percentages; absent when the denominator is zero.
  std::optional<double> S_r;              // N_s / N_p
  std::optional<double> SD_r;             // N_s / N_d
  std::optional<double> SD_r_alt;         // N_d / N_p reading of the formula
  std::optional<double> detection_ratio;  // N_d / N_p
  std::optional<double> attempts_per_fruit;

  std::array<int, kFailureClasses> failures{};
  std::array<std::optional<double>, kFailureClasses> failure_shares{};

  double total_time = 0.0;                // s
  std::optional<double> mean_pick_time;   // s, successful attempts
  int false_positive_attempts = 0;
  std::vector<std::string> notes;

  int failure_total() const;
  /// Fills every rate and share from the counts.
  void derive_rates();

  friend bool operator==(const HarvestMetrics&, const HarvestMetrics&) = default;
};

/// Throws EmptyInput for an empty list. Order of the logs does not matter.
HarvestMetrics compute_metrics(const std::vector<orchestrator::TrialLog>& logs);

struct TableRow {
  int trial_no = 0;
  int total_fruit = 0;
  int pluckable = 0;
  int not_detected = 0;
  int cut_cmd_fail = 0;
  int grip_cut_fail = 0;
  int valid_fail = 0;
  int pos_fail = 0;
  int success = 0;
  int attempts = 0;
  double time_s = 0.0;
};

struct FieldTable {
  std::vector<TableRow> rows;
  TableRow totals;  // trial_no unused
};

/// Parses the header, one row per trial and a final "Total" row. Throws
/// ParseError on malformed input and InconsistentTotals when a row breaks
/// the count inequalities or the column sums disagree with the totals row.
FieldTable parse_field_table(std::istream& in);
HarvestMetrics metrics_from_table(const FieldTable& table);
HarvestMetrics replay_field_table(const std::string& csv_path);

enum class ReportFormat { Json, Csv, Text };
ReportFormat report_format_from_string(std::string_view s);

std::string emit_report(const HarvestMetrics& m, ReportFormat format);
/// Inverse of the JSON report; rates are re-derived from the counts.
HarvestMetrics metrics_from_json(const std::string& document);

/// Column names of the CSV report, in order.
const std::vector<std::string>& csv_columns();

}  // namespace robofruit::metrics
