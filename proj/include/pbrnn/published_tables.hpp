#pragma once

#include "pbrnn/assessment.hpp"

#include <string>
#include <vector>

namespace pbrnn {

/// A published error matrix together with the statistics printed beside it.
/// Percentages are in percent, rounded to 2 decimals; per-class kappa to 2
/// decimals, overall kappa to 3.
struct PublishedTable {
  std::string id;
  std::string system;
  ErrorMatrix matrix;
  std::vector<double> producer_pct;
  std::vector<double> user_pct;
  std::vector<double> conditional_kappa;
  double overall_pct = 0.0;
  double overall_kappa = 0.0;
};

/// The six published 8-class Everglades matrices: PB-RNN, pixel RNN, and the
/// four feedforward systems.
const std::vector<PublishedTable> &published_tables();

struct TableCheck {
  std::string id;
  std::size_t values_checked = 0;
  /// One line per value that disagrees after rounding, e.g.
  /// "UA[Barren Land]: computed 99.00, printed 100.00".
  std::vector<std::string> mismatches;
  bool ok() const { return mismatches.empty(); }
};

inline constexpr double kPercentTolerance = 0.01;
inline constexpr double kKappaTolerance = 0.005;

/// Recomputes every statistic from the counts, rounds to the printed
/// precision and compares within kPercentTolerance / kKappaTolerance.
TableCheck verify_table(const PublishedTable &table);

} // namespace pbrnn
