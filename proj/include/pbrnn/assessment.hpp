#pragma once

#include "pbrnn/sampling.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pbrnn {

/// Square count matrix: rows are classified classes, columns reference classes.
class ErrorMatrix {
public:
  ErrorMatrix() = default;
  explicit ErrorMatrix(std::size_t k, std::vector<std::string> class_names = {});
  static ErrorMatrix from_rows(const std::vector<std::vector<std::int64_t>> &rows,
                               std::vector<std::string> class_names = {});

  std::size_t classes() const noexcept { return k_; }
  std::int64_t at(std::size_t classified, std::size_t reference) const {
    return counts_[classified * k_ + reference];
  }
  std::int64_t &at(std::size_t classified, std::size_t reference) {
    return counts_[classified * k_ + reference];
  }
  const std::vector<std::string> &class_names() const noexcept { return names_; }

  std::int64_t total() const;
  std::int64_t diagonal() const;
  std::int64_t row_total(std::size_t i) const;
  std::int64_t column_total(std::size_t j) const;

  friend bool operator==(const ErrorMatrix &, const ErrorMatrix &) = default;

private:
  std::size_t k_ = 0;
  std::vector<std::int64_t> counts_;
  std::vector<std::string> names_;
};

/// Σ diag / N. Throws ArgumentError for an empty matrix.
double overall_accuracy(const ErrorMatrix &m);

/// κ = (N·Σdiag − Σ row_i·col_i) / (N² − Σ row_i·col_i).
/// Throws UndefinedStatistic when the denominator is zero.
double overall_kappa(const ErrorMatrix &m);

struct ProducerUser {
  std::optional<double> producer; // diag / column total
  std::optional<double> user;     // diag / row total
};
ProducerUser producer_user_accuracy(const ErrorMatrix &m, std::size_t i);

/// Row-conditioned kappa κ_i = (N·x_ii − row_i·col_i) / (N·row_i − row_i·col_i).
/// Throws UndefinedStatistic on a zero denominator.
double conditional_kappa(const ErrorMatrix &m, std::size_t i);

struct ClassStats {
  std::int64_t row_total = 0;
  std::int64_t column_total = 0;
  std::optional<double> producer_accuracy;
  std::optional<double> user_accuracy;
  std::optional<double> conditional_kappa;
};

struct AssessmentReport {
  std::int64_t total = 0;
  double overall_accuracy = 0.0;
  std::optional<double> overall_kappa;
  std::vector<ClassStats> classes;
  /// Mean and sample standard deviation of the defined conditional kappas.
  std::optional<double> mean_conditional_kappa;
  std::optional<double> sd_conditional_kappa;
};

AssessmentReport full_report(const ErrorMatrix &m);

/// Per classified-class sample sizes for stratified random sampling.
struct StratifiedDesign {
  std::vector<std::size_t> per_stratum;
  std::size_t min_per_stratum = 50;
  std::size_t total_target = 0;
  std::uint64_t seed = 1;
};

/// Same size for every stratum.
StratifiedDesign equal_design(std::size_t classes, std::size_t per_stratum, std::uint64_t seed);

/// Sizes proportional to each classified class's area (pixels with data in
/// both maps), raised to `min_per_stratum`.
StratifiedDesign area_weighted_design(const LabelMap &classified, const LabelMap &reference,
                                      std::size_t classes, std::size_t total_target,
                                      std::size_t min_per_stratum, std::uint64_t seed);

struct SampledErrorMatrix {
  ErrorMatrix matrix;
  std::vector<std::string> warnings;
};

/// Draws each stratum's pixels uniformly without replacement and tallies
/// (classified, reference). Short strata contribute every pixel and warn.
SampledErrorMatrix build_error_matrix(const LabelMap &classified, const LabelMap &reference,
                                      const StratifiedDesign &design,
                                      std::vector<std::string> class_names = {});

/// Every pixel with data in both maps.
ErrorMatrix census_error_matrix(const LabelMap &classified, const LabelMap &reference,
                                std::size_t classes, std::vector<std::string> class_names = {});

// Delimited text: a header row of reference names, then one row per class.
void write_error_matrix(std::ostream &out, const ErrorMatrix &m);
ErrorMatrix read_error_matrix(std::istream &in);
void save_error_matrix(const std::filesystem::path &path, const ErrorMatrix &m);
ErrorMatrix load_error_matrix(const std::filesystem::path &path);

/// Error matrix with totals, PA/UA/conditional kappa columns and the OA and
/// kappa footer. Percentages to 2 decimals, per-class kappa to 2, overall to 3.
std::string format_report(const ErrorMatrix &m, const AssessmentReport &report);

struct SystemSummary {
  std::string system;
  AssessmentReport report;
};

/// Conditional kappa per class and system with per-class mean/SD columns,
/// followed by Mean-Kappa, SD, overall accuracy and overall kappa rows.
std::string format_comparison(const std::vector<SystemSummary> &systems,
                              const std::vector<std::string> &class_names);

} // namespace pbrnn
