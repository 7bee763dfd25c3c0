#include "pbrnn/published_tables.hpp"

#include "pbrnn/raster_data.hpp"

#include <cmath>
#include <cstdio>

namespace pbrnn {

namespace {

std::vector<std::string> class_names() {
  std::vector<std::string> names;
  for (const ClassEntry &c : ClassScheme::land_cover8().classes) names.push_back(c.name);
  return names;
}

PublishedTable make(std::string id, std::string system, std::vector<std::vector<std::int64_t>> rows,
                    std::vector<double> pa, std::vector<double> ua, std::vector<double> ck, double oa,
                    double kappa) {
  return {std::move(id), std::move(system), ErrorMatrix::from_rows(rows, class_names()),
          std::move(pa),  std::move(ua),    std::move(ck), oa, kappa};
}

double round_to(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

void compare(TableCheck &check, const std::string &what, std::optional<double> computed, double printed,
             int decimals, double tolerance) {
  ++check.values_checked;
  char buf[160];
  if (!computed) {
    std::snprintf(buf, sizeof buf, "%s: undefined, printed %.*f", what.c_str(), decimals, printed);
    check.mismatches.emplace_back(buf);
    return;
  }
  const double r = round_to(*computed, decimals);
  // A hair of slack so values printed at the tolerance boundary compare by
  // their decimal meaning, not their binary representation.
  if (std::abs(r - printed) > tolerance + 1e-9) {
    std::snprintf(buf, sizeof buf, "%s: computed %.*f, printed %.*f", what.c_str(), decimals, r, decimals,
                  printed);
    check.mismatches.emplace_back(buf);
  }
}

} // namespace

const std::vector<PublishedTable> &published_tables() {
  static const std::vector<PublishedTable> tables = {
      make("pb-rnn", "PB-RNN",
           {{154, 2, 0, 0, 1, 0, 0, 1},
            {3, 82, 0, 0, 0, 1, 0, 1},
            {0, 0, 50, 0, 0, 0, 0, 0},
            {0, 0, 0, 118, 1, 1, 0, 0},
            {0, 0, 0, 1, 103, 0, 1, 0},
            {0, 0, 0, 3, 0, 195, 2, 2},
            {0, 0, 1, 0, 0, 2, 48, 0},
            {1, 1, 0, 1, 0, 0, 0, 155}},
           {97.47, 96.47, 98.04, 95.93, 98.10, 97.99, 94.12, 97.48},
           {97.47, 94.25, 100.00, 98.33, 98.10, 96.53, 94.12, 98.10},
           {0.97, 0.94, 1.00, 0.98, 0.98, 0.96, 0.94, 0.98}, 97.21, 0.967),
      make("pixel-rnn", "Pixel RNN",
           {{137, 13, 0, 4, 0, 1, 0, 8},
            {4, 69, 1, 6, 1, 2, 0, 3},
            {2, 1, 43, 1, 2, 0, 0, 1},
            {1, 1, 1, 101, 5, 8, 3, 3},
            {1, 0, 0, 1, 92, 1, 0, 1},
            {2, 3, 1, 10, 0, 186, 1, 1},
            {1, 1, 2, 3, 1, 6, 45, 0},
            {2, 1, 2, 0, 1, 1, 0, 143}},
           {91.33, 77.53, 86.00, 80.16, 90.20, 90.73, 91.84, 89.38},
           {84.05, 80.23, 86.00, 82.11, 95.83, 91.18, 76.27, 95.33},
           {0.81, 0.78, 0.85, 0.79, 0.95, 0.89, 0.75, 0.94}, 87.65, 0.855),
      make("pixel-nn-single", "Pixel NN (single)",
           {{130, 36, 4, 8, 11, 4, 4, 13},
            {8, 29, 0, 0, 6, 1, 2, 4},
            {5, 0, 27, 8, 5, 1, 1, 3},
            {1, 3, 4, 50, 9, 14, 10, 1},
            {10, 10, 3, 10, 71, 3, 5, 3},
            {6, 14, 0, 43, 7, 170, 23, 7},
            {4, 0, 0, 6, 3, 5, 30, 2},
            {7, 2, 1, 0, 2, 5, 0, 130}},
           {76.02, 30.85, 69.23, 40.00, 62.28, 83.74, 40.00, 79.75},
           {61.90, 58.00, 54.00, 54.35, 61.74, 62.96, 60.00, 88.44},
           {0.54, 0.54, 0.52, 0.48, 0.57, 0.53, 0.57, 0.86}, 64.74, 0.583),
      make("pixel-nn-multi", "Pixel NN (multi)",
           {{136, 30, 6, 7, 9, 2, 5, 17},
            {7, 29, 1, 2, 6, 1, 1, 3},
            {3, 1, 34, 5, 5, 0, 0, 2},
            {3, 1, 2, 46, 7, 12, 7, 0},
            {9, 6, 5, 15, 75, 8, 2, 0},
            {6, 10, 0, 46, 12, 173, 33, 5},
            {1, 0, 1, 7, 3, 5, 33, 0},
            {6, 2, 2, 1, 2, 2, 0, 134}},
           {79.53, 36.71, 66.67, 35.66, 63.03, 85.22, 40.74, 83.23},
           {64.15, 58.00, 68.00, 58.97, 62.50, 60.70, 66.00, 89.93},
           {0.57, 0.54, 0.66, 0.53, 0.57, 0.51, 0.63, 0.88}, 66.40, 0.602),
      make("patch-nn-single", "Patch NN (single)",
           {{135, 28, 3, 5, 5, 3, 0, 3},
            {12, 48, 1, 2, 5, 0, 0, 1},
            {4, 0, 31, 4, 4, 1, 2, 4},
            {3, 9, 2, 72, 10, 15, 14, 0},
            {8, 3, 4, 1, 86, 2, 2, 1},
            {4, 6, 0, 27, 2, 168, 13, 2},
            {1, 0, 0, 1, 2, 8, 37, 1},
            {1, 0, 3, 1, 2, 1, 0, 152}},
           {80.36, 51.06, 70.45, 63.72, 74.14, 84.85, 54.41, 92.68},
           {74.18, 69.57, 62.00, 57.60, 80.37, 75.68, 74.00, 95.00},
           {0.69, 0.66, 0.60, 0.52, 0.78, 0.69, 0.72, 0.94}, 75.54, 0.712),
      make("patch-nn-multi", "Patch NN (multi)",
           {{141, 21, 4, 9, 4, 2, 0, 5},
            {10, 47, 2, 2, 4, 2, 1, 0},
            {3, 0, 33, 4, 4, 0, 2, 4},
            {1, 2, 4, 78, 8, 21, 12, 0},
            {2, 1, 1, 5, 89, 5, 7, 1},
            {4, 1, 0, 21, 1, 170, 19, 3},
            {0, 0, 1, 4, 2, 1, 42, 0},
            {5, 1, 1, 0, 0, 0, 0, 153}},
           {84.94, 64.38, 71.74, 63.41, 79.46, 84.58, 50.60, 92.17},
           {75.81, 69.12, 66.00, 61.90, 80.18, 77.63, 84.00, 95.62},
           {0.71, 0.67, 0.64, 0.56, 0.78, 0.72, 0.83, 0.95}, 77.63, 0.737),
  };
  return tables;
}

TableCheck verify_table(const PublishedTable &table) {
  TableCheck check;
  check.id = table.id;
  const AssessmentReport report = full_report(table.matrix);
  const auto &names = table.matrix.class_names();
  auto pct = [](std::optional<double> v) { return v ? std::optional<double>(100.0 * *v) : std::nullopt; };
  for (std::size_t i = 0; i < table.matrix.classes(); ++i) {
    const ClassStats &s = report.classes[i];
    compare(check, "PA[" + names[i] + "]", pct(s.producer_accuracy), table.producer_pct[i], 2, kPercentTolerance);
    compare(check, "UA[" + names[i] + "]", pct(s.user_accuracy), table.user_pct[i], 2, kPercentTolerance);
    compare(check, "Kc[" + names[i] + "]", s.conditional_kappa, table.conditional_kappa[i], 2, kKappaTolerance);
  }
  compare(check, "OA", 100.0 * report.overall_accuracy, table.overall_pct, 2, kPercentTolerance);
  compare(check, "KAPPA", report.overall_kappa, table.overall_kappa, 3, kKappaTolerance);
  return check;
}

} // namespace pbrnn
