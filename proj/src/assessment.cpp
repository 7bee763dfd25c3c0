#include "pbrnn/assessment.hpp"

#include "pbrnn/binary_io.hpp"
#include "pbrnn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace pbrnn {

namespace {

std::vector<std::string> default_names(std::size_t k, std::vector<std::string> names) {
  if (names.empty()) {
    for (std::size_t i = 0; i < k; ++i) names.push_back("Class " + std::to_string(i));
  }
  if (names.size() != k) throw ShapeError("ErrorMatrix: need one name per class");
  return names;
}

void check_class(const ErrorMatrix &m, std::size_t i) {
  if (i >= m.classes()) throw ArgumentError("class index " + std::to_string(i) + " out of range");
}

double sum_products(const ErrorMatrix &m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.classes(); ++i)
    s += static_cast<double>(m.row_total(i)) * static_cast<double>(m.column_total(i));
  return s;
}

std::string fmt(const char *pattern, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string fmt_opt(const char *pattern, const std::optional<double> &v) {
  return v ? fmt(pattern, *v) : std::string("n/a");
}

std::string pad(const std::string &s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string &s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::vector<std::string> split_fields(const std::string &line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    out.push_back(field);
  }
  return out;
}

} // namespace

ErrorMatrix::ErrorMatrix(std::size_t k, std::vector<std::string> class_names)
    : k_(k), counts_(k * k, 0), names_(default_names(k, std::move(class_names))) {
  if (k == 0) throw ArgumentError("ErrorMatrix: need at least one class");
}

ErrorMatrix ErrorMatrix::from_rows(const std::vector<std::vector<std::int64_t>> &rows,
                                   std::vector<std::string> class_names) {
  ErrorMatrix m(rows.size(), std::move(class_names));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw ShapeError("ErrorMatrix: rows must form a square matrix");
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (rows[i][j] < 0) throw ArgumentError("ErrorMatrix: counts must be non-negative");
      m.at(i, j) = rows[i][j];
    }
  }
  return m;
}

std::int64_t ErrorMatrix::total() const {
  std::int64_t n = 0;
  for (auto c : counts_) n += c;
  return n;
}

std::int64_t ErrorMatrix::diagonal() const {
  std::int64_t d = 0;
  for (std::size_t i = 0; i < k_; ++i) d += at(i, i);
  return d;
}

std::int64_t ErrorMatrix::row_total(std::size_t i) const {
  std::int64_t s = 0;
  for (std::size_t j = 0; j < k_; ++j) s += at(i, j);
  return s;
}

std::int64_t ErrorMatrix::column_total(std::size_t j) const {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < k_; ++i) s += at(i, j);
  return s;
}

double overall_accuracy(const ErrorMatrix &m) {
  const auto n = m.total();
  if (n <= 0) throw ArgumentError("overall_accuracy: empty error matrix");
  return static_cast<double>(m.diagonal()) / static_cast<double>(n);
}

double overall_kappa(const ErrorMatrix &m) {
  const auto n = static_cast<double>(m.total());
  if (n <= 0) throw ArgumentError("overall_kappa: empty error matrix");
  const double chance = sum_products(m);
  const double denom = n * n - chance;
  if (denom == 0.0) throw UndefinedStatistic("overall_kappa: chance agreement is total");
  return (n * static_cast<double>(m.diagonal()) - chance) / denom;
}

ProducerUser producer_user_accuracy(const ErrorMatrix &m, std::size_t i) {
  check_class(m, i);
  ProducerUser out;
  const auto diag = static_cast<double>(m.at(i, i));
  if (auto c = m.column_total(i); c > 0) out.producer = diag / static_cast<double>(c);
  if (auto r = m.row_total(i); r > 0) out.user = diag / static_cast<double>(r);
  return out;
}

double conditional_kappa(const ErrorMatrix &m, std::size_t i) {
  check_class(m, i);
  const auto n = static_cast<double>(m.total());
  const auto row = static_cast<double>(m.row_total(i));
  const auto col = static_cast<double>(m.column_total(i));
  const double denom = n * row - row * col;
  if (denom == 0.0)
    throw UndefinedStatistic("conditional_kappa: undefined for class " + std::to_string(i));
  return (n * static_cast<double>(m.at(i, i)) - row * col) / denom;
}

AssessmentReport full_report(const ErrorMatrix &m) {
  AssessmentReport r;
  r.total = m.total();
  r.overall_accuracy = overall_accuracy(m);
  try {
    r.overall_kappa = overall_kappa(m);
  } catch (const UndefinedStatistic &) {
  }
  std::vector<double> defined;
  for (std::size_t i = 0; i < m.classes(); ++i) {
    ClassStats s;
    s.row_total = m.row_total(i);
    s.column_total = m.column_total(i);
    auto pu = producer_user_accuracy(m, i);
    s.producer_accuracy = pu.producer;
    s.user_accuracy = pu.user;
    try {
      s.conditional_kappa = conditional_kappa(m, i);
      defined.push_back(*s.conditional_kappa);
    } catch (const UndefinedStatistic &) {
    }
    r.classes.push_back(s);
  }
  if (!defined.empty()) {
    double mean = 0.0;
    for (double v : defined) mean += v;
    mean /= static_cast<double>(defined.size());
    r.mean_conditional_kappa = mean;
    if (defined.size() > 1) {
      double ss = 0.0;
      for (double v : defined) ss += (v - mean) * (v - mean);
      r.sd_conditional_kappa = std::sqrt(ss / static_cast<double>(defined.size() - 1));
    }
  }
  return r;
}

StratifiedDesign equal_design(std::size_t classes, std::size_t per_stratum, std::uint64_t seed) {
  StratifiedDesign d;
  d.per_stratum.assign(classes, per_stratum);
  d.min_per_stratum = per_stratum;
  d.total_target = classes * per_stratum;
  d.seed = seed;
  return d;
}

StratifiedDesign area_weighted_design(const LabelMap &classified, const LabelMap &reference,
                                      std::size_t classes, std::size_t total_target,
                                      std::size_t min_per_stratum, std::uint64_t seed) {
  if (classified.width != reference.width || classified.height != reference.height)
    throw ShapeError("area_weighted_design: map dimensions differ");
  std::vector<std::size_t> population(classes, 0);
  std::size_t total = 0;
  for (std::size_t p = 0; p < classified.ids.size(); ++p) {
    const auto c = classified.ids[p];
    if (c == kNoDataLabel || reference.ids[p] == kNoDataLabel) continue;
    if (c >= classes) throw ArgumentError("area_weighted_design: class id beyond the class count");
    ++population[c];
    ++total;
  }
  StratifiedDesign d;
  d.min_per_stratum = min_per_stratum;
  d.total_target = total_target;
  d.seed = seed;
  d.per_stratum.resize(classes, 0);
  for (std::size_t k = 0; k < classes; ++k) {
    if (population[k] == 0) continue;
    const double share = total ? static_cast<double>(total_target) * static_cast<double>(population[k]) /
                                     static_cast<double>(total)
                               : 0.0;
    d.per_stratum[k] = std::max(min_per_stratum, static_cast<std::size_t>(std::llround(share)));
  }
  return d;
}

SampledErrorMatrix build_error_matrix(const LabelMap &classified, const LabelMap &reference,
                                      const StratifiedDesign &design,
                                      std::vector<std::string> class_names) {
  if (classified.width != reference.width || classified.height != reference.height)
    throw ShapeError("build_error_matrix: classified map is " + std::to_string(classified.height) + "x" +
                     std::to_string(classified.width) + ", reference is " +
                     std::to_string(reference.height) + "x" + std::to_string(reference.width));
  const std::size_t k = design.per_stratum.size();
  std::vector<std::vector<std::size_t>> strata(k);
  for (std::size_t p = 0; p < classified.ids.size(); ++p) {
    const auto c = classified.ids[p];
    const auto r = reference.ids[p];
    if (c == kNoDataLabel || r == kNoDataLabel) continue;
    if (c >= k || r >= k) throw ArgumentError("build_error_matrix: class id beyond the design's strata");
    strata[c].push_back(p);
  }
  SampledErrorMatrix out{ErrorMatrix(k, std::move(class_names)), {}};
  for (std::size_t s = 0; s < k; ++s) {
    auto &pixels = strata[s];
    std::size_t want = design.per_stratum[s];
    if (want > pixels.size()) {
      if (want > 0)
        out.warnings.push_back("stratum " + std::to_string(s) + ": population " +
                               std::to_string(pixels.size()) + " below design size " +
                               std::to_string(want) + "; taking all");
      want = pixels.size();
    }
    Rng rng(derive_seed(design.seed, s));
    // Partial Fisher-Yates: the first `want` entries are the draw.
    for (std::size_t i = 0; i < want; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(pixels.size() - i));
      std::swap(pixels[i], pixels[j]);
      out.matrix.at(s, reference.ids[pixels[i]]) += 1;
    }
  }
  return out;
}

ErrorMatrix census_error_matrix(const LabelMap &classified, const LabelMap &reference,
                                std::size_t classes, std::vector<std::string> class_names) {
  if (classified.width != reference.width || classified.height != reference.height)
    throw ShapeError("census_error_matrix: map dimensions differ");
  ErrorMatrix m(classes, std::move(class_names));
  for (std::size_t p = 0; p < classified.ids.size(); ++p) {
    const auto c = classified.ids[p];
    const auto r = reference.ids[p];
    if (c == kNoDataLabel || r == kNoDataLabel) continue;
    if (c >= classes || r >= classes) throw ArgumentError("census_error_matrix: class id out of range");
    m.at(c, r) += 1;
  }
  return m;
}

void write_error_matrix(std::ostream &out, const ErrorMatrix &m) {
  out << "classified\\reference";
  for (const auto &name : m.class_names()) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < m.classes(); ++i) {
    out << m.class_names()[i];
    for (std::size_t j = 0; j < m.classes(); ++j) out << ',' << m.at(i, j);
    out << '\n';
  }
}

ErrorMatrix read_error_matrix(std::istream &in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("error matrix: empty input");
  auto header = split_fields(line);
  if (header.size() < 2) throw FormatError("error matrix: header needs at least one class");
  std::vector<std::string> names(header.begin() + 1, header.end());
  std::vector<std::vector<std::int64_t>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_fields(line);
    if (fields.size() != names.size() + 1)
      throw FormatError("error matrix: row " + std::to_string(rows.size() + 1) + " has " +
                        std::to_string(fields.size() - 1) + " counts, expected " + std::to_string(names.size()));
    std::vector<std::int64_t> row;
    for (std::size_t j = 1; j < fields.size(); ++j) {
      try {
        std::size_t used = 0;
        const long long v = std::stoll(fields[j], &used);
        if (used != fields[j].size()) throw std::invalid_argument("trailing characters");
        row.push_back(v);
      } catch (const std::exception &) {
        throw FormatError("error matrix: bad count '" + fields[j] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() != names.size()) throw FormatError("error matrix: not square");
  try {
    return ErrorMatrix::from_rows(rows, names);
  } catch (const std::invalid_argument &e) {
    throw FormatError(std::string("error matrix: ") + e.what());
  }
}

void save_error_matrix(const std::filesystem::path &path, const ErrorMatrix &m) {
  std::ostringstream out;
  write_error_matrix(out, m);
  write_file_atomic(path, out.str());
}

ErrorMatrix load_error_matrix(const std::filesystem::path &path) {
  std::istringstream in(read_file(path));
  return read_error_matrix(in);
}

std::string format_report(const ErrorMatrix &m, const AssessmentReport &report) {
  std::size_t name_w = 10;
  for (const auto &n : m.class_names()) name_w = std::max(name_w, n.size());
  name_w += 2;
  std::ostringstream out;
  out << pad_right("Classified", name_w);
  for (std::size_t j = 0; j < m.classes(); ++j) out << pad("R" + std::to_string(j), 7);
  out << pad("Total", 8) << pad("PA%", 9) << pad("UA%", 9) << pad("Kc", 7) << '\n';
  for (std::size_t i = 0; i < m.classes(); ++i) {
    const ClassStats &s = report.classes[i];
    out << pad_right(m.class_names()[i], name_w);
    for (std::size_t j = 0; j < m.classes(); ++j) out << pad(std::to_string(m.at(i, j)), 7);
    out << pad(std::to_string(s.row_total), 8)
        << pad(s.producer_accuracy ? fmt("%.2f", 100.0 * *s.producer_accuracy) : "n/a", 9)
        << pad(s.user_accuracy ? fmt("%.2f", 100.0 * *s.user_accuracy) : "n/a", 9)
        << pad(fmt_opt("%.2f", s.conditional_kappa), 7) << '\n';
  }
  out << pad_right("Column Total", name_w);
  for (std::size_t j = 0; j < m.classes(); ++j) out << pad(std::to_string(report.classes[j].column_total), 7);
  out << pad(std::to_string(report.total), 8) << '\n';
  out << "Overall Accuracy (OA): " << fmt("%.2f", 100.0 * report.overall_accuracy)
      << "%;  Overall Kappa (KAPPA): " << fmt_opt("%.3f", report.overall_kappa) << '\n';
  out << "Mean conditional kappa: " << fmt_opt("%.2f", report.mean_conditional_kappa)
      << ";  standard deviation: " << fmt_opt("%.2f", report.sd_conditional_kappa) << '\n';
  return out.str();
}

std::string format_comparison(const std::vector<SystemSummary> &systems,
                              const std::vector<std::string> &class_names) {
  std::size_t name_w = 22;
  for (const auto &n : class_names) name_w = std::max(name_w, n.size() + 2);
  std::size_t col_w = 10;
  for (const auto &s : systems) col_w = std::max(col_w, s.system.size() + 2);

  std::ostringstream out;
  out << pad_right("Land Cover Class", name_w);
  for (const auto &s : systems) out << pad(s.system, col_w);
  out << pad("Mean", 8) << pad("SD", 8) << '\n';
  for (std::size_t i = 0; i < class_names.size(); ++i) {
    out << pad_right(class_names[i], name_w);
    std::vector<double> vals;
    for (const auto &s : systems) {
      const auto &k = i < s.report.classes.size() ? s.report.classes[i].conditional_kappa : std::nullopt;
      out << pad(fmt_opt("%.2f", k), col_w);
      if (k) vals.push_back(*k);
    }
    if (!vals.empty()) {
      double mean = 0.0;
      for (double v : vals) mean += v;
      mean /= static_cast<double>(vals.size());
      double ss = 0.0;
      for (double v : vals) ss += (v - mean) * (v - mean);
      out << pad(fmt("%.2f", mean), 8)
          << pad(vals.size() > 1 ? fmt("%.2f", std::sqrt(ss / static_cast<double>(vals.size() - 1))) : "n/a", 8);
    }
    out << '\n';
  }
  auto footer = [&](const char *label, auto &&value) {
    out << pad_right(label, name_w);
    for (const auto &s : systems) out << pad(value(s.report), col_w);
    out << '\n';
  };
  footer("Mean-Kappa", [](const AssessmentReport &r) { return fmt_opt("%.2f", r.mean_conditional_kappa); });
  footer("Standard Deviation", [](const AssessmentReport &r) { return fmt_opt("%.2f", r.sd_conditional_kappa); });
  footer("Overall Accuracy(%)", [](const AssessmentReport &r) { return fmt("%.2f", 100.0 * r.overall_accuracy); });
  footer("Overall Kappa", [](const AssessmentReport &r) { return fmt_opt("%.2f", r.overall_kappa); });
  return out.str();
}

} // namespace pbrnn
