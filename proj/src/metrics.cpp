#include "cortex/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <map>

#include "cortex/errors.hpp"

namespace cortex {

MetricsReport score_labels(std::span<const long> truth, std::span<const long> predicted) {
  if (truth.size() != predicted.size()) {
    throw ShapeError("metrics: " + std::to_string(truth.size()) + " labels vs " + std::to_string(predicted.size()) +
                     " predictions");
  }
  MetricsReport r;
  r.n = truth.size();
  std::map<long, ClassCounts> classes;
  for (long t : truth) {
    auto& c = classes[t];
    c.label = t;
    ++c.support;
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] == truth[i] && predicted[i] >= 0) {
      ++r.true_cases;
      ++classes[truth[i]].true_positive;
    } else {
      ++classes[truth[i]].false_negative;
      auto it = classes.find(predicted[i]);
      if (it != classes.end()) ++it->second.false_positive;
    }
  }
  r.false_cases = r.n - r.true_cases;
  if (r.n == 0) return r;
  r.accuracy = static_cast<double>(r.true_cases) / static_cast<double>(r.n);
  for (const auto& [label, c] : classes) {
    const double tp = static_cast<double>(c.true_positive);
    const double p = c.true_positive + c.false_positive ? tp / static_cast<double>(c.true_positive + c.false_positive) : 0.0;
    const double q = c.true_positive + c.false_negative ? tp / static_cast<double>(c.true_positive + c.false_negative) : 0.0;
    r.precision += p;
    r.recall += q;
    r.f1 += p + q > 0.0 ? 2.0 * p * q / (p + q) : 0.0;
    r.per_class.push_back(c);
  }
  const auto k = static_cast<double>(classes.size());
  r.precision /= k;
  r.recall /= k;
  r.f1 /= k;
  return r;
}

std::string format_metrics_row(const MetricsRow& row) {
  for (const auto* field : {&row.model, &row.split}) {
    if (field->find_first_of(",\"\n") != std::string::npos) {
      throw ParameterError("metrics: field '" + *field + "' contains a CSV delimiter");
    }
  }
  const auto& m = row.report;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%zu,%zu,%zu", m.accuracy, m.precision, m.recall, m.f1,
                m.true_cases, m.false_cases, m.n);
  return row.model + "," + row.split + "," + buf;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) out << format_metrics_row(r) << '\n';
}

}  // namespace cortex
