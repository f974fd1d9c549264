#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace cortex {

struct ClassCounts {
  long label = 0;
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  std::size_t support = 0;
};

/// Accuracy plus macro precision/recall/F1 over the classes present in the
/// ground truth. A class with no predictions has precision 0 (likewise for
/// recall and F1 when undefined).
struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_cases = 0;
  std::size_t false_cases = 0;
  std::size_t n = 0;
  std::vector<ClassCounts> per_class;  ///< ascending label
};

/// Scores predicted labels against ground-truth labels. A predicted label of
/// -1 stands for "no vocabulary token" and is always wrong. A case is true iff
/// predicted == truth.
MetricsReport score_labels(std::span<const long> truth, std::span<const long> predicted);

inline constexpr const char* kMetricsHeader = "model,split,accuracy,precision,recall,f1,true_cases,false_cases,n";

struct MetricsRow {
  std::string model;
  std::string split;
  MetricsReport report;
};

/// One CSV line (no newline) in kMetricsHeader column order.
std::string format_metrics_row(const MetricsRow& row);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);

}  // namespace cortex
