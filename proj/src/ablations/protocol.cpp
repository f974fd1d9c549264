#include "cortex/ablations/protocol.hpp"

#include <cstdio>
#include <fstream>

#include "cortex/errors.hpp"

namespace cortex::ablations {

std::vector<signal::SubjectSplit> protocol_splits(const std::vector<std::string>& subjects,
                                                  const ProtocolConfig& config, nn::RngStream& rng) {
  if (config.repetitions == 0) throw ParameterError("protocol: at least one repetition is required");
  std::vector<signal::SubjectSplit> out;
  for (std::size_t r = 0; r < config.repetitions; ++r) {
    out.push_back(signal::make_protocol_split(subjects, config.train_subjects, config.test_subjects, rng));
  }
  return out;
}

LabeledSet labeled_rows(const LatentTable& table, const std::vector<std::string>& subjects) {
  const LatentTable sel = table.select(subjects);
  LabeledSet out;
  out.features = sel.latents;
  for (std::size_t t : sel.token_ids) out.labels.push_back(static_cast<long>(t));
  return out;
}

MetricsReport average_reports(const std::vector<MetricsReport>& reports) {
  MetricsReport m;
  if (reports.empty()) return m;
  for (const auto& r : reports) {
    m.accuracy += r.accuracy;
    m.precision += r.precision;
    m.recall += r.recall;
    m.f1 += r.f1;
    m.true_cases += r.true_cases;
    m.false_cases += r.false_cases;
    m.n += r.n;
  }
  const auto k = static_cast<double>(reports.size());
  m.accuracy /= k;
  m.precision /= k;
  m.recall /= k;
  m.f1 /= k;
  return m;
}

std::vector<AblationRow> run_protocol(const std::string& ablation, const LatentTable& table,
                                      const std::vector<signal::SubjectSplit>& splits,
                                      const std::vector<std::string>& settings, const ClassifierFn& fn,
                                      const nn::RngStream& rng) {
  std::vector<LabeledSet> train;
  std::vector<LabeledSet> test;
  for (const auto& s : splits) {
    train.push_back(labeled_rows(table, s.train));
    test.push_back(labeled_rows(table, s.masked));
    if (train.back().size() == 0 || test.back().size() == 0) {
      throw DataError(ablation + ": split " + s.tag() + " leaves no training or test rows");
    }
  }
  std::vector<AblationRow> rows;
  for (std::size_t k = 0; k < settings.size(); ++k) {
    std::vector<MetricsReport> reports;
    for (std::size_t r = 0; r < splits.size(); ++r) {
      nn::RngStream sub = rng.fork(k * 1000 + r);
      const ClassifierResult res = fn(train[r], test[r], k, sub);
      rows.push_back({ablation, settings[k], std::to_string(r + 1), splits[r].tag(), res.report});
      reports.push_back(res.report);
    }
    rows.push_back({ablation, settings[k], "mean", "", average_reports(reports)});
  }
  return rows;
}

void write_ablation_csv(const std::filesystem::path& path, const std::vector<AblationRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << kAblationHeader << '\n';
  char buf[160];
  for (const auto& r : rows) {
    const auto& m = r.report;
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%zu,%zu,%zu", m.accuracy, m.precision, m.recall, m.f1,
                  m.true_cases, m.false_cases, m.n);
    out << r.ablation << ',' << r.setting << ',' << r.repetition << ',' << r.split << ',' << buf << '\n';
  }
}

}  // namespace cortex::ablations
