#include "cortex/signal/split.hpp"

#include <algorithm>
#include <set>

#include "cortex/errors.hpp"

namespace cortex::signal {
namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

void check_unique(const std::vector<std::string>& subjects) {
  std::set<std::string> seen(subjects.begin(), subjects.end());
  if (seen.size() != subjects.size()) throw ParameterError("subject list contains duplicates");
}

SubjectSplit assemble(const std::vector<std::string>& subjects, const std::set<std::string>& train,
                      const std::set<std::string>& masked) {
  SubjectSplit split;
  for (const auto& s : subjects) {
    if (masked.contains(s)) {
      split.masked.push_back(s);
    } else if (train.contains(s)) {
      split.train.push_back(s);
    } else {
      split.excluded.push_back(s);
    }
  }
  return split;
}

}  // namespace

bool SubjectSplit::is_train(const std::string& subject) const { return contains(train, subject); }
bool SubjectSplit::is_masked(const std::string& subject) const { return contains(masked, subject); }

std::string SubjectSplit::tag() const {
  std::string out = "mask" + std::to_string(masked.size()) + "[";
  for (std::size_t i = 0; i < masked.size(); ++i) {
    if (i) out += ";";
    out += masked[i];
  }
  return out + "]";
}

SubjectSplit make_split(const std::vector<std::string>& subjects, std::size_t k, nn::RngStream& rng) {
  check_unique(subjects);
  if (k < 1 || k >= subjects.size()) {
    throw ParameterError("mask count k=" + std::to_string(k) + " must satisfy 1 <= k < " +
                         std::to_string(subjects.size()));
  }
  std::vector<std::string> order = subjects;
  rng.shuffle(order.begin(), order.end());
  const std::set<std::string> masked(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  const std::set<std::string> train(order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
  return assemble(subjects, train, masked);
}

SubjectSplit make_split(const std::vector<std::string>& subjects, const std::vector<std::string>& masked) {
  check_unique(subjects);
  std::set<std::string> mset;
  for (const auto& s : masked) {
    if (!contains(subjects, s)) throw ParameterError("masked subject '" + s + "' is not in the dataset");
    mset.insert(s);
  }
  if (mset.empty() || mset.size() >= subjects.size()) {
    throw ParameterError("explicit mask must name between 1 and " + std::to_string(subjects.size() - 1) +
                         " subjects");
  }
  std::set<std::string> train;
  for (const auto& s : subjects) {
    if (!mset.contains(s)) train.insert(s);
  }
  return assemble(subjects, train, mset);
}

SubjectSplit make_protocol_split(const std::vector<std::string>& subjects, std::size_t train_count,
                                 std::size_t test_count, nn::RngStream& rng) {
  check_unique(subjects);
  if (train_count < 1 || test_count < 1 || train_count + test_count > subjects.size()) {
    throw ParameterError("protocol split " + std::to_string(train_count) + "+" + std::to_string(test_count) +
                         " does not fit " + std::to_string(subjects.size()) + " subjects");
  }
  std::vector<std::string> order = subjects;
  rng.shuffle(order.begin(), order.end());
  const auto t = static_cast<std::ptrdiff_t>(train_count);
  const auto m = static_cast<std::ptrdiff_t>(test_count);
  const std::set<std::string> train(order.begin(), order.begin() + t);
  const std::set<std::string> masked(order.begin() + t, order.begin() + t + m);
  return assemble(subjects, train, masked);
}

void validate_split(const SubjectSplit& split, const std::vector<std::string>& subjects) {
  std::set<std::string> seen;
  for (const auto* part : {&split.train, &split.masked, &split.excluded}) {
    for (const auto& s : *part) {
      if (!seen.insert(s).second) throw DataError("subject '" + s + "' appears twice in split");
      if (!contains(subjects, s)) throw DataError("split subject '" + s + "' is unknown");
    }
  }
  if (seen.size() != subjects.size()) throw DataError("split does not cover every subject");
}

}  // namespace cortex::signal
