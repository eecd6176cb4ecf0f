#include "trackid/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "trackid/errors.hpp"

namespace trackid {

PortableRng::PortableRng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t PortableRng::next() { return engine_(); }

std::uint64_t PortableRng::below(std::uint64_t bound) {
  if (bound == 0) throw ConfigError("PortableRng::below needs a positive bound");
  // Reject the top partial bucket so every residue is equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % bound;
}

std::size_t stratified_test_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
}

namespace {

/// Item positions grouped by class, ascending class, input order within a class.
std::map<int, std::vector<std::size_t>> group_by_class(const std::vector<LabeledItem>& items) {
  std::set<std::string_view> seen;
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!seen.insert(items[i].id).second) {
      throw ConfigError("duplicate item id '" + items[i].id + "'");
    }
    groups[items[i].class_index].push_back(i);
  }
  return groups;
}

std::vector<std::string> ids_in_input_order(const std::vector<LabeledItem>& items,
                                            std::vector<std::size_t> positions) {
  std::sort(positions.begin(), positions.end());
  std::vector<std::string> out;
  out.reserve(positions.size());
  for (std::size_t p : positions) out.push_back(items[p].id);
  return out;
}

}  // namespace

SplitResult stratified_split(const std::vector<LabeledItem>& items, double test_fraction,
                             std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie strictly between 0 and 1");
  }
  PortableRng rng(seed);
  SplitResult result;
  std::vector<std::size_t> train, test;
  for (auto& [cls, members] : group_by_class(items)) {
    rng.shuffle(members);
    const std::size_t n_test = stratified_test_count(test_fraction, members.size());
    test.insert(test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    train.insert(train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
    if (n_test == 0 || n_test == members.size()) {
      result.warnings.push_back({cls, members.size(),
                                 "class " + std::to_string(cls) + " with " +
                                     std::to_string(members.size()) + " items leaves the " +
                                     (n_test == 0 ? "test" : "train") + " side empty"});
    }
  }
  result.train = ids_in_input_order(items, std::move(train));
  result.test = ids_in_input_order(items, std::move(test));
  return result;
}

FoldResult stratified_kfold(const std::vector<LabeledItem>& items, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidK(k);
  const auto folds = static_cast<std::size_t>(k);
  PortableRng rng(seed);
  FoldResult result;
  std::vector<std::vector<std::size_t>> positions(folds);
  std::size_t next_fold = 0;
  for (auto& [cls, members] : group_by_class(items)) {
    rng.shuffle(members);
    for (std::size_t p : members) {
      positions[next_fold].push_back(p);
      next_fold = (next_fold + 1) % folds;
    }
    if (members.size() < folds) {
      result.warnings.push_back({cls, members.size(),
                                 "class " + std::to_string(cls) + " has " +
                                     std::to_string(members.size()) + " items, fewer than k = " +
                                     std::to_string(k)});
    }
  }
  result.folds.reserve(folds);
  for (auto& p : positions) result.folds.push_back(ids_in_input_order(items, std::move(p)));
  return result;
}

}  // namespace trackid
