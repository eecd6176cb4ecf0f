#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace trackid {

struct LabeledItem {
  std::string id;
  int class_index = 0;
};

/// Reported, not thrown: a class whose split leaves one side empty, or whose size is
/// below k for k-fold.
struct DegenerateClass {
  int class_index = 0;
  std::size_t size = 0;
  std::string message;
};

struct SplitResult {
  std::vector<std::string> train;
  std::vector<std::string> test;
  std::vector<DegenerateClass> warnings;
};

struct FoldResult {
  std::vector<std::vector<std::string>> folds;
  std::vector<DegenerateClass> warnings;
};

/// Number of test items for a class of size n: half-up round(fraction * n).
std::size_t stratified_test_count(double fraction, std::size_t n);

/// Per class, a seeded shuffle followed by taking the first round(f * n_c) items as test.
/// Output ids keep input order. Throws ConfigError when fraction is outside (0,1) or ids repeat.
SplitResult stratified_split(const std::vector<LabeledItem>& items, double test_fraction,
                             std::uint64_t seed);

/// Per class, a seeded shuffle dealt round-robin across folds; each class's deal starts where
/// the previous class's ended so totals stay balanced. Throws InvalidK when k < 2.
FoldResult stratified_kfold(const std::vector<LabeledItem>& items, int k, std::uint64_t seed);

/// Portable generator for splits. mt19937_64's output is fixed by the standard; bounded
/// integers use rejection sampling instead of std::uniform_int_distribution, whose
/// algorithm varies between standard libraries.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed);
  std::uint64_t next();
  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace trackid
