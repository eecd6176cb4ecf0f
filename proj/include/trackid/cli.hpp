#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace trackid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitParse = 2;

inline constexpr unsigned long long kDefaultSeed = 20200101ULL;

/// Entry point shared by the executable and the tests. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace trackid::cli
