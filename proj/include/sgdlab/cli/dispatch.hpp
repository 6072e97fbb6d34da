#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sgdlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitConfig = 2;

// args excludes the program name. Data goes to `out`, progress and errors to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace sgdlab::cli
