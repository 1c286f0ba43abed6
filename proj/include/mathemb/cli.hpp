#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mathemb {

inline constexpr std::string_view kToolName = "mathemb";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Entry point of the `mathemb` executable. Returns the process exit code:
/// 0 on success, 1 for data errors, 2 for usage errors.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace mathemb
