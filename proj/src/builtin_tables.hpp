#pragma once

#include <string_view>

namespace mathemb::detail {

/// Contents of data/tables/<name>, embedded at configure time.
std::string_view builtin_table(std::string_view name);

}  // namespace mathemb::detail
