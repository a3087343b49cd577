#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gamefi {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Dispatches `simulate`, `report` and `oracle`. `args` excludes the
/// program name. Normal output goes to `out`, diagnostics and usage to `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gamefi
