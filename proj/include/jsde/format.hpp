#pragma once

#include <string>

namespace jsde {

/// Fixed 17-significant-digit rendering used by every CSV/JSON writer so
/// repeated runs are byte-identical. Non-finite values print as nan/inf/-inf.
std::string format_real(double value);

}  // namespace jsde
