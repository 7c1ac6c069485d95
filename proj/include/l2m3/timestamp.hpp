#pragma once

#include <chrono>
#include <string>

namespace l2m3 {

// ISO 8601 UTC with milliseconds, e.g. "2024-03-01T09:15:02.123Z".
std::string utc_timestamp(std::chrono::system_clock::time_point t = std::chrono::system_clock::now());

} // namespace l2m3
