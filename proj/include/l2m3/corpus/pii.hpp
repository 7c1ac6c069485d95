#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace l2m3::backends {
class ChatBackend;
}

namespace l2m3::corpus {

enum class PiiCategory { Email, Phone, Name, IdNumber, Address };

std::string_view category_name(PiiCategory c);
std::optional<PiiCategory> parse_category(std::string_view name);

// Byte span [start, end) into the scanned text.
struct PiiFinding {
    std::size_t start = 0;
    std::size_t end = 0;
    PiiCategory category = PiiCategory::Email;
    std::string detector;

    bool operator==(const PiiFinding &) const = default;
};

// Detector ids: "EMAIL", "PHONE", "ID_NUMBER", "NAME", "ADDRESS" (regex) and
// "LLM_JUDGE" (three-shot prompt against a chat backend).
inline constexpr std::string_view llm_judge_detector = "LLM_JUDGE";
const std::vector<std::string> & builtin_detectors();

// Candidates from all requested detectors are resolved longest-first, then by
// earliest start, then by category priority EMAIL > ID_NUMBER > PHONE > NAME >
// ADDRESS; the survivors come back ordered by start.
// Throws InvalidArgument for an unknown or empty detector list and
// BackendUnavailable when LLM_JUDGE is requested and the judge fails.
std::vector<PiiFinding> scan_pii(std::string_view text, const std::vector<std::string> & detectors,
                                 const backends::ChatBackend * judge = nullptr);

// The fixed three-example prompt sent to the judge for `text`.
std::string llm_judge_prompt(std::string_view text);

// Replaces each span with "[REDACTED:<CATEGORY>]". Throws OverlappingFindings
// or OutOfRange.
std::string anonymize(std::string_view text, std::vector<PiiFinding> findings);

} // namespace l2m3::corpus
