#include "l2m3/corpus/pii.hpp"

#include <algorithm>
#include <regex>

#include "l2m3/backends/backend.hpp"
#include "l2m3/error.hpp"
#include "json.hpp"

namespace l2m3::corpus {

namespace {

struct RegexDetector {
    std::string_view id;
    PiiCategory category;
    std::regex pattern;
    int group;  // capture group holding the span
};

const std::vector<RegexDetector> & regex_detectors() {
    static const std::vector<RegexDetector> detectors = [] {
        std::vector<RegexDetector> d;
        d.push_back({"EMAIL", PiiCategory::Email,
                     std::regex(R"([A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(?:\.[A-Za-z0-9\-]+)+)"), 0});
        // 7-15 digits with optional separators, not glued to other digits.
        d.push_back({"PHONE", PiiCategory::Phone,
                     std::regex(R"((^|[^\d+])(\+?\(?\d(?:[ \-()]{0,3}\d){6,14})(?!\d))"), 2});
        d.push_back({"ID_NUMBER", PiiCategory::IdNumber, std::regex(R"(\d{9,})"), 0});
        d.push_back({"NAME", PiiCategory::Name,
                     std::regex(R"(\b(?:Dr|Mr|Mrs|Ms)\. [A-Z][a-z]+(?: [A-Z][a-z]+)?)"), 0});
        d.push_back({"ADDRESS", PiiCategory::Address,
                     std::regex(R"(\b\d{1,5} (?:[A-Z][a-z]+ ){1,3}(?:Street|St|Road|Rd|Avenue|Ave|Lane|Ln)\b\.?)"), 0});
        return d;
    }();
    return detectors;
}

int priority(PiiCategory c) {
    switch (c) {
        case PiiCategory::Email:    return 0;
        case PiiCategory::IdNumber: return 1;
        case PiiCategory::Phone:    return 2;
        case PiiCategory::Name:     return 3;
        case PiiCategory::Address:  return 4;
    }
    return 5;
}

bool overlaps(const PiiFinding & a, const PiiFinding & b) {
    return a.start < b.end && b.start < a.end;
}

void run_regex(const RegexDetector & det, const std::string & text, std::vector<PiiFinding> & out) {
    for (auto it = std::sregex_iterator(text.begin(), text.end(), det.pattern); it != std::sregex_iterator(); ++it) {
        const auto & m = *it;
        const auto pos = static_cast<std::size_t>(m.position(det.group));
        const auto len = static_cast<std::size_t>(m.length(det.group));
        if (len > 0) {
            out.push_back({pos, pos + len, det.category, std::string(det.id)});
        }
    }
}

std::vector<PiiFinding> run_judge(std::string_view text, const backends::ChatBackend * judge) {
    if (judge == nullptr) {
        throw Error(Errc::BackendUnavailable, "LLM_JUDGE requested but no judge backend is configured");
    }
    std::string answer;
    try {
        backends::ChatRequest req;
        req.messages.push_back({std::string(roles::chw), llm_judge_prompt(text), english()});
        answer = judge->chat(req).message.content;
    } catch (const Error & e) {
        throw Error(Errc::BackendUnavailable, std::string("PII judge failed: ") + e.what());
    }
    const auto open = answer.find('[');
    const auto close = answer.rfind(']');
    if (open == std::string::npos || close == std::string::npos || close < open) {
        throw Error(Errc::BackendUnavailable, "PII judge answer has no JSON array");
    }
    nlohmann::json spans;
    try {
        spans = nlohmann::json::parse(answer.substr(open, close - open + 1));
    } catch (const nlohmann::json::exception &) {
        throw Error(Errc::BackendUnavailable, "PII judge answer is not valid JSON");
    }
    std::vector<PiiFinding> out;
    for (const auto & s : spans) {
        if (!s.is_object() || !s.contains("text") || !s["text"].is_string() || !s.contains("category") ||
            !s["category"].is_string()) {
            continue;
        }
        const auto category = parse_category(s["category"].get<std::string>());
        const auto needle = s["text"].get<std::string>();
        if (!category || needle.empty()) {
            continue;
        }
        for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + 1)) {
            out.push_back({pos, pos + needle.size(), *category, std::string(llm_judge_detector)});
        }
    }
    return out;
}

} // namespace

std::string_view category_name(PiiCategory c) {
    switch (c) {
        case PiiCategory::Email:    return "EMAIL";
        case PiiCategory::Phone:    return "PHONE";
        case PiiCategory::Name:     return "NAME";
        case PiiCategory::IdNumber: return "ID_NUMBER";
        case PiiCategory::Address:  return "ADDRESS";
    }
    return "UNKNOWN";
}

std::optional<PiiCategory> parse_category(std::string_view name) {
    for (auto c : {PiiCategory::Email, PiiCategory::Phone, PiiCategory::Name, PiiCategory::IdNumber,
                   PiiCategory::Address}) {
        if (category_name(c) == name) {
            return c;
        }
    }
    return std::nullopt;
}

const std::vector<std::string> & builtin_detectors() {
    static const std::vector<std::string> ids = {"EMAIL", "PHONE", "ID_NUMBER", "NAME", "ADDRESS"};
    return ids;
}

std::string llm_judge_prompt(std::string_view text) {
    std::string p =
        "You find personally identifiable information (PII) in medical dialogue text.\n"
        "Categories: EMAIL, PHONE, NAME, ID_NUMBER, ADDRESS.\n"
        "Reply with a JSON array of {\"text\": <exact span>, \"category\": <category>} objects, "
        "or [] when the text has no PII.\n"
        "\n"
        "Text: Please call Mrs. Lakshmi Devi on 98480 22338 about her son's fever.\n"
        "PII: [{\"text\": \"Mrs. Lakshmi Devi\", \"category\": \"NAME\"}, "
        "{\"text\": \"98480 22338\", \"category\": \"PHONE\"}]\n"
        "\n"
        "Text: The newborn has had yellow eyes since yesterday and is feeding poorly.\n"
        "PII: []\n"
        "\n"
        "Text: Send the referral for patient 4452190087 to amina.juma@kliniki.or.tz, 14 Uhuru Street.\n"
        "PII: [{\"text\": \"4452190087\", \"category\": \"ID_NUMBER\"}, "
        "{\"text\": \"amina.juma@kliniki.or.tz\", \"category\": \"EMAIL\"}, "
        "{\"text\": \"14 Uhuru Street\", \"category\": \"ADDRESS\"}]\n"
        "\n"
        "Text: ";
    p += text;
    p += "\nPII:";
    return p;
}

std::vector<PiiFinding> scan_pii(std::string_view text, const std::vector<std::string> & detectors,
                                 const backends::ChatBackend * judge) {
    if (detectors.empty()) {
        throw Error(Errc::InvalidArgument, "no PII detectors requested");
    }
    std::vector<const RegexDetector *> regexes;
    bool use_judge = false;
    for (const auto & id : detectors) {
        if (id == llm_judge_detector) {
            use_judge = true;
            continue;
        }
        auto it = std::find_if(regex_detectors().begin(), regex_detectors().end(),
                               [&](const RegexDetector & d) { return d.id == id; });
        if (it == regex_detectors().end()) {
            throw Error(Errc::InvalidArgument, "unknown PII detector '" + id + "'");
        }
        regexes.push_back(&*it);
    }

    std::vector<PiiFinding> accepted;
    std::vector<PiiFinding> candidates = use_judge ? run_judge(text, judge) : std::vector<PiiFinding>{};
    // Accepted spans are masked with a byte no detector consumes and the
    // remaining text is rescanned, so a candidate that lost an overlap cannot
    // leave a detectable remainder behind.
    std::string masked(text);
    while (true) {
        for (const auto * det : regexes) {
            run_regex(*det, masked, candidates);
        }
        std::sort(candidates.begin(), candidates.end(), [](const PiiFinding & a, const PiiFinding & b) {
            const auto la = a.end - a.start;
            const auto lb = b.end - b.start;
            if (la != lb) return la > lb;
            if (a.start != b.start) return a.start < b.start;
            if (priority(a.category) != priority(b.category)) return priority(a.category) < priority(b.category);
            return a.detector < b.detector;
        });
        bool grew = false;
        for (const auto & c : candidates) {
            if (std::none_of(accepted.begin(), accepted.end(), [&](const PiiFinding & a) { return overlaps(a, c); })) {
                accepted.push_back(c);
                std::fill(masked.begin() + static_cast<std::ptrdiff_t>(c.start),
                          masked.begin() + static_cast<std::ptrdiff_t>(c.end), '\x01');
                grew = true;
            }
        }
        candidates.clear();
        if (!grew || regexes.empty()) {
            break;
        }
    }
    std::sort(accepted.begin(), accepted.end(),
              [](const PiiFinding & a, const PiiFinding & b) { return a.start < b.start; });
    return accepted;
}

std::string anonymize(std::string_view text, std::vector<PiiFinding> findings) {
    for (const auto & f : findings) {
        if (f.start >= f.end || f.end > text.size()) {
            throw Error(Errc::OutOfRange, "finding [" + std::to_string(f.start) + ", " + std::to_string(f.end) +
                                              ") does not fit a text of " + std::to_string(text.size()) + " bytes");
        }
    }
    std::sort(findings.begin(), findings.end(),
              [](const PiiFinding & a, const PiiFinding & b) { return a.start < b.start; });
    for (std::size_t i = 1; i < findings.size(); ++i) {
        if (findings[i].start < findings[i - 1].end) {
            throw Error(Errc::OverlappingFindings, "findings at bytes " + std::to_string(findings[i - 1].start) +
                                                       " and " + std::to_string(findings[i].start) + " overlap");
        }
    }
    std::string out(text);
    for (auto it = findings.rbegin(); it != findings.rend(); ++it) {
        std::string tag = "[REDACTED:";
        tag += category_name(it->category);
        tag += ']';
        out.replace(it->start, it->end - it->start, tag);
    }
    return out;
}

} // namespace l2m3::corpus
