#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace l2m3::eval {

enum class ReportKind { Translation, RoundTrip, Rht };

std::string_view report_kind_name(ReportKind k);
ReportKind parse_report_kind(std::string_view name);

struct ReportRow {
    std::string name;
    std::map<std::string, double> metrics;

    bool operator==(const ReportRow &) const = default;
};

struct EvalReport {
    ReportKind kind = ReportKind::Translation;
    std::vector<ReportRow> rows;
    std::string config_digest;
    std::string timestamp;  // ISO 8601, UTC

    // Throws InvalidArgument when a metric is not finite.
    void validate() const;
};

// {"kind", "rows": [{"name", "metrics": {..}}], "config_digest", "timestamp"}
nlohmann::json to_json(const EvalReport & r);
EvalReport report_from_json(const nlohmann::json & j);

// Header "name,<metric>,..." over the union of metric keys (sorted); missing
// metrics are left empty.
void write_csv(std::ostream & out, const EvalReport & r);

// Stable digest of a run configuration: FNV-1a 64 over the compact dump of
// `config` (object keys are sorted), as 16 hex digits.
std::string config_digest(const nlohmann::json & config);

} // namespace l2m3::eval
