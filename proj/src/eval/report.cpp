#include "l2m3/eval/report.hpp"

#include <cmath>
#include <ostream>
#include <set>

#include "l2m3/error.hpp"
#include "l2m3/hash.hpp"

namespace l2m3::eval {

using nlohmann::json;

std::string_view report_kind_name(ReportKind k) {
    switch (k) {
        case ReportKind::Translation: return "TRANSLATION";
        case ReportKind::RoundTrip: return "ROUND_TRIP";
        case ReportKind::Rht: return "RHT";
    }
    return "TRANSLATION";
}

ReportKind parse_report_kind(std::string_view name) {
    if (name == "TRANSLATION") return ReportKind::Translation;
    if (name == "ROUND_TRIP") return ReportKind::RoundTrip;
    if (name == "RHT") return ReportKind::Rht;
    throw Error(Errc::InvalidArgument, "unknown report kind: " + std::string(name));
}

void EvalReport::validate() const {
    for (const auto & row : rows) {
        for (const auto & [key, value] : row.metrics) {
            if (!std::isfinite(value)) {
                throw Error(Errc::InvalidArgument, "metric " + key + " of row " + row.name + " is not finite");
            }
        }
    }
}

json to_json(const EvalReport & r) {
    r.validate();
    json rows = json::array();
    for (const auto & row : r.rows) {
        json metrics = json::object();
        for (const auto & [k, v] : row.metrics) metrics[k] = v;
        rows.push_back({{"name", row.name}, {"metrics", std::move(metrics)}});
    }
    return {{"kind", report_kind_name(r.kind)},
            {"rows", std::move(rows)},
            {"config_digest", r.config_digest},
            {"timestamp", r.timestamp}};
}

EvalReport report_from_json(const json & j) {
    try {
        EvalReport r;
        r.kind = parse_report_kind(j.at("kind").get<std::string>());
        for (const auto & row : j.at("rows")) {
            ReportRow out;
            out.name = row.at("name").get<std::string>();
            for (const auto & [k, v] : row.at("metrics").items()) out.metrics[k] = v.get<double>();
            r.rows.push_back(std::move(out));
        }
        r.config_digest = j.at("config_digest").get<std::string>();
        r.timestamp = j.at("timestamp").get<std::string>();
        r.validate();
        return r;
    } catch (const json::exception & e) {
        throw Error(Errc::InvalidArgument, std::string("malformed report: ") + e.what());
    }
}

namespace {

std::string csv_field(const std::string & s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

} // namespace

void write_csv(std::ostream & out, const EvalReport & r) {
    r.validate();
    std::set<std::string> keys;
    for (const auto & row : r.rows)
        for (const auto & kv : row.metrics) keys.insert(kv.first);
    out << "name";
    for (const auto & k : keys) out << ',' << csv_field(k);
    out << '\n';
    for (const auto & row : r.rows) {
        out << csv_field(row.name);
        for (const auto & k : keys) {
            out << ',';
            auto it = row.metrics.find(k);
            if (it != row.metrics.end()) out << json(it->second).dump();
        }
        out << '\n';
    }
}

std::string config_digest(const json & config) {
    return hex64(fnv1a64(config.dump()));
}

} // namespace l2m3::eval
