#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "l2m3/pipeline/pipeline.hpp"

namespace l2m3::service {

struct TranscriptEntry {
    std::string session_id;
    std::size_t turn_index = 0;
    std::string user_text_local;
    std::string response_text_local;
    pipeline::OutcomeKind outcome_kind = pipeline::OutcomeKind::Answer;
    std::vector<pipeline::StageRecord> trace;
    std::string timestamp;

    bool operator==(const TranscriptEntry &) const = default;
};

nlohmann::json to_json(const TranscriptEntry & e);
TranscriptEntry entry_from_json(const nlohmann::json & j);

struct SessionMeta {
    std::string session_id;
    std::string lang;
    std::string created_at;
};

struct LoadedTranscript {
    SessionMeta meta;
    std::vector<TranscriptEntry> entries;
    // Bytes cut from the end of the log (torn or invalid tail).
    std::size_t discarded_bytes = 0;
};

// Session ids usable as file names: 1-64 characters of [A-Za-z0-9_-].
bool valid_session_id(const std::string & id);

// One append-only JSONL log plus a metadata file per session:
//   <data_dir>/sessions/<id>.jsonl, <id>.meta.json
// Each entry goes out in a single write on an O_APPEND descriptor followed by
// fsync; metadata is written to a temporary file and renamed into place.
class TranscriptStore {
public:
    // Creates the sessions directory. Throws Io when it is not writable.
    explicit TranscriptStore(std::filesystem::path data_dir);

    // Throws Io.
    void create(const SessionMeta & meta);
    bool exists(const std::string & session_id) const;
    // Throws Io.
    void append(const TranscriptEntry & entry);

    // Entries up to the first torn, unparsable or out-of-sequence line; the
    // file is truncated to that prefix. nullopt when the session is unknown.
    std::optional<LoadedTranscript> load(const std::string & session_id);

    std::filesystem::path log_path(const std::string & session_id) const;
    std::filesystem::path meta_path(const std::string & session_id) const;

private:
    std::filesystem::path dir_;
};

} // namespace l2m3::service
