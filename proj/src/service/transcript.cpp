#include "l2m3/service/transcript.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "l2m3/error.hpp"

namespace l2m3::service {

using nlohmann::json;
namespace fs = std::filesystem;

json to_json(const TranscriptEntry & e) {
    json trace = json::array();
    for (const auto & r : e.trace) trace.push_back(pipeline::to_json(r));
    return {{"session_id", e.session_id},
            {"turn_index", e.turn_index},
            {"user_text_local", e.user_text_local},
            {"response_text_local", e.response_text_local},
            {"outcome_kind", pipeline::kind_name(e.outcome_kind)},
            {"trace", std::move(trace)},
            {"timestamp", e.timestamp}};
}

TranscriptEntry entry_from_json(const json & j) {
    try {
        TranscriptEntry e;
        e.session_id = j.at("session_id").get<std::string>();
        e.turn_index = j.at("turn_index").get<std::size_t>();
        e.user_text_local = j.at("user_text_local").get<std::string>();
        e.response_text_local = j.at("response_text_local").get<std::string>();
        e.outcome_kind = pipeline::parse_kind(j.at("outcome_kind").get<std::string>());
        for (const auto & r : j.at("trace")) e.trace.push_back(pipeline::stage_from_json(r));
        e.timestamp = j.at("timestamp").get<std::string>();
        return e;
    } catch (const json::exception & ex) {
        throw Error(Errc::InvalidArgument, std::string("malformed transcript entry: ") + ex.what());
    }
}

bool valid_session_id(const std::string & id) {
    if (id.empty() || id.size() > 64) return false;
    for (char c : id) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
        if (!ok) return false;
    }
    return true;
}

namespace {

[[noreturn]] void io_fail(const std::string & what, const fs::path & path) {
    throw Error(Errc::Io, what + " " + path.string() + ": " + std::strerror(errno));
}

void write_all(int fd, const std::string & data, const fs::path & path) {
    const char * p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
        ssize_t n = ::write(fd, p, left);
        if (n < 0) {
            if (errno == EINTR) continue;
            ::close(fd);
            io_fail("write", path);
        }
        p += n;
        left -= static_cast<std::size_t>(n);
    }
}

void write_file_durably(const fs::path & path, const std::string & data, int flags) {
    int fd = ::open(path.c_str(), flags | O_WRONLY | O_CLOEXEC, 0644);
    if (fd < 0) io_fail("open", path);
    write_all(fd, data, path);
    if (::fsync(fd) != 0) {
        ::close(fd);
        io_fail("fsync", path);
    }
    ::close(fd);
}

void fsync_dir(const fs::path & dir) {
    int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
    if (fd >= 0) {
        ::fsync(fd);
        ::close(fd);
    }
}

} // namespace

TranscriptStore::TranscriptStore(fs::path data_dir) : dir_(std::move(data_dir) / "sessions") {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(Errc::Io, "cannot create " + dir_.string() + ": " + ec.message());
    const auto probe = dir_ / ".write-probe";
    write_file_durably(probe, "", O_CREAT | O_TRUNC);
    fs::remove(probe, ec);
}

fs::path TranscriptStore::log_path(const std::string & id) const {
    return dir_ / (id + ".jsonl");
}

fs::path TranscriptStore::meta_path(const std::string & id) const {
    return dir_ / (id + ".meta.json");
}

void TranscriptStore::create(const SessionMeta & meta) {
    if (!valid_session_id(meta.session_id)) {
        throw Error(Errc::InvalidArgument, "session id not usable as a file name: " + meta.session_id);
    }
    write_file_durably(log_path(meta.session_id), "", O_CREAT | O_APPEND);
    const json j = {{"session_id", meta.session_id}, {"lang", meta.lang}, {"created_at", meta.created_at}};
    const auto tmp = dir_ / (meta.session_id + ".meta.json.tmp");
    write_file_durably(tmp, j.dump() + "\n", O_CREAT | O_TRUNC);
    std::error_code ec;
    fs::rename(tmp, meta_path(meta.session_id), ec);
    if (ec) throw Error(Errc::Io, "rename " + tmp.string() + ": " + ec.message());
    fsync_dir(dir_);
}

bool TranscriptStore::exists(const std::string & id) const {
    std::error_code ec;
    return valid_session_id(id) && fs::exists(meta_path(id), ec);
}

void TranscriptStore::append(const TranscriptEntry & entry) {
    if (!valid_session_id(entry.session_id)) {
        throw Error(Errc::InvalidArgument, "bad session id: " + entry.session_id);
    }
    write_file_durably(log_path(entry.session_id), to_json(entry).dump() + "\n", O_APPEND);
}

std::optional<LoadedTranscript> TranscriptStore::load(const std::string & id) {
    if (!exists(id)) return std::nullopt;

    LoadedTranscript out;
    {
        std::ifstream in(meta_path(id));
        json m = json::parse(in, nullptr, false);
        if (m.is_discarded() || !m.is_object()) throw Error(Errc::Io, "corrupt metadata for session " + id);
        out.meta.session_id = m.value("session_id", id);
        out.meta.lang = m.value("lang", std::string("en"));
        out.meta.created_at = m.value("created_at", std::string());
    }

    const auto path = log_path(id);
    std::string data;
    {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        data = ss.str();
    }

    std::size_t valid = 0;
    while (valid < data.size()) {
        auto nl = data.find('\n', valid);
        if (nl == std::string::npos) break;  // torn final line
        json j = json::parse(data.begin() + static_cast<std::ptrdiff_t>(valid),
                             data.begin() + static_cast<std::ptrdiff_t>(nl), nullptr, false);
        if (j.is_discarded()) break;
        TranscriptEntry e;
        try {
            e = entry_from_json(j);
        } catch (const Error &) {
            break;
        }
        if (e.session_id != id || e.turn_index != out.entries.size()) break;
        out.entries.push_back(std::move(e));
        valid = nl + 1;
    }

    if (valid < data.size()) {
        out.discarded_bytes = data.size() - valid;
        std::error_code ec;
        fs::resize_file(path, valid, ec);
        if (ec) throw Error(Errc::Io, "truncate " + path.string() + ": " + ec.message());
    }
    return out;
}

} // namespace l2m3::service
