#include "omlog/log.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "omlog/errors.hpp"

namespace omlog {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kHeader = "omlog 1";

std::string logNameOf(const fs::path& file) {
    std::string stem = file.stem().string();
    if (stem.empty()) throw LogError("log file needs a name: " + file.string());
    return stem;
}

std::string readWholeFile(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LogError("cannot open " + path.string() + ": " + std::strerror(errno));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

[[noreturn]] void failErrno(const std::string& what, const fs::path& path) {
    throw LogError(what + " " + path.string() + ": " + std::strerror(errno));
}

} // namespace

json entryToRecord(const Entry& entry) {
    json payload = eventToJson(entry.event);
    std::string kind = payload.at("kind").get<std::string>();
    payload.erase("kind");
    json record;
    record["recordType"] = "entry";
    record["id"] = entry.id.str();
    record["parent"] = entry.parent ? json(entry.parent->str()) : json(nullptr);
    record["eventKind"] = kind;
    record["payload"] = std::move(payload);
    record["tags"] = tagMapToJson(entry.tags);
    return record;
}

Entry entryFromRecord(const json& record) {
    Entry entry;
    entry.id = EntryId::parse(record.at("id").get<std::string>());
    const auto& parent = record.at("parent");
    if (!parent.is_null()) entry.parent = EntryId::parse(parent.get<std::string>());
    json payload = record.at("payload");
    payload["kind"] = record.at("eventKind").get<std::string>();
    entry.event = eventFromJson(payload);
    entry.tags = tagMapFromJson(record.at("tags"));
    return entry;
}

json tagToRecord(const EntryId& target, const Tag& tag) {
    json record;
    record["recordType"] = "tag";
    record["target"] = target.str();
    record["key"] = tagKeyName(tag.key);
    if (const auto* id = std::get_if<EntryId>(&tag.value)) {
        record["value"] = id->str();
    } else {
        record["value"] = std::get<std::string>(tag.value);
    }
    return record;
}

void mergeTag(TagMap& tags, const Tag& tag) {
    if (tagKeyRepeatable(tag.key)) {
        tags[tag.key].push_back(tag.value);
    } else {
        tags[tag.key] = {tag.value};
    }
}

// ---------------------------------------------------------------------------
// Log
// ---------------------------------------------------------------------------

Log::Log(Log&& other) noexcept { *this = std::move(other); }

Log& Log::operator=(Log&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        path_ = std::move(other.path_);
        name_ = std::move(other.name_);
        fd_ = other.fd_;
        other.fd_ = -1;
        entries_ = std::move(other.entries_);
        index_ = std::move(other.index_);
        head_ = std::move(other.head_);
        branchHeads_ = std::move(other.branchHeads_);
        truncationNote_ = std::move(other.truncationNote_);
    }
    return *this;
}

Log::~Log() {
    if (fd_ >= 0) ::close(fd_);
}

Log Log::create(const fs::path& file) {
    if (fs::exists(file)) throw LogError("log already exists: " + file.string());
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    Log log;
    log.path_ = file;
    log.name_ = logNameOf(file);
    log.fd_ = ::open(file.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644);
    if (log.fd_ < 0) failErrno("cannot create", file);
    if (::flock(log.fd_, LOCK_EX | LOCK_NB) != 0) failErrno("cannot lock", file);
    log.appendLine(kHeader);
    return log;
}

Log Log::openForAppend(const fs::path& file) {
    Log log;
    log.path_ = file;
    log.name_ = logNameOf(file);
    log.fd_ = ::open(file.c_str(), O_RDWR, 0644);
    if (log.fd_ < 0) failErrno("cannot open", file);
    if (::flock(log.fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(log.fd_);
        log.fd_ = -1;
        throw LogError("another writer holds " + file.string());
    }
    log.load(/*repairTail=*/true);
    if (::lseek(log.fd_, 0, SEEK_END) < 0) failErrno("cannot seek in", file);
    return log;
}

Log Log::loadReadOnly(const fs::path& file) {
    Log log;
    log.path_ = file;
    log.name_ = logNameOf(file);
    log.load(/*repairTail=*/false);
    return log;
}

void Log::load(bool repairTail) {
    std::string text = readWholeFile(path_);

    // Peel off complete lines; whatever is left has no final newline and is
    // the torn tail of an interrupted append.
    std::vector<std::string> lines;
    std::size_t pos = 0;
    std::size_t cleanEnd = 0;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string::npos) break;
        lines.push_back(text.substr(pos, eol - pos));
        pos = eol + 1;
        cleanEnd = pos;
    }
    std::string torn = text.substr(cleanEnd);

    if (lines.empty()) {
        // Not even the header made it out whole. Tolerate only something that
        // really looks like an interrupted header write.
        if (std::string(kHeader).starts_with(torn)) {
            std::ostringstream note;
            note << "log holds no complete records; torn header (" << torn.size()
                 << " bytes) at offset 0";
            truncationNote_ = note.str();
        } else {
            throw LogError(path_.string() + " is not an event log");
        }
    } else if (lines.front() != kHeader) {
        throw LogError(path_.string() + " is not an event log (bad header '" + lines.front() +
                       "')");
    }

    for (std::size_t i = 1; i < lines.size(); ++i) {
        json record;
        try {
            record = json::parse(lines[i]);
        } catch (const json::exception& e) {
            throw LogError(path_.string() + " line " + std::to_string(i + 1) +
                           " is not valid JSON: " + e.what());
        }
        try {
            std::string type = record.at("recordType").get<std::string>();
            if (type == "entry") {
                admit(entryFromRecord(record));
            } else if (type == "tag") {
                EntryId target = EntryId::parse(record.at("target").get<std::string>());
                TagKey key = parseTagKey(record.at("key").get<std::string>());
                std::string value = record.at("value").get<std::string>();
                Tag tag = tagKeyHoldsEntryId(key) ? Tag::entry(key, EntryId::parse(value))
                                                  : Tag::text(key, value);
                auto it = index_.find(target);
                if (it == index_.end()) {
                    throw LogError("tag targets unknown entry " + target.str());
                }
                mergeTag(entries_[it->second].tags, tag);
                if (key == TagKey::BranchLabel) {
                    branchHeads_[std::get<std::string>(tag.value)] = target;
                }
            } else {
                throw LogError("unknown record type '" + type + "'");
            }
        } catch (const LogError&) {
            throw;
        } catch (const std::exception& e) {
            throw LogError(path_.string() + " line " + std::to_string(i + 1) + ": " + e.what());
        }
    }

    if (!torn.empty() && !lines.empty()) {
        std::ostringstream note;
        note << "dropped torn record (" << torn.size() << " bytes) at offset " << cleanEnd;
        truncationNote_ = note.str();
    }

    if (repairTail && truncationNote_) {
        if (::ftruncate(fd_, static_cast<off_t>(cleanEnd)) != 0) {
            failErrno("cannot trim torn tail of", path_);
        }
        if (lines.empty()) {
            // The header itself was torn off; lay it down again.
            if (::lseek(fd_, 0, SEEK_END) < 0) failErrno("cannot seek in", path_);
            appendLine(kHeader);
        }
    }
}

void Log::appendLine(const std::string& line) {
    if (fd_ < 0) throw LogError("log " + name_ + " is not open for writing");
    std::string buf = line + "\n";
    std::size_t written = 0;
    while (written < buf.size()) {
        ssize_t n = ::write(fd_, buf.data() + written, buf.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            failErrno("write failed on", path_);
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) failErrno("fsync failed on", path_);
}

void Log::admit(Entry entry) {
    if (entry.id.logName != name_) {
        throw LogError("entry " + entry.id.str() + " does not belong to log '" + name_ + "'");
    }
    if (entry.id.sequence != entries_.size() + 1) {
        throw LogError("entry " + entry.id.str() + " breaks the sequence (expected " +
                       std::to_string(entries_.size() + 1) + ")");
    }
    if (entry.parent && !index_.count(*entry.parent)) {
        throw LogError("entry " + entry.id.str() + " references unknown parent " +
                       entry.parent->str());
    }
    if (auto branch = firstTextValue(entry.tags, TagKey::BranchLabel)) {
        branchHeads_[*branch] = entry.id;
    } else {
        head_ = entry.id;
    }
    index_[entry.id] = entries_.size();
    entries_.push_back(std::move(entry));
}

EntryId Log::append(Event event, TagMap tags, std::optional<EntryId> parentOverride) {
    Entry entry;
    entry.id = EntryId{name_, entries_.size() + 1};
    entry.parent = parentOverride ? parentOverride : head_;
    entry.event = std::move(event);
    entry.tags = std::move(tags);
    appendLine(entryToRecord(entry).dump());
    EntryId id = entry.id;
    admit(std::move(entry));
    return id;
}

void Log::attachTag(const EntryId& target, const Tag& tag) {
    auto it = index_.find(target);
    if (it == index_.end()) throw UnknownEntryError("no entry " + target.str());
    appendLine(tagToRecord(target, tag).dump());
    mergeTag(entries_[it->second].tags, tag);
    if (tag.key == TagKey::BranchLabel) {
        branchHeads_[std::get<std::string>(tag.value)] = target;
    }
}

const Entry* Log::find(const EntryId& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &entries_[it->second];
}

const Entry& Log::at(const EntryId& id) const {
    const Entry* entry = find(id);
    if (!entry) throw UnknownEntryError("no entry " + id.str() + " in log '" + name_ + "'");
    return *entry;
}

std::vector<const Entry*> Log::entriesAfterLastSave() const {
    std::size_t start = 0;
    bool anchored = false;
    for (std::size_t i = entries_.size(); i-- > 0;) {
        const Event& event = entries_[i].event;
        if (std::holds_alternative<SessionSave>(event) ||
            std::holds_alternative<SaveVersion>(event)) {
            start = i + 1;
            anchored = true;
            break;
        }
    }
    if (!anchored) {
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (std::holds_alternative<SessionStart>(entries_[i].event)) {
                start = i + 1;
                anchored = true;
                break;
            }
        }
    }
    std::vector<const Entry*> out;
    for (std::size_t i = start; i < entries_.size(); ++i) out.push_back(&entries_[i]);
    return out;
}

std::vector<const Entry*> Log::entriesAffecting(const CodeUnitRef& unit) const {
    std::vector<const Entry*> out;
    for (const auto& entry : entries_) {
        bool hit = affects(entry.event, unit);
        if (!hit) {
            if (const auto* split = std::get_if<Split>(&entry.event)) {
                for (const auto& target : split->targets) {
                    const Entry* t = find(target);
                    if (t && affects(t->event, unit)) {
                        hit = true;
                        break;
                    }
                }
            }
        }
        if (hit) out.push_back(&entry);
    }
    return out;
}

} // namespace omlog
