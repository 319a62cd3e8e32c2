#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "omlog/model.hpp"

namespace omlog {

// One appended record. `parent` points at the entry that was the head when
// this one was recorded (or at an explicit override while branching); the
// first entry of a log has no parent.
struct Entry {
    EntryId id;
    std::optional<EntryId> parent;
    Event event;
    TagMap tags;
};

// Record codec shared by the log file and the export format. An entry line
// looks like
//   {"recordType":"entry","id":"main:3","parent":"main:2",
//    "eventKind":"MethodAdded","payload":{...},"tags":{...}}
// and a detached tag line like
//   {"recordType":"tag","target":"main:3","key":"comment","value":"..."}
nlohmann::json entryToRecord(const Entry& entry);
Entry entryFromRecord(const nlohmann::json& record);
nlohmann::json tagToRecord(const EntryId& target, const Tag& tag);

// Merges one tag into a map, honouring which keys may repeat.
void mergeTag(TagMap& tags, const Tag& tag);

// An append-only event log stored as one JSON record per line under an
// "omlog 1" header line. Writers hold an exclusive flock on the file and
// fsync after every record; readers tolerate a torn final line, so a crash
// can cost at most the record that was being written.
class Log {
public:
    static Log create(const std::filesystem::path& file);
    static Log openForAppend(const std::filesystem::path& file);
    static Log loadReadOnly(const std::filesystem::path& file);

    Log(Log&&) noexcept;
    Log& operator=(Log&&) noexcept;
    ~Log();
    Log(const Log&) = delete;
    Log& operator=(const Log&) = delete;

    const std::string& name() const { return name_; }
    const std::filesystem::path& path() const { return path_; }
    bool writable() const { return fd_ >= 0; }

    // Set when loading dropped a torn final line (and, for append mode,
    // trimmed it off the file). Describes what was dropped and where.
    const std::optional<std::string>& truncationNote() const { return truncationNote_; }

    const std::vector<Entry>& entries() const { return entries_; }
    const Entry* find(const EntryId& id) const;
    const Entry& at(const EntryId& id) const; // throws UnknownEntryError

    // The head is the most recent entry not tagged onto a branch; new entries
    // become children of it. Branch-tagged entries keep their own per-label
    // tips instead.
    std::optional<EntryId> head() const { return head_; }
    const std::map<std::string, EntryId>& branchHeads() const { return branchHeads_; }

    EntryId append(Event event, TagMap tags = {},
                   std::optional<EntryId> parentOverride = std::nullopt);
    void attachTag(const EntryId& target, const Tag& tag);

    // Entries after the most recent save point (session save or version
    // save); if none, after the first session start; if none, everything.
    std::vector<const Entry*> entriesAfterLastSave() const;

    // Entries whose event touches `unit`. Split entries count as touching a
    // unit when any of their targets does.
    std::vector<const Entry*> entriesAffecting(const CodeUnitRef& unit) const;

private:
    Log() = default;
    void load(bool repairTail);
    void appendLine(const std::string& line);
    void admit(Entry entry);

    std::filesystem::path path_;
    std::string name_;
    int fd_ = -1;
    std::vector<Entry> entries_;
    std::map<EntryId, std::size_t> index_;
    std::optional<EntryId> head_;
    std::map<std::string, EntryId> branchHeads_;
    std::optional<std::string> truncationNote_;
};

} // namespace omlog
