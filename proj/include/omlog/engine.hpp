#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "omlog/checkout.hpp"
#include "omlog/codebase.hpp"
#include "omlog/log.hpp"
#include "omlog/views.hpp"

namespace omlog {

// Metadata stamped onto everything one operation appends. An empty field is
// simply not recorded, which keeps test logs free of wall-clock noise.
struct RecordContext {
    std::string author;
    std::string timestamp; // ISO-8601, supplied by the caller
    std::optional<std::string> branch;
};

// One source entry that could not be replayed, and why.
struct SkipReport {
    EntryId source;
    std::string reason;
};

struct ReplayResult {
    std::vector<EntryId> appended;
    std::vector<SkipReport> skipped;
    std::optional<std::string> sourceNote; // e.g. the source log was torn
};

// A working directory bound to one event log: the log is the source of
// truth, the checked-out package tree is a projection of its mainline
// replay. Every operation validates against the in-memory codebase first,
// then appends, then applies, so the log never records a change that did
// not happen.
class Workspace {
public:
    static Workspace init(const std::filesystem::path& dir, const std::string& logName);
    static Workspace open(const std::filesystem::path& dir, const std::string& logName);

    const std::filesystem::path& dir() const { return dir_; }
    const Codebase& codebase() const { return codebase_; }
    Log& log() { return log_; }
    const Log& log() const { return log_; }

    // Replays every mainline elementary entry (those not tagged onto a
    // branch) from scratch; the workspace state is by definition this.
    static Codebase replayMainline(const Log& log);

    // The state a branch is at: the elementary events along the parent
    // chain of its latest entry.
    Codebase branchCodebase(const std::string& branchLabel) const;

    void syncCheckout() const { writeCheckout(codebase_, dir_); }

    View unitView(const CodeUnitRef& unit) const { return buildView(log_, unit); }

    // --- recording ------------------------------------------------------
    EntryId record(const Event& event, const RecordContext& ctx);

    EntryId startSession(const RecordContext& ctx);
    EntryId saveSession(const RecordContext& ctx, std::optional<std::string> label = {});
    EntryId endSession(const RecordContext& ctx);
    EntryId evaluate(const std::string& source, const RecordContext& ctx);

    // --- undo / redo ----------------------------------------------------
    std::vector<EntryId> undo(const EntryId& target, const RecordContext& ctx);
    std::vector<EntryId> redo(std::optional<EntryId> target, const RecordContext& ctx);

    // --- history rewriting ---------------------------------------------
    std::vector<EntryId> condense(const CodeUnitRef& unit, const RecordContext& ctx);
    std::vector<EntryId> split(const std::vector<EntryId>& targets,
                               const std::string& branchLabel, const RecordContext& ctx);

    // --- refactorings ---------------------------------------------------
    std::vector<EntryId> renameMethod(const CodeUnitRef& method, const std::string& newSelector,
                                      const RecordContext& ctx,
                                      std::optional<EntryId> redoneFrom = {});
    std::vector<EntryId> renameClass(const CodeUnitRef& cls, const std::string& newName,
                                     const RecordContext& ctx,
                                     std::optional<EntryId> redoneFrom = {});

    // --- versions -------------------------------------------------------
    EntryId saveVersion(const std::string& packageName, const std::string& label,
                        const RecordContext& ctx);
    std::vector<EntryId> loadVersion(const std::string& packageName, const std::string& label,
                                     const RecordContext& ctx,
                                     std::optional<EntryId> triggeredBy = {});

    // --- tags -----------------------------------------------------------
    void comment(const EntryId& target, const std::string& text);
    void attachTag(const EntryId& target, const Tag& tag) { log_.attachTag(target, tag); }

    // --- crossing log boundaries ---------------------------------------
    // Replays the tail of another (typically crashed) log after `afterId`:
    // every elementary event that still applies is copied in, tagged with
    // where it came from. Entries that no longer apply are reported, not
    // replayed. When nothing applies, nothing at all is appended.
    ReplayResult recoverSession(const std::filesystem::path& crashedLog,
                                std::optional<EntryId> afterId, const RecordContext& ctx);

    void exportLog(const std::filesystem::path& outFile) const;
    ReplayResult importLog(const std::filesystem::path& inFile, const RecordContext& ctx);

    // Re-executes the refactoring intents found in an exported log against
    // this codebase, recomputing the affected senders locally.
    ReplayResult replayRefactorings(const std::filesystem::path& inFile,
                                    const RecordContext& ctx);

    // Reads an exported log back into entries (also used for --inspect).
    static std::vector<Entry> readExportFile(const std::filesystem::path& inFile);

private:
    Workspace(std::filesystem::path dir, Log log);

    TagMap baseTags(const RecordContext& ctx) const;
    EntryId appendApplied(const Event& event, TagMap tags,
                          std::optional<EntryId> parentOverride = {});
    std::vector<Event> cascadeInverses(const Entry& target) const;
    ReplayResult replayEntries(const std::vector<const Entry*>& sources,
                               std::optional<EntryId> wrapperTarget, const RecordContext& ctx);

    std::filesystem::path dir_;
    Log log_;
    Codebase codebase_;
};

} // namespace omlog
