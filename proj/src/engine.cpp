#include "omlog/engine.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "omlog/errors.hpp"

namespace omlog {

namespace fs = std::filesystem;

namespace {

bool fileSafeLabel(const std::string& label) {
    if (label.empty()) return false;
    return std::all_of(label.begin(), label.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
    });
}

std::string packageOf(const Event& event) {
    for (const auto& unit : affectedUnits(event)) {
        if (unit.kind == UnitKind::Package) return unit.packageName;
    }
    return {};
}

} // namespace

Workspace::Workspace(fs::path dir, Log log) : dir_(std::move(dir)), log_(std::move(log)) {}

Workspace Workspace::init(const fs::path& dir, const std::string& logName) {
    fs::create_directories(dir);
    Workspace ws(dir, Log::create(dir / (logName + ".omlog")));
    return ws;
}

Workspace Workspace::open(const fs::path& dir, const std::string& logName) {
    Workspace ws(dir, Log::openForAppend(dir / (logName + ".omlog")));
    ws.codebase_ = replayMainline(ws.log_);
    return ws;
}

Codebase Workspace::replayMainline(const Log& log) {
    Codebase codebase;
    for (const auto& entry : log.entries()) {
        if (!isElementary(entry.event)) continue;
        if (entry.tags.count(TagKey::BranchLabel)) continue;
        codebase.applyInPlace(entry.event);
    }
    return codebase;
}

Codebase Workspace::branchCodebase(const std::string& branchLabel) const {
    auto it = log_.branchHeads().find(branchLabel);
    if (it == log_.branchHeads().end()) {
        // The branch does not exist yet; it will fork off the current head.
        return codebase_;
    }
    std::vector<const Entry*> chain;
    for (std::optional<EntryId> cursor = it->second; cursor;) {
        const Entry& entry = log_.at(*cursor);
        chain.push_back(&entry);
        cursor = entry.parent;
    }
    std::reverse(chain.begin(), chain.end());
    Codebase codebase;
    for (const Entry* entry : chain) {
        if (isElementary(entry->event)) codebase.applyInPlace(entry->event);
    }
    return codebase;
}

TagMap Workspace::baseTags(const RecordContext& ctx) const {
    TagMap tags;
    if (!ctx.author.empty()) tags[TagKey::Author] = {ctx.author};
    if (!ctx.timestamp.empty()) tags[TagKey::Timestamp] = {ctx.timestamp};
    return tags;
}

EntryId Workspace::appendApplied(const Event& event, TagMap tags,
                                 std::optional<EntryId> parentOverride) {
    Codebase next = applied(codebase_, event);
    EntryId id = log_.append(event, std::move(tags), std::move(parentOverride));
    codebase_ = std::move(next);
    return id;
}

// ---------------------------------------------------------------------------
// Recording
// ---------------------------------------------------------------------------

EntryId Workspace::record(const Event& event, const RecordContext& ctx) {
    if (!isElementary(event)) throw Error("only code changes can be recorded directly");
    if (ctx.branch) {
        // Validate against the branch's own state; the mainline codebase and
        // checkout stay as they are.
        Codebase state = branchCodebase(*ctx.branch);
        state.applyInPlace(event);
        TagMap tags = baseTags(ctx);
        tags[TagKey::BranchLabel] = {*ctx.branch};
        std::optional<EntryId> parent;
        auto it = log_.branchHeads().find(*ctx.branch);
        if (it != log_.branchHeads().end()) parent = it->second;
        return log_.append(event, std::move(tags), parent);
    }
    return appendApplied(event, baseTags(ctx));
}

EntryId Workspace::startSession(const RecordContext& ctx) {
    std::size_t count = 0;
    for (const auto& entry : log_.entries()) {
        if (std::holds_alternative<SessionStart>(entry.event)) ++count;
    }
    return appendApplied(SessionStart{"s" + std::to_string(count + 1)}, baseTags(ctx));
}

EntryId Workspace::saveSession(const RecordContext& ctx, std::optional<std::string> label) {
    return appendApplied(SessionSave{std::move(label)}, baseTags(ctx));
}

EntryId Workspace::endSession(const RecordContext& ctx) {
    return appendApplied(SessionEnd{}, baseTags(ctx));
}

EntryId Workspace::evaluate(const std::string& source, const RecordContext& ctx) {
    return appendApplied(ExpressionEvaluation{source}, baseTags(ctx));
}

// ---------------------------------------------------------------------------
// Undo / redo
// ---------------------------------------------------------------------------

std::vector<Event> Workspace::cascadeInverses(const Entry& target) const {
    std::vector<Event> inverses;
    if (const auto* classAdd = std::get_if<ClassAdded>(&target.event)) {
        for (const auto& method : codebase_.methodsOfClass(classAdd->def.name)) {
            inverses.push_back(MethodRemoved{method});
        }
    } else if (const auto* packageAdd = std::get_if<PackageAdded>(&target.event)) {
        for (const auto& cls : codebase_.classesInPackage(packageAdd->def.name)) {
            for (const auto& method : codebase_.methodsOfClass(cls.name)) {
                inverses.push_back(MethodRemoved{method});
            }
            inverses.push_back(ClassRemoved{cls});
        }
    }
    inverses.push_back(invert(target.event));
    return inverses;
}

std::vector<EntryId> Workspace::undo(const EntryId& target, const RecordContext& ctx) {
    if (ctx.branch) throw Error("undo works on the mainline only");
    const Entry& entry = log_.at(target);
    if (!isElementary(entry.event)) {
        throw NotUndoableError("only code changes can be undone, not " + target.str());
    }
    if (entry.tags.count(TagKey::BranchLabel)) {
        throw NotUndoableError(target.str() + " lives on a branch");
    }

    std::vector<Event> inverses = cascadeInverses(entry);
    Codebase probe = codebase_;
    try {
        for (const auto& inverse : inverses) probe.applyInPlace(inverse);
    } catch (const ConflictError& e) {
        throw NotUndoableError("cannot undo " + target.str() + ": " + e.what());
    }

    std::vector<EntryId> appended;
    appended.push_back(appendApplied(Undo{target}, baseTags(ctx)));
    for (const auto& inverse : inverses) {
        TagMap tags = baseTags(ctx);
        tags[TagKey::TriggeredBy] = {appended.front()};
        appended.push_back(appendApplied(inverse, std::move(tags)));
    }
    return appended;
}

std::vector<EntryId> Workspace::redo(std::optional<EntryId> target, const RecordContext& ctx) {
    if (ctx.branch) throw Error("redo works on the mainline only");
    if (!target) {
        // The newest undo whose target has not been redone since.
        std::set<EntryId> alreadyRedone;
        const auto& entries = log_.entries();
        for (std::size_t i = entries.size(); i-- > 0;) {
            if (const auto* redone = std::get_if<Redo>(&entries[i].event)) {
                alreadyRedone.insert(redone->target);
            } else if (const auto* undone = std::get_if<Undo>(&entries[i].event)) {
                if (!alreadyRedone.count(undone->target)) {
                    target = undone->target;
                    break;
                }
            }
        }
        if (!target) throw NotUndoableError("nothing to redo");
    }
    // Copy the event out: appending invalidates references into the log.
    Event original = log_.at(*target).event;
    if (!isElementary(original)) {
        throw NotUndoableError("only code changes can be redone, not " + target->str());
    }
    try {
        applied(codebase_, original);
    } catch (const ConflictError& e) {
        throw NotUndoableError("cannot redo " + target->str() + ": " + e.what());
    }

    EntryId wrapper = appendApplied(Redo{*target}, baseTags(ctx));
    TagMap tags = baseTags(ctx);
    tags[TagKey::TriggeredBy] = {wrapper};
    tags[TagKey::RedoneFrom] = {*target};
    EntryId copy = appendApplied(original, std::move(tags));
    return {wrapper, copy};
}

// ---------------------------------------------------------------------------
// Condense
// ---------------------------------------------------------------------------

std::vector<EntryId> Workspace::condense(const CodeUnitRef& unit, const RecordContext& ctx) {
    if (ctx.branch) throw Error("condense works on the mainline only");
    std::vector<EntryId> history = unitView(unit).effectiveHistory();

    // An add whose subject is later removed contributes nothing any more;
    // neither do the modifications in between. Track open adds per subject,
    // following renames, and mark the whole chain dead when it closes.
    std::map<CodeUnitRef, std::vector<std::size_t>> openAdds;
    std::set<std::size_t> dead;
    for (std::size_t i = 0; i < history.size(); ++i) {
        const Event& event = log_.at(history[i]).event;
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, PackageAdded> || std::is_same_v<T, ClassAdded> ||
                              std::is_same_v<T, MethodAdded>) {
                    openAdds[e.def.ref()] = {i};
                } else if constexpr (std::is_same_v<T, ClassModified> ||
                                     std::is_same_v<T, MethodModified>) {
                    auto it = openAdds.find(e.before.ref());
                    if (it != openAdds.end()) {
                        auto chain = std::move(it->second);
                        openAdds.erase(it);
                        chain.push_back(i);
                        openAdds[e.after.ref()] = std::move(chain);
                    }
                } else if constexpr (std::is_same_v<T, PackageRemoved> ||
                                     std::is_same_v<T, ClassRemoved> ||
                                     std::is_same_v<T, MethodRemoved>) {
                    auto it = openAdds.find(e.def.ref());
                    if (it != openAdds.end()) {
                        dead.insert(it->second.begin(), it->second.end());
                        dead.insert(i);
                        openAdds.erase(it);
                    }
                }
            },
            event);
    }
    if (dead.empty()) return {};

    std::size_t oldest = *dead.begin();
    std::vector<EntryId> suffix(history.begin() + static_cast<std::ptrdiff_t>(oldest),
                                history.end());
    std::vector<EntryId> survivors;
    for (std::size_t i = oldest; i < history.size(); ++i) {
        if (!dead.count(i)) survivors.push_back(history[i]);
    }

    // Unwinding the exact suffix and replaying the survivors must land on
    // the state we started from; probe it before writing anything.
    Codebase probe = codebase_;
    for (auto it = suffix.rbegin(); it != suffix.rend(); ++it) {
        probe.applyInPlace(invert(log_.at(*it).event));
    }
    for (const auto& survivor : survivors) {
        probe.applyInPlace(log_.at(survivor).event);
    }
    if (probe != codebase_) throw Error("condense would change the code; refusing");

    std::vector<EntryId> appended;
    EntryId condenseId = appendApplied(Condense{unit}, baseTags(ctx));
    appended.push_back(condenseId);
    for (auto it = suffix.rbegin(); it != suffix.rend(); ++it) {
        TagMap undoTags = baseTags(ctx);
        undoTags[TagKey::TriggeredBy] = {condenseId};
        EntryId undoId = appendApplied(Undo{*it}, std::move(undoTags));
        appended.push_back(undoId);
        TagMap inverseTags = baseTags(ctx);
        inverseTags[TagKey::TriggeredBy] = {undoId};
        appended.push_back(appendApplied(invert(log_.at(*it).event), std::move(inverseTags)));
    }
    for (const auto& survivor : survivors) {
        TagMap redoTags = baseTags(ctx);
        redoTags[TagKey::TriggeredBy] = {condenseId};
        EntryId redoId = appendApplied(Redo{survivor}, std::move(redoTags));
        appended.push_back(redoId);
        TagMap copyTags = baseTags(ctx);
        copyTags[TagKey::TriggeredBy] = {redoId};
        copyTags[TagKey::RedoneFrom] = {survivor};
        appended.push_back(appendApplied(log_.at(survivor).event, std::move(copyTags)));
    }
    return appended;
}

// ---------------------------------------------------------------------------
// Split
// ---------------------------------------------------------------------------

std::vector<EntryId> Workspace::split(const std::vector<EntryId>& targets,
                                      const std::string& branchLabel, const RecordContext& ctx) {
    if (ctx.branch) throw Error("split works on the mainline only");
    if (targets.empty()) throw Error("split needs at least one entry");
    if (!fileSafeLabel(branchLabel)) throw Error("bad branch label '" + branchLabel + "'");
    if (log_.branchHeads().count(branchLabel)) {
        throw Error("branch '" + branchLabel + "' already exists");
    }

    std::string packageName;
    for (const auto& target : targets) {
        const Entry& entry = log_.at(target);
        if (!isElementary(entry.event)) {
            throw Error("split target must be a code change, not " + target.str());
        }
        std::string pkg = packageOf(entry.event);
        if (packageName.empty()) packageName = pkg;
        if (pkg != packageName) throw Error("split targets span more than one package");
    }
    CodeUnitRef unit = CodeUnitRef::package(packageName);
    std::vector<EntryId> history = unitView(unit).effectiveHistory();
    std::map<EntryId, std::size_t> position;
    for (std::size_t i = 0; i < history.size(); ++i) position[history[i]] = i;

    std::set<std::size_t> targetIndices;
    for (const auto& target : targets) {
        auto it = position.find(target);
        if (it == position.end()) {
            throw Error(target.str() + " is not part of the current history of " + packageName);
        }
        targetIndices.insert(it->second);
    }
    std::size_t oldest = *targetIndices.begin();
    if (oldest == 0) throw Error("cannot split away the oldest event of " + packageName);

    // The branch forks from the last committed point before the targets.
    EntryId anchor = history.front();
    for (std::size_t i = oldest; i-- > 0;) {
        if (log_.at(history[i]).tags.count(TagKey::CommitLabel)) {
            anchor = history[i];
            break;
        }
    }

    std::vector<EntryId> suffix(history.begin() + static_cast<std::ptrdiff_t>(oldest),
                                history.end());
    std::vector<EntryId> branchIds;
    std::vector<EntryId> survivors;
    for (std::size_t i = oldest; i < history.size(); ++i) {
        (targetIndices.count(i) ? branchIds : survivors).push_back(history[i]);
    }

    // Probe both futures before writing: the branch must replay on top of
    // the anchor state, the survivors on the unwound mainline.
    {
        std::vector<const Entry*> chain;
        for (std::optional<EntryId> cursor = anchor; cursor;) {
            const Entry& entry = log_.at(*cursor);
            chain.push_back(&entry);
            cursor = entry.parent;
        }
        std::reverse(chain.begin(), chain.end());
        Codebase branchProbe;
        for (const Entry* entry : chain) {
            if (isElementary(entry->event) && !entry->tags.count(TagKey::BranchLabel)) {
                branchProbe.applyInPlace(entry->event);
            }
        }
        try {
            for (const auto& id : branchIds) branchProbe.applyInPlace(log_.at(id).event);
        } catch (const ConflictError& e) {
            throw Error("cannot split: the chosen events do not stand alone at the branch "
                        "point: " +
                        std::string(e.what()));
        }
    }
    {
        Codebase mainProbe = codebase_;
        for (auto it = suffix.rbegin(); it != suffix.rend(); ++it) {
            mainProbe.applyInPlace(invert(log_.at(*it).event));
        }
        try {
            for (const auto& id : survivors) mainProbe.applyInPlace(log_.at(id).event);
        } catch (const ConflictError& e) {
            throw Error("cannot split: the remaining history would depend on a moved event: " +
                        std::string(e.what()));
        }
    }

    std::vector<EntryId> appended;
    EntryId splitId = appendApplied(Split{branchIds, branchLabel}, baseTags(ctx));
    appended.push_back(splitId);

    for (auto it = suffix.rbegin(); it != suffix.rend(); ++it) {
        TagMap undoTags = baseTags(ctx);
        undoTags[TagKey::TriggeredBy] = {splitId};
        EntryId undoId = appendApplied(Undo{*it}, std::move(undoTags));
        appended.push_back(undoId);
        TagMap inverseTags = baseTags(ctx);
        inverseTags[TagKey::TriggeredBy] = {undoId};
        appended.push_back(appendApplied(invert(log_.at(*it).event), std::move(inverseTags)));
    }

    EntryId previous = anchor;
    for (const auto& id : branchIds) {
        TagMap tags = baseTags(ctx);
        tags[TagKey::RedoneFrom] = {id};
        tags[TagKey::BranchLabel] = {branchLabel};
        // Branch copies hang off the anchor chain and stay off the mainline
        // state, so they bypass appendApplied.
        previous = log_.append(log_.at(id).event, std::move(tags), previous);
        appended.push_back(previous);
    }

    for (const auto& id : survivors) {
        TagMap redoTags = baseTags(ctx);
        redoTags[TagKey::TriggeredBy] = {splitId};
        EntryId redoId = appendApplied(Redo{id}, std::move(redoTags));
        appended.push_back(redoId);
        TagMap copyTags = baseTags(ctx);
        copyTags[TagKey::TriggeredBy] = {redoId};
        copyTags[TagKey::RedoneFrom] = {id};
        appended.push_back(appendApplied(log_.at(id).event, std::move(copyTags)));
    }
    return appended;
}

// ---------------------------------------------------------------------------
// Refactorings
// ---------------------------------------------------------------------------

std::vector<EntryId> Workspace::renameMethod(const CodeUnitRef& method,
                                             const std::string& newSelector,
                                             const RecordContext& ctx,
                                             std::optional<EntryId> redoneFrom) {
    if (ctx.branch) throw Error("refactorings work on the mainline only");
    if (method.kind != UnitKind::Method) throw Error("rename-method needs a method");
    if (!isIdentifier(newSelector)) throw ParseError("bad selector '" + newSelector + "'");
    const MethodDef* current = codebase_.findMethod(MethodKey::of(method));
    if (!current) throw ConflictError(ConflictError::Kind::Missing, formatUnitRef(method));
    MethodKey newKey{method.className, method.classSide, newSelector};
    if (codebase_.hasMethod(newKey)) {
        throw ConflictError(ConflictError::Kind::AlreadyExists,
                            formatUnitRef(CodeUnitRef::method(method.packageName, method.className,
                                                              newSelector, method.classSide)));
    }

    MethodDef old = *current;
    MethodDef renamed = old;
    renamed.selector = newSelector;
    renamed.source = replaceToken(old.source, old.selector, newSelector);
    std::vector<MethodDef> senders = codebase_.sendersOf(old.selector);

    TagMap intentTags = baseTags(ctx);
    if (redoneFrom) intentTags[TagKey::RedoneFrom] = {*redoneFrom};
    EntryId intent = appendApplied(RenameMethod{method, newSelector}, std::move(intentTags));
    std::vector<EntryId> appended{intent};
    auto childTags = [&] {
        TagMap tags = baseTags(ctx);
        tags[TagKey::RefactoringOf] = {intent};
        return tags;
    };
    appended.push_back(appendApplied(MethodAdded{renamed}, childTags()));
    for (const auto& sender : senders) {
        MethodDef rewritten = sender;
        rewritten.source = replaceToken(sender.source, old.selector, newSelector);
        appended.push_back(appendApplied(MethodModified{sender, rewritten}, childTags()));
    }
    appended.push_back(appendApplied(MethodRemoved{old}, childTags()));
    return appended;
}

std::vector<EntryId> Workspace::renameClass(const CodeUnitRef& cls, const std::string& newName,
                                            const RecordContext& ctx,
                                            std::optional<EntryId> redoneFrom) {
    if (ctx.branch) throw Error("refactorings work on the mainline only");
    if (cls.kind != UnitKind::Class) throw Error("rename-class needs a class");
    if (!isIdentifier(newName)) throw ParseError("bad class name '" + newName + "'");
    const ClassDef* current = codebase_.findClass(cls.className);
    if (!current || current->packageName != cls.packageName) {
        throw ConflictError(ConflictError::Kind::Missing, formatUnitRef(cls));
    }
    if (codebase_.hasClass(newName)) {
        throw ConflictError(ConflictError::Kind::AlreadyExists,
                            formatUnitRef(CodeUnitRef::cls(cls.packageName, newName)));
    }

    ClassDef old = *current;
    ClassDef renamed = old;
    renamed.name = newName;

    TagMap intentTags = baseTags(ctx);
    if (redoneFrom) intentTags[TagKey::RedoneFrom] = {*redoneFrom};
    EntryId intent = appendApplied(RenameClass{cls, newName}, std::move(intentTags));
    std::vector<EntryId> appended{intent};
    auto childTags = [&] {
        TagMap tags = baseTags(ctx);
        tags[TagKey::RefactoringOf] = {intent};
        return tags;
    };
    appended.push_back(appendApplied(ClassModified{old, renamed}, childTags()));
    // With the class moved, patch every method source that still names it.
    for (const auto& referrer : codebase_.referencesToClass(old.name)) {
        MethodDef rewritten = referrer;
        rewritten.source = replaceToken(referrer.source, old.name, newName);
        appended.push_back(appendApplied(MethodModified{referrer, rewritten}, childTags()));
    }
    return appended;
}

// ---------------------------------------------------------------------------
// Versions
// ---------------------------------------------------------------------------

EntryId Workspace::saveVersion(const std::string& packageName, const std::string& label,
                               const RecordContext& ctx) {
    if (ctx.branch) throw Error("versions work on the mainline only");
    if (!codebase_.hasPackage(packageName)) {
        throw ConflictError(ConflictError::Kind::Missing, packageName);
    }
    if (!fileSafeLabel(label)) throw Error("bad version label '" + label + "'");
    fs::path file = dir_ / (packageName + "-" + label + ".version");
    if (fs::exists(file)) throw Error("version already saved: " + file.filename().string());

    writeVersionArchive(makeVersionArchive(codebase_, packageName, label), file);
    EntryId id = appendApplied(SaveVersion{packageName, label}, baseTags(ctx));
    auto history = unitView(CodeUnitRef::package(packageName)).effectiveHistory();
    if (!history.empty()) {
        log_.attachTag(history.back(),
                       Tag::text(TagKey::CommitLabel, packageName + " version " + label));
    }
    return id;
}

std::vector<EntryId> Workspace::loadVersion(const std::string& packageName,
                                            const std::string& label, const RecordContext& ctx,
                                            std::optional<EntryId> triggeredBy) {
    if (ctx.branch) throw Error("versions work on the mainline only");
    if (codebase_.hasPackage(packageName)) {
        throw ConflictError(ConflictError::Kind::AlreadyExists, packageName,
                            "remove it before loading a version");
    }
    VersionArchive archive = readVersionArchive(dir_ / (packageName + "-" + label + ".version"));
    if (archive.packageName != packageName || archive.label != label) {
        throw ParseError("version archive does not match " + packageName + " " + label);
    }
    std::vector<Event> events = versionEvents(archive);
    Codebase probe = codebase_;
    for (const auto& event : events) probe.applyInPlace(event);

    TagMap loadTags = baseTags(ctx);
    if (triggeredBy) loadTags[TagKey::TriggeredBy] = {*triggeredBy};
    EntryId loadId = appendApplied(LoadVersion{packageName, label}, std::move(loadTags));
    std::vector<EntryId> appended{loadId};
    for (const auto& event : events) {
        TagMap tags = baseTags(ctx);
        tags[TagKey::TriggeredBy] = {loadId};
        appended.push_back(appendApplied(event, std::move(tags)));
    }
    log_.attachTag(appended.back(),
                   Tag::text(TagKey::CommitLabel, packageName + " version " + label));
    return appended;
}

void Workspace::comment(const EntryId& target, const std::string& text) {
    log_.attachTag(target, Tag::text(TagKey::Comment, text));
}

// ---------------------------------------------------------------------------
// Crossing log boundaries
// ---------------------------------------------------------------------------

ReplayResult Workspace::replayEntries(const std::vector<const Entry*>& sources,
                                      std::optional<EntryId> wrapperTarget,
                                      const RecordContext& ctx) {
    ReplayResult result;
    Codebase probe = codebase_;
    std::vector<const Entry*> kept;
    for (const Entry* source : sources) {
        if (!isElementary(source->event)) continue;
        if (source->tags.count(TagKey::BranchLabel)) continue;
        try {
            probe.applyInPlace(source->event);
            kept.push_back(source);
        } catch (const ConflictError& e) {
            result.skipped.push_back({source->id, e.what()});
        }
    }
    if (kept.empty()) return result; // nothing to replay, nothing appended

    std::optional<EntryId> wrapper;
    if (wrapperTarget) {
        wrapper = appendApplied(Redo{*wrapperTarget}, baseTags(ctx));
        result.appended.push_back(*wrapper);
    }
    for (const Entry* source : kept) {
        TagMap tags = baseTags(ctx);
        if (wrapper) tags[TagKey::TriggeredBy] = {*wrapper};
        tags[TagKey::RedoneFrom] = {source->id};
        result.appended.push_back(appendApplied(source->event, std::move(tags)));
    }
    return result;
}

ReplayResult Workspace::recoverSession(const fs::path& crashedLog,
                                       std::optional<EntryId> afterId,
                                       const RecordContext& ctx) {
    if (ctx.branch) throw Error("recovery works on the mainline only");
    Log crashed = Log::loadReadOnly(crashedLog);

    std::vector<const Entry*> tail;
    std::optional<EntryId> wrapperTarget;
    if (afterId) {
        crashed.at(*afterId); // must exist
        wrapperTarget = afterId;
        bool past = false;
        for (const auto& entry : crashed.entries()) {
            if (past) tail.push_back(&entry);
            if (entry.id == *afterId) past = true;
        }
    } else {
        tail = crashed.entriesAfterLastSave();
        if (!tail.empty() && tail.front()->id.sequence > 1) {
            wrapperTarget = EntryId{crashed.name(), tail.front()->id.sequence - 1};
        }
        if (!wrapperTarget) {
            throw Error("cannot tell where the crashed session began; pass the last safe entry");
        }
    }

    ReplayResult result = replayEntries(tail, wrapperTarget, ctx);
    result.sourceNote = crashed.truncationNote();
    return result;
}

void Workspace::exportLog(const fs::path& outFile) const {
    std::ofstream out(outFile, std::ios::binary | std::ios::trunc);
    if (!out) throw LogError("cannot write " + outFile.string());
    out << "omlog-export 1\n";
    for (const auto& entry : log_.entries()) {
        out << entryToRecord(entry).dump() << "\n";
    }
    if (!out) throw LogError("short write to " + outFile.string());
}

std::vector<Entry> Workspace::readExportFile(const fs::path& inFile) {
    std::ifstream in(inFile, std::ios::binary);
    if (!in) throw LogError("cannot read " + inFile.string());
    std::string line;
    if (!std::getline(in, line) || line != "omlog-export 1") {
        throw ParseError(inFile.string() + " is not an exported log");
    }
    std::vector<Entry> entries;
    std::map<EntryId, std::size_t> index;
    std::size_t lineNo = 1;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
            std::string type = record.at("recordType").get<std::string>();
            if (type == "entry") {
                Entry entry = entryFromRecord(record);
                index[entry.id] = entries.size();
                entries.push_back(std::move(entry));
            } else if (type == "tag") {
                EntryId target = EntryId::parse(record.at("target").get<std::string>());
                TagKey key = parseTagKey(record.at("key").get<std::string>());
                std::string value = record.at("value").get<std::string>();
                auto it = index.find(target);
                if (it != index.end()) {
                    mergeTag(entries[it->second].tags,
                             tagKeyHoldsEntryId(key) ? Tag::entry(key, EntryId::parse(value))
                                                     : Tag::text(key, value));
                }
            } else {
                throw ParseError("unknown record type '" + type + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(inFile.string() + " line " + std::to_string(lineNo) + ": " +
                             e.what());
        }
    }
    return entries;
}

ReplayResult Workspace::importLog(const fs::path& inFile, const RecordContext& ctx) {
    if (ctx.branch) throw Error("import works on the mainline only");
    std::vector<Entry> entries = readExportFile(inFile);
    if (!entries.empty() && entries.front().id.logName == log_.name()) {
        throw Error("import source uses this log's own name '" + log_.name() + "'");
    }
    std::vector<const Entry*> sources;
    sources.reserve(entries.size());
    for (const auto& entry : entries) sources.push_back(&entry);
    return replayEntries(sources, std::nullopt, ctx);
}

ReplayResult Workspace::replayRefactorings(const fs::path& inFile, const RecordContext& ctx) {
    if (ctx.branch) throw Error("refactorings work on the mainline only");
    std::vector<Entry> entries = readExportFile(inFile);
    ReplayResult result;
    for (const auto& entry : entries) {
        try {
            if (const auto* rename = std::get_if<RenameMethod>(&entry.event)) {
                auto ids = renameMethod(rename->oldRef, rename->newSelector, ctx, entry.id);
                result.appended.insert(result.appended.end(), ids.begin(), ids.end());
            } else if (const auto* rename = std::get_if<RenameClass>(&entry.event)) {
                auto ids = renameClass(rename->oldRef, rename->newName, ctx, entry.id);
                result.appended.insert(result.appended.end(), ids.begin(), ids.end());
            }
        } catch (const Error& e) {
            result.skipped.push_back({entry.id, e.what()});
        }
    }
    return result;
}

} // namespace omlog
