#include "omlog/views.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "omlog/errors.hpp"

namespace omlog {

namespace {

std::string shortRefName(const CodeUnitRef& ref) {
    switch (ref.kind) {
    case UnitKind::Package: return "package " + ref.packageName;
    case UnitKind::Class: return ref.className;
    case UnitKind::Method:
        return ref.className + (ref.classSide ? " class>>" : ">>") + ref.selector;
    }
    return {};
}

std::set<CodeUnitRef> subjectSet(const Event& event) {
    auto subjects = subjectRefs(event);
    return {subjects.begin(), subjects.end()};
}

bool isAddOf(const Event& event, const CodeUnitRef& unit) {
    if (const auto* p = std::get_if<PackageAdded>(&event)) return p->def.ref() == unit;
    if (const auto* c = std::get_if<ClassAdded>(&event)) return c->def.ref() == unit;
    if (const auto* m = std::get_if<MethodAdded>(&event)) return m->def.ref() == unit;
    return false;
}

bool isRemoveOf(const Event& event, const CodeUnitRef& unit) {
    if (const auto* p = std::get_if<PackageRemoved>(&event)) return p->def.ref() == unit;
    if (const auto* c = std::get_if<ClassRemoved>(&event)) return c->def.ref() == unit;
    if (const auto* m = std::get_if<MethodRemoved>(&event)) return m->def.ref() == unit;
    return false;
}

// Groups consecutive entries whose redoneFrom tags point into another log:
// the copies written by one recovery or import. Each such run is later shown
// with one auxiliary branch of the foreign originals.
struct ForeignRuns {
    std::map<std::size_t, std::size_t> runOfEntry; // entry index -> run id
    std::map<std::size_t, std::vector<EntryId>> targetsOfRun;
};

ForeignRuns scanForeignRuns(const Log& log) {
    ForeignRuns runs;
    std::size_t runCounter = 0;
    bool previousQualified = false;
    std::string previousForeign;
    const auto& entries = log.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const Entry& entry = entries[i];
        std::vector<EntryId> foreignIds;
        if (auto it = entry.tags.find(TagKey::RedoneFrom); it != entry.tags.end()) {
            for (const auto& value : it->second) {
                if (const auto* id = std::get_if<EntryId>(&value)) {
                    if (id->logName != log.name()) foreignIds.push_back(*id);
                }
            }
        }
        bool qualified = !foreignIds.empty() && !entry.tags.count(TagKey::BranchLabel);
        if (qualified) {
            if (!previousQualified || previousForeign != foreignIds.front().logName) {
                ++runCounter;
            }
            runs.runOfEntry[i] = runCounter;
            auto& targets = runs.targetsOfRun[runCounter];
            targets.insert(targets.end(), foreignIds.begin(), foreignIds.end());
            previousForeign = foreignIds.front().logName;
        }
        previousQualified = qualified;
    }
    return runs;
}

class ViewBuilder {
public:
    ViewBuilder(const Log& log, CodeUnitRef unit, const LogResolver& resolve,
                const Log* overlay)
        : log_(log), resolve_(resolve), overlay_(overlay) {
        view_.unit = std::move(unit);
    }

    View build() {
        ForeignRuns runs = scanForeignRuns(log_);
        std::set<std::size_t> runsDone;
        const auto& entries = log_.entries();
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const Entry& entry = entries[i];
            if (!isElementary(entry.event)) continue;
            if (!affects(entry.event, view_.unit)) continue;

            if (auto runIt = runs.runOfEntry.find(i); runIt != runs.runOfEntry.end()) {
                if (runsDone.insert(runIt->second).second) {
                    materializeForeignBranch(runs.targetsOfRun.at(runIt->second));
                }
            }

            if (auto branch = firstTextValue(entry.tags, TagKey::BranchLabel)) {
                attachBranchNode(entry, *branch);
                continue;
            }
            if (auto trigger = firstEntryValue(entry.tags, TagKey::TriggeredBy)) {
                const Entry* triggerEntry = log_.find(*trigger);
                if (triggerEntry && std::holds_alternative<Undo>(triggerEntry->event)) {
                    handleUndoChild(entry, *triggerEntry);
                    continue;
                }
            }
            attachLiteral(entry);
        }
        if (overlay_) attachOverlay();
        view_.head = tip_;
        return std::move(view_);
    }

private:
    int addNode(std::string label, EntryId entryId, Event event, int parent) {
        ViewNode node;
        node.label = std::move(label);
        node.entryId = std::move(entryId);
        node.event = std::move(event);
        node.parent = parent;
        int index = static_cast<int>(view_.nodes.size());
        view_.nodes.push_back(std::move(node));
        if (parent >= 0) {
            view_.nodes[parent].children.push_back(index);
        } else {
            view_.roots.push_back(index);
        }
        return index;
    }

    void takeDisplayTags(ViewNode& node, const TagMap& tags) {
        node.commitLabel = firstTextValue(tags, TagKey::CommitLabel);
        if (auto it = tags.find(TagKey::Comment); it != tags.end()) {
            for (const auto& value : it->second) {
                if (const auto* text = std::get_if<std::string>(&value)) {
                    node.comments.push_back(*text);
                }
            }
        }
    }

    void noteAliveness(const Event& event) {
        if (isAddOf(event, view_.unit)) alive_ = true;
        if (isRemoveOf(event, view_.unit)) alive_ = false;
    }

    void attachLiteral(const Entry& entry) {
        bool newComponent = tip_ == -1 || (isAddOf(entry.event, view_.unit) && !alive_);
        int parent = -1;
        if (!newComponent) {
            parent = tip_;
            if (entry.parent) {
                auto it = nodeOf_.find(*entry.parent);
                if (it != nodeOf_.end() && it->second != tip_ &&
                    !view_.nodes[it->second].superseded &&
                    !view_.nodes[it->second].branchLabel) {
                    parent = it->second;
                }
            }
        }
        int index = addNode(elementaryLabel(entry.event), entry.id, entry.event, parent);
        ViewNode& node = view_.nodes[index];
        node.redone = entry.tags.count(TagKey::RedoneFrom) > 0;
        node.refactoring = entry.tags.count(TagKey::RefactoringOf) > 0;
        takeDisplayTags(node, entry.tags);
        nodeOf_[entry.id] = index;
        tip_ = index;
        noteAliveness(entry.event);
    }

    void attachBranchNode(const Entry& entry, const std::string& branch) {
        int parent = tip_;
        if (entry.parent) {
            auto it = nodeOf_.find(*entry.parent);
            if (it != nodeOf_.end()) parent = it->second;
        }
        int index = addNode(elementaryLabel(entry.event), entry.id, entry.event, parent);
        ViewNode& node = view_.nodes[index];
        node.branchLabel = branch;
        node.redone = entry.tags.count(TagKey::RedoneFrom) > 0;
        node.refactoring = entry.tags.count(TagKey::RefactoringOf) > 0;
        takeDisplayTags(node, entry.tags);
        nodeOf_[entry.id] = index;
        // A side branch never moves the active tip.
    }

    std::vector<int> activePath() const {
        std::vector<int> path;
        for (int n = tip_; n != -1; n = view_.nodes[n].parent) path.push_back(n);
        std::reverse(path.begin(), path.end());
        return path;
    }

    void supersedeSubtree(int root) {
        view_.nodes[root].superseded = true;
        for (int child : view_.nodes[root].children) supersedeSubtree(child);
    }

    void recomputeAliveness() {
        alive_ = false;
        for (const auto& node : view_.nodes) {
            if (node.superseded || node.branchLabel) continue;
            if (isAddOf(node.event, view_.unit)) alive_ = true;
            if (isRemoveOf(node.event, view_.unit)) alive_ = false;
        }
    }

    // Later nodes about a cancelled subject must not be replayed after the
    // cancellation: the undo rolled that subject back, so their effects are
    // no longer in the codebase. When the subject ceased to exist outright
    // (its addition was cancelled), everything living inside it dies too.
    bool diesWith(const ViewNode& node, const std::set<CodeUnitRef>& deadSubjects,
                  bool subjectGone) const {
        for (const auto& subject : subjectSet(node.event)) {
            if (deadSubjects.count(subject)) return true;
            if (!subjectGone) continue;
            for (const auto& enclosing : enclosingChain(subject)) {
                if (deadSubjects.count(enclosing)) return true;
            }
        }
        return false;
    }

    // An undo cancelled the event behind `target`: grey out that node and
    // everything that followed it, then replay the surviving suffix of the
    // active path as synthetic {redone} nodes in its place. Nodes about the
    // cancelled subjects do not survive. Returns false without touching
    // anything when the target sits outside the visible active path (in an
    // older component of the forest, say).
    bool cancelNode(int target, const std::set<CodeUnitRef>& deadSubjects,
                    bool subjectGone) {
        std::vector<int> path = activePath();
        auto at = std::find(path.begin(), path.end(), target);
        if (at == path.end()) return false;
        std::vector<int> survivors(at + 1, path.end());
        int attachAt = view_.nodes[target].parent;
        supersedeSubtree(target);
        tip_ = attachAt;
        for (int survivor : survivors) {
            if (diesWith(view_.nodes[survivor], deadSubjects, subjectGone)) continue;
            std::string label = view_.nodes[survivor].label;
            EntryId source = view_.nodes[survivor].entryId;
            Event event = view_.nodes[survivor].event;
            bool refactoring = view_.nodes[survivor].refactoring;
            int index = addNode(std::move(label), source, std::move(event), tip_);
            ViewNode& node = view_.nodes[index];
            node.synthetic = true;
            node.redone = true;
            node.refactoring = refactoring;
            nodeOf_[node.entryId] = index;
            tip_ = index;
        }
        recomputeAliveness();
        return true;
    }

    void handleUndoChild(const Entry& inverseChild, const Entry& undoEntry) {
        // In the undone unit's own view the undo reads as the inverse change
        // itself (a method's history gains a "remove" node); only enclosing
        // views grey out the cancelled node and its successors.
        for (const auto& subject : subjectRefs(inverseChild.event)) {
            if (subject == view_.unit) {
                attachLiteral(inverseChild);
                return;
            }
        }
        auto subjects = subjectSet(inverseChild.event);
        bool childRemoves = std::holds_alternative<PackageRemoved>(inverseChild.event) ||
                            std::holds_alternative<ClassRemoved>(inverseChild.event) ||
                            std::holds_alternative<MethodRemoved>(inverseChild.event);
        if (childRemoves) {
            // The undo takes an addition back, directly or by cascade. Grey
            // out the newest visible node that added the subject: its whole
            // subtree — and any later touches of the subject — go with it.
            std::vector<int> path = activePath();
            for (auto it = path.rbegin(); it != path.rend(); ++it) {
                const Event& event = view_.nodes[*it].event;
                bool addsSubject = std::any_of(subjects.begin(), subjects.end(),
                                               [&](const CodeUnitRef& s) {
                                                   return isAddOf(event, s);
                                               });
                if (addsSubject) {
                    cancelNode(*it, subjects, /*subjectGone=*/true);
                    return;
                }
            }
            // No visible addition to cancel (the subject came back through an
            // earlier undo, so its add never stood as a node here): keep the
            // history faithful by showing the removal itself.
            attachLiteral(inverseChild);
            return;
        }
        // The undo re-applies an older definition: its target was a removal
        // or a modification. When that target is still a visible node, grey
        // it out; otherwise the re-application reads as a fresh step.
        const EntryId& target = std::get<Undo>(undoEntry.event).target;
        const Entry* targetEntry = log_.find(target);
        if (targetEntry && subjects == subjectSet(targetEntry->event)) {
            auto it = nodeOf_.find(target);
            if (it != nodeOf_.end() && !view_.nodes[it->second].superseded &&
                // The subject itself rolls back to the older definition, so
                // later touches of it die; units inside it live on.
                cancelNode(it->second, subjects, /*subjectGone=*/false)) {
                return;
            }
        }
        attachLiteral(inverseChild);
    }

    const Log* resolveForeign(const std::string& name) {
        if (name == log_.name()) return &log_;
        if (resolve_) return resolve_(name);
        auto cached = foreignCache_.find(name);
        if (cached != foreignCache_.end()) return &cached->second;
        try {
            auto file = log_.path().parent_path() / (name + ".omlog");
            auto [it, ok] = foreignCache_.emplace(name, Log::loadReadOnly(file));
            return &it->second;
        } catch (const Error&) {
            return nullptr;
        }
    }

    // Events copied out of another log (recovery, import) keep their origin:
    // show the foreign originals once, as a greyed-out branch forking off
    // just before the copies continue the mainline.
    void materializeForeignBranch(const std::vector<EntryId>& targets) {
        if (targets.empty()) return;
        const Log* foreign = resolveForeign(targets.front().logName);
        if (!foreign || foreign == &log_) return;
        int previous = -1;
        for (const auto& id : targets) {
            if (const Entry* foreignEntry = foreign->find(id)) {
                previous = attachForeignNode(*foreignEntry, previous);
            }
        }
    }

    int attachForeignNode(const Entry& foreignEntry, int previous) {
        if (!isElementary(foreignEntry.event)) return previous;
        if (!affects(foreignEntry.event, view_.unit)) return previous;
        int parent = previous == -1 ? tip_ : previous;
        int index = addNode(elementaryLabel(foreignEntry.event), foreignEntry.id,
                            foreignEntry.event, parent);
        view_.nodes[index].superseded = true;
        takeDisplayTags(view_.nodes[index], foreignEntry.tags);
        return index;
    }

    // Lays another log's unsaved tail over this view as a greyed-out branch
    // hanging off the current head, so lost work can be inspected in context
    // before deciding to recover it. The head itself does not move.
    void attachOverlay() {
        int previous = -1;
        for (const Entry* entry : overlay_->entriesAfterLastSave()) {
            if (entry->tags.count(TagKey::BranchLabel)) continue;
            previous = attachForeignNode(*entry, previous);
        }
    }

    const Log& log_;
    const LogResolver& resolve_;
    const Log* overlay_;
    View view_;
    int tip_ = -1;
    bool alive_ = false;
    std::map<EntryId, int> nodeOf_;
    std::map<std::string, Log> foreignCache_;
};

} // namespace

std::vector<EntryId> View::effectiveHistory() const {
    std::vector<EntryId> history;
    for (const auto& node : nodes) {
        if (node.superseded || node.branchLabel) continue;
        history.push_back(node.entryId);
    }
    return history;
}

View buildView(const Log& log, const CodeUnitRef& unit, const LogResolver& resolve) {
    return ViewBuilder(log, unit, resolve, nullptr).build();
}

View buildViewWithOverlay(const Log& log, const CodeUnitRef& unit, const Log& overlay,
                          const LogResolver& resolve) {
    return ViewBuilder(log, unit, resolve, &overlay).build();
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

struct RenderLine {
    int indent;
    std::string text;
};

class ViewRenderer {
public:
    explicit ViewRenderer(const View& view) : view_(view) {}

    std::string render() {
        std::vector<RenderLine> lines;
        for (int root : view_.roots) {
            emitBranch(root, 0, lines);
        }
        std::ostringstream out;
        for (const auto& line : lines) {
            out << std::string(static_cast<std::size_t>(line.indent), ' ') << line.text << "\n";
        }
        return out.str();
    }

private:
    std::string nodeText(int index) const {
        const ViewNode& node = view_.nodes[index];
        std::string text = node.parent == -1 ? "* " : "|- ";
        text += node.label;
        std::vector<std::string> tags;
        if (node.redone) tags.push_back("{redone}");
        if (node.refactoring) tags.push_back("{refactoring}");
        if (node.commitLabel) tags.push_back("{" + *node.commitLabel + "}");
        for (const auto& comment : node.comments) tags.push_back("{'" + comment + "'}");
        if (node.branchLabel && branchRoot(index)) {
            tags.push_back("{branch: " + *node.branchLabel + "}");
        }
        for (const auto& tag : tags) text += " " + tag;
        if (index == view_.head) text += "  <-- head";
        return text;
    }

    bool branchRoot(int index) const {
        int parent = view_.nodes[index].parent;
        return parent == -1 || view_.nodes[parent].branchLabel != view_.nodes[index].branchLabel;
    }

    int pickTrunk(int index, bool insideSuperseded) const {
        int trunk = -1;
        for (int child : view_.nodes[index].children) {
            // A node continues its own line (same branch, or both mainline);
            // anything else forks off to the side.
            if (view_.nodes[child].branchLabel != view_.nodes[index].branchLabel) continue;
            if (insideSuperseded || !view_.nodes[child].superseded) trunk = child;
        }
        return trunk;
    }

    // Emits the chain starting at `index`: the node, then its side branches
    // one level deeper, then the continuation at the same indent.
    void emitChain(int index, int indent, bool insideSuperseded,
                   std::vector<RenderLine>& out) {
        int current = index;
        while (current != -1) {
            out.push_back({indent, nodeText(current)});
            int trunk = pickTrunk(current, insideSuperseded);
            for (int child : view_.nodes[current].children) {
                if (child == trunk) continue;
                emitBranch(child, indent + 2, out);
            }
            current = trunk;
        }
    }

    // A branch renders two columns deeper; a cancelled branch additionally
    // gets wrapped in [ ... ] with its contents pushed over so they align.
    void emitBranch(int index, int indent, std::vector<RenderLine>& out) {
        bool bracket = view_.nodes[index].superseded;
        if (!bracket) {
            emitChain(index, indent, false, out);
            return;
        }
        std::vector<RenderLine> sub;
        emitChain(index, indent + 2, true, sub);
        sub.front().indent = indent;
        sub.front().text = "[ " + sub.front().text;
        sub.back().text += " ]";
        out.insert(out.end(), sub.begin(), sub.end());
    }

    const View& view_;
};

} // namespace

std::string renderView(const View& view) {
    return ViewRenderer(view).render();
}

// ---------------------------------------------------------------------------
// Labels and listings
// ---------------------------------------------------------------------------

std::string eventLabel(const Log& log, const Entry& entry) {
    if (isElementary(entry.event)) return elementaryLabel(entry.event);

    auto labelOf = [&](const EntryId& id) -> std::pair<std::string, bool> {
        // Returns the label plus whether the target is a system event.
        if (const Entry* target = log.find(id)) {
            return {eventLabel(log, *target), isSystem(target->event)};
        }
        if (id.logName != log.name()) {
            try {
                Log foreign = Log::loadReadOnly(log.path().parent_path() /
                                                (id.logName + ".omlog"));
                if (const Entry* target = foreign.find(id)) {
                    return {eventLabel(foreign, *target), isSystem(target->event)};
                }
            } catch (const Error&) {
            }
        }
        return {id.str(), false};
    };

    return std::visit(
        [&](const auto& e) -> std::string {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, RenameMethod>) {
                CodeUnitRef newRef = CodeUnitRef::method(e.oldRef.packageName, e.oldRef.className,
                                                         e.newSelector, e.oldRef.classSide);
                return "rename " + shortRefName(e.oldRef) + " to " + shortRefName(newRef);
            } else if constexpr (std::is_same_v<T, RenameClass>) {
                return "rename class " + e.oldRef.className + " to " + e.newName;
            } else if constexpr (std::is_same_v<T, SessionStart>) {
                return "new session";
            } else if constexpr (std::is_same_v<T, SessionSave>) {
                return "save session";
            } else if constexpr (std::is_same_v<T, SessionEnd>) {
                return "end session";
            } else if constexpr (std::is_same_v<T, ExpressionEvaluation>) {
                return "evaluate '" + e.source + "'";
            } else if constexpr (std::is_same_v<T, LoadVersion>) {
                return "load package " + e.packageName + " version " + e.versionLabel;
            } else if constexpr (std::is_same_v<T, SaveVersion>) {
                return "save " + e.packageName + " version " + e.versionLabel;
            } else if constexpr (std::is_same_v<T, Undo>) {
                return "undo (" + labelOf(e.target).first + ")";
            } else if constexpr (std::is_same_v<T, Redo>) {
                auto [label, system] = labelOf(e.target);
                return system ? "redo after (" + label + ")" : "redo (" + label + ")";
            } else if constexpr (std::is_same_v<T, Condense>) {
                return "condense " + shortRefName(e.unit);
            } else if constexpr (std::is_same_v<T, Split>) {
                std::string joined;
                for (const auto& target : e.targets) {
                    if (!joined.empty()) joined += ", ";
                    joined += labelOf(target).first;
                }
                return "split (" + joined + ")";
            } else {
                return std::string{};
            }
        },
        entry.event);
}

namespace {

int triggerDepth(const Log& log, const Entry& entry, std::map<EntryId, int>& memo) {
    auto it = memo.find(entry.id);
    if (it != memo.end()) return it->second;
    memo[entry.id] = 0; // breaks cycles defensively
    int depth = 0;
    std::optional<EntryId> via = firstEntryValue(entry.tags, TagKey::TriggeredBy);
    if (!via) via = firstEntryValue(entry.tags, TagKey::RefactoringOf);
    if (via && via->logName == log.name()) {
        if (const Entry* parent = log.find(*via)) {
            depth = triggerDepth(log, *parent, memo) + 1;
        }
    }
    memo[entry.id] = depth;
    return depth;
}

} // namespace

std::string renderListing(const Log& log, const std::vector<const Entry*>& entries) {
    std::ostringstream out;
    std::map<EntryId, int> depths;
    for (const Entry* entry : entries) {
        int depth = triggerDepth(log, *entry, depths);
        out << entry->id.str() << "  " << std::string(static_cast<std::size_t>(depth) * 2, ' ')
            << eventLabel(log, *entry);
        if (entry->tags.count(TagKey::RedoneFrom)) out << " {redone}";
        if (auto label = firstTextValue(entry->tags, TagKey::CommitLabel)) {
            out << " {" << *label << "}";
        }
        if (auto it = entry->tags.find(TagKey::Comment); it != entry->tags.end()) {
            for (const auto& value : it->second) {
                if (const auto* text = std::get_if<std::string>(&value)) {
                    out << " {'" << *text << "'}";
                }
            }
        }
        if (auto branch = firstTextValue(entry->tags, TagKey::BranchLabel)) {
            out << " {branch: " << *branch << "}";
        }
        out << "\n";
    }
    return out.str();
}

} // namespace omlog
