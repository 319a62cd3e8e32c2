#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "omlog/log.hpp"

namespace omlog {

// One box in a per-unit history tree. A literal node stands for an entry of
// the log; a synthetic node is a re-linearised stand-in created when an undo
// cancels an older event and the survivors after it are replayed in place.
// Either way `entryId` names the entry whose event the node represents.
struct ViewNode {
    std::string label;
    EntryId entryId;
    Event event;
    bool synthetic = false;
    bool redone = false;      // shows {redone}
    bool refactoring = false; // shows {refactoring}
    bool superseded = false;  // cancelled history, rendered in brackets
    std::optional<std::string> branchLabel;
    std::optional<std::string> commitLabel;
    std::vector<std::string> comments;
    int parent = -1; // index into View::nodes, -1 for component roots
    std::vector<int> children;
};

// The history of one code unit: a forest (a unit removed and added again
// starts a fresh component), with at most one active tip carrying the head
// marker. Session boundaries do not show up here.
struct View {
    CodeUnitRef unit;
    std::vector<ViewNode> nodes; // creation order
    std::vector<int> roots;
    int head = -1;

    // Entry ids whose events, applied in this order, rebuild the unit's
    // current state: every non-superseded mainline node, oldest first.
    std::vector<EntryId> effectiveHistory() const;
};

// Looks up another log by name so a view can show where imported or
// recovered events came from. Returning nullptr skips that detour.
using LogResolver = std::function<const Log*(const std::string& logName)>;

// Builds the history tree of `unit` from the log. Without a resolver,
// sibling logs are searched next to the log file (<name>.omlog).
View buildView(const Log& log, const CodeUnitRef& unit, const LogResolver& resolve = {});

// Same, but additionally hangs `overlay`'s unsaved tail (everything after its
// last save) off the head as a greyed-out branch — a way to inspect another
// session's lost work in context before recovering it. The head stays put.
View buildViewWithOverlay(const Log& log, const CodeUnitRef& unit, const Log& overlay,
                          const LogResolver& resolve = {});

// Text form of a view, one node per line. Component roots start with "* ",
// later nodes with "|- "; the active continuation stays at the same column
// while branches indent, and cancelled branches are wrapped in [ ... ].
std::string renderView(const View& view);

// Human label for an entry: "add A>>m", "undo (add A>>m)", "new session"...
std::string eventLabel(const Log& log, const Entry& entry);

// Flat listing of entries, one per line: the id, the label indented by how
// deeply the entry was triggered, and the displayable tags.
std::string renderListing(const Log& log, const std::vector<const Entry*>& entries);

} // namespace omlog
