#pragma once

#include "omlog/errors.hpp"

#include "json.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace omlog {

// ---------------------------------------------------------------------------
// Entry identity
//
// Sequence numbers are assigned by the log module; redoneFrom and friends may
// reference entries of other (loaded) logs, so the log name is part of the id.
// ---------------------------------------------------------------------------

struct EntryId {
    std::string logName;
    std::uint64_t sequence = 0;

    auto operator<=>(const EntryId&) const = default;

    std::string str() const; // "name:17"
    static EntryId parse(const std::string& text);
};

// ---------------------------------------------------------------------------
// Code units
// ---------------------------------------------------------------------------

enum class UnitKind { Package, Class, Method };

struct CodeUnitRef {
    UnitKind kind = UnitKind::Package;
    std::string packageName;
    std::string className; // class and method refs
    bool classSide = false; // method refs only
    std::string selector;   // method refs only

    auto operator<=>(const CodeUnitRef&) const = default;

    static CodeUnitRef package(std::string name);
    static CodeUnitRef cls(std::string packageName, std::string name);
    static CodeUnitRef method(std::string packageName, std::string className,
                              std::string selector, bool classSide = false);
};

// Canonical text forms: `P`, `P/A`, `P/A>>m`, `P/A class>>m`.
std::string formatUnitRef(const CodeUnitRef& ref);
CodeUnitRef parseUnitRef(const std::string& text);

// Subject first, then every enclosing unit: method -> {method, class, package}.
std::vector<CodeUnitRef> enclosingChain(const CodeUnitRef& ref);

bool isIdentifier(const std::string& text);

// ---------------------------------------------------------------------------
// Definitions: self-contained snapshots, enough to recreate the unit.
// ---------------------------------------------------------------------------

struct PackageDef {
    std::string name;
    auto operator<=>(const PackageDef&) const = default;
    CodeUnitRef ref() const { return CodeUnitRef::package(name); }
};

struct ClassDef {
    std::string name;
    std::string packageName;
    std::string superclassName;
    std::vector<std::string> instanceVariables;
    std::string comment;
    auto operator<=>(const ClassDef&) const = default;
    CodeUnitRef ref() const { return CodeUnitRef::cls(packageName, name); }
};

struct MethodDef {
    CodeUnitRef classRef; // kind == Class
    bool classSide = false;
    std::string selector;
    std::string protocol;
    std::string source; // opaque text; tokenized only for sender search
    auto operator<=>(const MethodDef&) const = default;
    CodeUnitRef ref() const {
        return CodeUnitRef::method(classRef.packageName, classRef.className, selector, classSide);
    }
};

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

// Elementary code changes: the only events that mutate a codebase.
struct PackageAdded   { PackageDef def;               auto operator<=>(const PackageAdded&) const = default; };
struct PackageRemoved { PackageDef def;               auto operator<=>(const PackageRemoved&) const = default; };
struct ClassAdded     { ClassDef def;                 auto operator<=>(const ClassAdded&) const = default; };
struct ClassRemoved   { ClassDef def;                 auto operator<=>(const ClassRemoved&) const = default; };
struct ClassModified  { ClassDef before; ClassDef after;   auto operator<=>(const ClassModified&) const = default; };
struct MethodAdded    { MethodDef def;                auto operator<=>(const MethodAdded&) const = default; };
struct MethodRemoved  { MethodDef def;                auto operator<=>(const MethodRemoved&) const = default; };
struct MethodModified { MethodDef before; MethodDef after; auto operator<=>(const MethodModified&) const = default; };

// Composite intents: parameters only, so the effects can be recomputed when
// the intent is replayed against a different codebase.
struct RenameMethod { CodeUnitRef oldRef; std::string newSelector; auto operator<=>(const RenameMethod&) const = default; };
struct RenameClass  { CodeUnitRef oldRef; std::string newName;     auto operator<=>(const RenameClass&) const = default; };

// System events: state-neutral by themselves; effects arrive via triggered children.
struct SessionStart { std::string sessionId;              auto operator<=>(const SessionStart&) const = default; };
struct SessionSave  { std::optional<std::string> label;   auto operator<=>(const SessionSave&) const = default; };
struct SessionEnd   {                                     auto operator<=>(const SessionEnd&) const = default; };
struct ExpressionEvaluation { std::string source;         auto operator<=>(const ExpressionEvaluation&) const = default; };
struct LoadVersion  { std::string packageName; std::string versionLabel; auto operator<=>(const LoadVersion&) const = default; };
struct SaveVersion  { std::string packageName; std::string versionLabel; auto operator<=>(const SaveVersion&) const = default; };
struct Undo         { EntryId target;                     auto operator<=>(const Undo&) const = default; };
struct Redo         { EntryId target;                     auto operator<=>(const Redo&) const = default; };
struct Condense     { CodeUnitRef unit;                   auto operator<=>(const Condense&) const = default; };
struct Split        { std::vector<EntryId> targets; std::string branchLabel; auto operator<=>(const Split&) const = default; };

using Event = std::variant<
    PackageAdded, PackageRemoved,
    ClassAdded, ClassRemoved, ClassModified,
    MethodAdded, MethodRemoved, MethodModified,
    RenameMethod, RenameClass,
    SessionStart, SessionSave, SessionEnd,
    ExpressionEvaluation, LoadVersion, SaveVersion,
    Undo, Redo, Condense, Split>;

bool isElementary(const Event& event);
bool isComposite(const Event& event);
bool isSystem(const Event& event);

// Variant name as used in serialized records, e.g. "ClassAdded".
std::string eventKind(const Event& event);

// The unit(s) an event is directly about. Empty for system events.
// A Modified whose before/after name differ contributes both refs.
std::vector<CodeUnitRef> subjectRefs(const Event& event);

// Subject(s) plus every enclosing unit, in chain order, de-duplicated.
// System events yield {} except Condense (its unit) and Load/SaveVersion
// (the package). Split targets live in another module's entries; resolving
// them needs a log, see Log::query.
std::vector<CodeUnitRef> affectedUnits(const Event& event);

bool affects(const Event& event, const CodeUnitRef& unit);

// Short label for an elementary event: "add package P", "add A",
// "modify A>>m", "remove A class>>new".
std::string elementaryLabel(const Event& event);

// ---------------------------------------------------------------------------
// Tags
// ---------------------------------------------------------------------------

enum class TagKey {
    Author,
    Timestamp,
    TriggeredBy,
    RedoneFrom,
    RefactoringOf,
    CommitLabel,
    Comment,
    BranchLabel,
};

// triggeredBy / redoneFrom / refactoringOf carry EntryId values.
bool tagKeyHoldsEntryId(TagKey key);
// comment and redoneFrom may repeat on one entry; the rest are single-valued.
bool tagKeyRepeatable(TagKey key);

const char* tagKeyName(TagKey key);
TagKey parseTagKey(const std::string& name);

using TagValue = std::variant<std::string, EntryId>;

struct Tag {
    TagKey key;
    TagValue value;
    auto operator<=>(const Tag&) const = default;

    static Tag text(TagKey key, std::string value) { return {key, TagValue{std::move(value)}}; }
    static Tag entry(TagKey key, EntryId value) { return {key, TagValue{std::move(value)}}; }
};

using TagMap = std::map<TagKey, std::vector<TagValue>>;

std::optional<EntryId> firstEntryValue(const TagMap& tags, TagKey key);
std::optional<std::string> firstTextValue(const TagMap& tags, TagKey key);

// ---------------------------------------------------------------------------
// JSON codec (lossless round-trip for every type above)
// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const EntryId& id);
void from_json(const nlohmann::json& j, EntryId& id);
void to_json(nlohmann::json& j, const CodeUnitRef& ref);
void from_json(const nlohmann::json& j, CodeUnitRef& ref);
void to_json(nlohmann::json& j, const PackageDef& def);
void from_json(const nlohmann::json& j, PackageDef& def);
void to_json(nlohmann::json& j, const ClassDef& def);
void from_json(const nlohmann::json& j, ClassDef& def);
void to_json(nlohmann::json& j, const MethodDef& def);
void from_json(const nlohmann::json& j, MethodDef& def);

// Events serialize as {"kind": <eventKind>, ...payload}.
nlohmann::json eventToJson(const Event& event);
Event eventFromJson(const nlohmann::json& j);

nlohmann::json tagMapToJson(const TagMap& tags);
TagMap tagMapFromJson(const nlohmann::json& j);

} // namespace omlog
