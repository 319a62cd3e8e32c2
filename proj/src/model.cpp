#include "omlog/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace omlog {

ConflictError::ConflictError(Kind kind, std::string unit, const std::string& detail)
    : Error(std::string("conflict: ") +
            [&] {
                switch (kind) {
                case Kind::AlreadyExists: return "already exists";
                case Kind::Missing: return "missing";
                case Kind::StaleBefore: return "stale before-state";
                case Kind::NotEmpty: return "not empty";
                }
                return "unknown";
            }() +
            ": " + unit + (detail.empty() ? "" : " (" + detail + ")")),
      kind_(kind), unit_(std::move(unit)) {}

const char* ConflictError::kindName() const {
    switch (kind_) {
    case Kind::AlreadyExists: return "AlreadyExists";
    case Kind::Missing: return "Missing";
    case Kind::StaleBefore: return "StaleBefore";
    case Kind::NotEmpty: return "NotEmpty";
    }
    return "Unknown";
}

// ---------------------------------------------------------------------------
// EntryId
// ---------------------------------------------------------------------------

std::string EntryId::str() const {
    return logName + ":" + std::to_string(sequence);
}

EntryId EntryId::parse(const std::string& text) {
    auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0) {
        throw ParseError("entry id must look like <log>:<seq>: '" + text + "'");
    }
    EntryId id;
    id.logName = text.substr(0, colon);
    const char* first = text.data() + colon + 1;
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, id.sequence);
    if (ec != std::errc{} || ptr != last || id.sequence == 0) {
        throw ParseError("bad sequence number in entry id '" + text + "'");
    }
    return id;
}

// ---------------------------------------------------------------------------
// Unit refs
// ---------------------------------------------------------------------------

bool isIdentifier(const std::string& text) {
    if (text.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(text[0])) && text[0] != '_') return false;
    return std::all_of(text.begin(), text.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

CodeUnitRef CodeUnitRef::package(std::string name) {
    CodeUnitRef r;
    r.kind = UnitKind::Package;
    r.packageName = std::move(name);
    return r;
}

CodeUnitRef CodeUnitRef::cls(std::string packageName, std::string name) {
    CodeUnitRef r;
    r.kind = UnitKind::Class;
    r.packageName = std::move(packageName);
    r.className = std::move(name);
    return r;
}

CodeUnitRef CodeUnitRef::method(std::string packageName, std::string className,
                                std::string selector, bool classSide) {
    CodeUnitRef r;
    r.kind = UnitKind::Method;
    r.packageName = std::move(packageName);
    r.className = std::move(className);
    r.selector = std::move(selector);
    r.classSide = classSide;
    return r;
}

std::string formatUnitRef(const CodeUnitRef& ref) {
    switch (ref.kind) {
    case UnitKind::Package:
        return ref.packageName;
    case UnitKind::Class:
        return ref.packageName + "/" + ref.className;
    case UnitKind::Method:
        return ref.packageName + "/" + ref.className + (ref.classSide ? " class>>" : ">>") +
               ref.selector;
    }
    return {};
}

CodeUnitRef parseUnitRef(const std::string& text) {
    auto fail = [&](const std::string& why) -> CodeUnitRef {
        throw ParseError("bad unit ref '" + text + "': " + why);
    };

    auto slash = text.find('/');
    if (slash == std::string::npos) {
        if (!isIdentifier(text)) return fail("package name is not an identifier");
        return CodeUnitRef::package(text);
    }
    std::string pkg = text.substr(0, slash);
    if (!isIdentifier(pkg)) return fail("package name is not an identifier");
    std::string rest = text.substr(slash + 1);

    auto arrows = rest.find(">>");
    if (arrows == std::string::npos) {
        if (!isIdentifier(rest)) return fail("class name is not an identifier");
        return CodeUnitRef::cls(pkg, rest);
    }

    std::string clsPart = rest.substr(0, arrows);
    std::string selector = rest.substr(arrows + 2);
    bool classSide = false;
    constexpr const char* sideSuffix = " class";
    if (clsPart.size() > 6 && clsPart.compare(clsPart.size() - 6, 6, sideSuffix) == 0) {
        classSide = true;
        clsPart.resize(clsPart.size() - 6);
    }
    if (!isIdentifier(clsPart)) return fail("class name is not an identifier");
    if (!isIdentifier(selector)) return fail("selector is not an identifier");
    return CodeUnitRef::method(pkg, clsPart, selector, classSide);
}

std::vector<CodeUnitRef> enclosingChain(const CodeUnitRef& ref) {
    switch (ref.kind) {
    case UnitKind::Package:
        return {ref};
    case UnitKind::Class:
        return {ref, CodeUnitRef::package(ref.packageName)};
    case UnitKind::Method:
        return {ref, CodeUnitRef::cls(ref.packageName, ref.className),
                CodeUnitRef::package(ref.packageName)};
    }
    return {};
}

// ---------------------------------------------------------------------------
// Event classification
// ---------------------------------------------------------------------------

bool isElementary(const Event& event) {
    return std::holds_alternative<PackageAdded>(event) ||
           std::holds_alternative<PackageRemoved>(event) ||
           std::holds_alternative<ClassAdded>(event) ||
           std::holds_alternative<ClassRemoved>(event) ||
           std::holds_alternative<ClassModified>(event) ||
           std::holds_alternative<MethodAdded>(event) ||
           std::holds_alternative<MethodRemoved>(event) ||
           std::holds_alternative<MethodModified>(event);
}

bool isComposite(const Event& event) {
    return std::holds_alternative<RenameMethod>(event) ||
           std::holds_alternative<RenameClass>(event);
}

bool isSystem(const Event& event) {
    return !isElementary(event) && !isComposite(event);
}

std::string eventKind(const Event& event) {
    return std::visit(
        [](const auto& e) -> std::string {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, PackageAdded>) return "PackageAdded";
            else if constexpr (std::is_same_v<T, PackageRemoved>) return "PackageRemoved";
            else if constexpr (std::is_same_v<T, ClassAdded>) return "ClassAdded";
            else if constexpr (std::is_same_v<T, ClassRemoved>) return "ClassRemoved";
            else if constexpr (std::is_same_v<T, ClassModified>) return "ClassModified";
            else if constexpr (std::is_same_v<T, MethodAdded>) return "MethodAdded";
            else if constexpr (std::is_same_v<T, MethodRemoved>) return "MethodRemoved";
            else if constexpr (std::is_same_v<T, MethodModified>) return "MethodModified";
            else if constexpr (std::is_same_v<T, RenameMethod>) return "RenameMethod";
            else if constexpr (std::is_same_v<T, RenameClass>) return "RenameClass";
            else if constexpr (std::is_same_v<T, SessionStart>) return "SessionStart";
            else if constexpr (std::is_same_v<T, SessionSave>) return "SessionSave";
            else if constexpr (std::is_same_v<T, SessionEnd>) return "SessionEnd";
            else if constexpr (std::is_same_v<T, ExpressionEvaluation>) return "ExpressionEvaluation";
            else if constexpr (std::is_same_v<T, LoadVersion>) return "LoadVersion";
            else if constexpr (std::is_same_v<T, SaveVersion>) return "SaveVersion";
            else if constexpr (std::is_same_v<T, Undo>) return "Undo";
            else if constexpr (std::is_same_v<T, Redo>) return "Redo";
            else if constexpr (std::is_same_v<T, Condense>) return "Condense";
            else if constexpr (std::is_same_v<T, Split>) return "Split";
        },
        event);
}

std::vector<CodeUnitRef> subjectRefs(const Event& event) {
    std::vector<CodeUnitRef> out;
    auto push = [&](const CodeUnitRef& r) {
        if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
    };
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, PackageAdded> || std::is_same_v<T, PackageRemoved> ||
                          std::is_same_v<T, ClassAdded> || std::is_same_v<T, ClassRemoved> ||
                          std::is_same_v<T, MethodAdded> || std::is_same_v<T, MethodRemoved>) {
                push(e.def.ref());
            } else if constexpr (std::is_same_v<T, ClassModified> ||
                                 std::is_same_v<T, MethodModified>) {
                push(e.before.ref());
                push(e.after.ref());
            } else if constexpr (std::is_same_v<T, RenameMethod>) {
                push(e.oldRef);
                push(CodeUnitRef::method(e.oldRef.packageName, e.oldRef.className, e.newSelector,
                                         e.oldRef.classSide));
            } else if constexpr (std::is_same_v<T, RenameClass>) {
                push(e.oldRef);
                push(CodeUnitRef::cls(e.oldRef.packageName, e.newName));
            }
        },
        event);
    return out;
}

std::vector<CodeUnitRef> affectedUnits(const Event& event) {
    std::vector<CodeUnitRef> out;
    auto push = [&](const CodeUnitRef& r) {
        if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
    };

    if (isElementary(event) || isComposite(event)) {
        for (const auto& subject : subjectRefs(event)) {
            for (const auto& link : enclosingChain(subject)) push(link);
        }
        // subjects first, then the enclosing units
        std::stable_sort(out.begin(), out.end(), [&](const CodeUnitRef& a, const CodeUnitRef& b) {
            auto depth = [](const CodeUnitRef& r) {
                return r.kind == UnitKind::Method ? 0 : r.kind == UnitKind::Class ? 1 : 2;
            };
            return depth(a) < depth(b);
        });
        return out;
    }
    if (const auto* c = std::get_if<Condense>(&event)) return {c->unit};
    if (const auto* l = std::get_if<LoadVersion>(&event)) return {CodeUnitRef::package(l->packageName)};
    if (const auto* s = std::get_if<SaveVersion>(&event)) return {CodeUnitRef::package(s->packageName)};
    return {}; // Session*, ExpressionEvaluation, Undo, Redo; Split resolves via its log
}

bool affects(const Event& event, const CodeUnitRef& unit) {
    auto units = affectedUnits(event);
    return std::find(units.begin(), units.end(), unit) != units.end();
}

namespace {

std::string shortName(const CodeUnitRef& ref) {
    switch (ref.kind) {
    case UnitKind::Package: return "package " + ref.packageName;
    case UnitKind::Class: return ref.className;
    case UnitKind::Method:
        return ref.className + (ref.classSide ? " class>>" : ">>") + ref.selector;
    }
    return {};
}

} // namespace

std::string elementaryLabel(const Event& event) {
    return std::visit(
        [](const auto& e) -> std::string {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, PackageAdded>) return "add " + shortName(e.def.ref());
            else if constexpr (std::is_same_v<T, PackageRemoved>) return "remove " + shortName(e.def.ref());
            else if constexpr (std::is_same_v<T, ClassAdded>) return "add " + shortName(e.def.ref());
            else if constexpr (std::is_same_v<T, ClassRemoved>) return "remove " + shortName(e.def.ref());
            else if constexpr (std::is_same_v<T, ClassModified>) return "modify " + shortName(e.before.ref());
            else if constexpr (std::is_same_v<T, MethodAdded>) return "add " + shortName(e.def.ref());
            else if constexpr (std::is_same_v<T, MethodRemoved>) return "remove " + shortName(e.def.ref());
            else if constexpr (std::is_same_v<T, MethodModified>) return "modify " + shortName(e.before.ref());
            else return std::string{};
        },
        event);
}

// ---------------------------------------------------------------------------
// Tags
// ---------------------------------------------------------------------------

bool tagKeyHoldsEntryId(TagKey key) {
    return key == TagKey::TriggeredBy || key == TagKey::RedoneFrom || key == TagKey::RefactoringOf;
}

bool tagKeyRepeatable(TagKey key) {
    return key == TagKey::Comment || key == TagKey::RedoneFrom;
}

const char* tagKeyName(TagKey key) {
    switch (key) {
    case TagKey::Author: return "author";
    case TagKey::Timestamp: return "timestamp";
    case TagKey::TriggeredBy: return "triggeredBy";
    case TagKey::RedoneFrom: return "redoneFrom";
    case TagKey::RefactoringOf: return "refactoringOf";
    case TagKey::CommitLabel: return "commitLabel";
    case TagKey::Comment: return "comment";
    case TagKey::BranchLabel: return "branchLabel";
    }
    return "?";
}

TagKey parseTagKey(const std::string& name) {
    for (TagKey key : {TagKey::Author, TagKey::Timestamp, TagKey::TriggeredBy, TagKey::RedoneFrom,
                       TagKey::RefactoringOf, TagKey::CommitLabel, TagKey::Comment,
                       TagKey::BranchLabel}) {
        if (name == tagKeyName(key)) return key;
    }
    throw ParseError("unknown tag key '" + name + "'");
}

std::optional<EntryId> firstEntryValue(const TagMap& tags, TagKey key) {
    auto it = tags.find(key);
    if (it == tags.end() || it->second.empty()) return std::nullopt;
    if (const auto* id = std::get_if<EntryId>(&it->second.front())) return *id;
    return std::nullopt;
}

std::optional<std::string> firstTextValue(const TagMap& tags, TagKey key) {
    auto it = tags.find(key);
    if (it == tags.end() || it->second.empty()) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(&it->second.front())) return *s;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// JSON codec
// ---------------------------------------------------------------------------

using nlohmann::json;

void to_json(json& j, const EntryId& id) { j = id.str(); }

void from_json(const json& j, EntryId& id) { id = EntryId::parse(j.get<std::string>()); }

void to_json(json& j, const CodeUnitRef& ref) { j = formatUnitRef(ref); }

void from_json(const json& j, CodeUnitRef& ref) { ref = parseUnitRef(j.get<std::string>()); }

void to_json(json& j, const PackageDef& def) { j = json{{"name", def.name}}; }

void from_json(const json& j, PackageDef& def) { def.name = j.at("name").get<std::string>(); }

void to_json(json& j, const ClassDef& def) {
    j = json{{"name", def.name},
             {"package", def.packageName},
             {"superclass", def.superclassName},
             {"instanceVariables", def.instanceVariables},
             {"comment", def.comment}};
}

void from_json(const json& j, ClassDef& def) {
    def.name = j.at("name").get<std::string>();
    def.packageName = j.at("package").get<std::string>();
    def.superclassName = j.at("superclass").get<std::string>();
    def.instanceVariables = j.at("instanceVariables").get<std::vector<std::string>>();
    def.comment = j.at("comment").get<std::string>();
}

void to_json(json& j, const MethodDef& def) {
    j = json{{"class", def.classRef},
             {"classSide", def.classSide},
             {"selector", def.selector},
             {"protocol", def.protocol},
             {"source", def.source}};
}

void from_json(const json& j, MethodDef& def) {
    def.classRef = j.at("class").get<CodeUnitRef>();
    def.classSide = j.at("classSide").get<bool>();
    def.selector = j.at("selector").get<std::string>();
    def.protocol = j.at("protocol").get<std::string>();
    def.source = j.at("source").get<std::string>();
}

json eventToJson(const Event& event) {
    json j;
    j["kind"] = eventKind(event);
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, PackageAdded> || std::is_same_v<T, PackageRemoved> ||
                          std::is_same_v<T, ClassAdded> || std::is_same_v<T, ClassRemoved> ||
                          std::is_same_v<T, MethodAdded> || std::is_same_v<T, MethodRemoved>) {
                j["def"] = e.def;
            } else if constexpr (std::is_same_v<T, ClassModified> ||
                                 std::is_same_v<T, MethodModified>) {
                j["before"] = e.before;
                j["after"] = e.after;
            } else if constexpr (std::is_same_v<T, RenameMethod>) {
                j["old"] = e.oldRef;
                j["newSelector"] = e.newSelector;
            } else if constexpr (std::is_same_v<T, RenameClass>) {
                j["old"] = e.oldRef;
                j["newName"] = e.newName;
            } else if constexpr (std::is_same_v<T, SessionStart>) {
                j["sessionId"] = e.sessionId;
            } else if constexpr (std::is_same_v<T, SessionSave>) {
                if (e.label) j["label"] = *e.label;
            } else if constexpr (std::is_same_v<T, SessionEnd>) {
                // no payload
            } else if constexpr (std::is_same_v<T, ExpressionEvaluation>) {
                j["source"] = e.source;
            } else if constexpr (std::is_same_v<T, LoadVersion> || std::is_same_v<T, SaveVersion>) {
                j["package"] = e.packageName;
                j["version"] = e.versionLabel;
            } else if constexpr (std::is_same_v<T, Undo> || std::is_same_v<T, Redo>) {
                j["target"] = e.target;
            } else if constexpr (std::is_same_v<T, Condense>) {
                j["unit"] = e.unit;
            } else if constexpr (std::is_same_v<T, Split>) {
                j["targets"] = e.targets;
                j["branch"] = e.branchLabel;
            }
        },
        event);
    return j;
}

Event eventFromJson(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "PackageAdded") return PackageAdded{j.at("def").get<PackageDef>()};
    if (kind == "PackageRemoved") return PackageRemoved{j.at("def").get<PackageDef>()};
    if (kind == "ClassAdded") return ClassAdded{j.at("def").get<ClassDef>()};
    if (kind == "ClassRemoved") return ClassRemoved{j.at("def").get<ClassDef>()};
    if (kind == "ClassModified")
        return ClassModified{j.at("before").get<ClassDef>(), j.at("after").get<ClassDef>()};
    if (kind == "MethodAdded") return MethodAdded{j.at("def").get<MethodDef>()};
    if (kind == "MethodRemoved") return MethodRemoved{j.at("def").get<MethodDef>()};
    if (kind == "MethodModified")
        return MethodModified{j.at("before").get<MethodDef>(), j.at("after").get<MethodDef>()};
    if (kind == "RenameMethod")
        return RenameMethod{j.at("old").get<CodeUnitRef>(), j.at("newSelector").get<std::string>()};
    if (kind == "RenameClass")
        return RenameClass{j.at("old").get<CodeUnitRef>(), j.at("newName").get<std::string>()};
    if (kind == "SessionStart") return SessionStart{j.at("sessionId").get<std::string>()};
    if (kind == "SessionSave") {
        SessionSave s;
        if (j.contains("label")) s.label = j.at("label").get<std::string>();
        return s;
    }
    if (kind == "SessionEnd") return SessionEnd{};
    if (kind == "ExpressionEvaluation")
        return ExpressionEvaluation{j.at("source").get<std::string>()};
    if (kind == "LoadVersion")
        return LoadVersion{j.at("package").get<std::string>(), j.at("version").get<std::string>()};
    if (kind == "SaveVersion")
        return SaveVersion{j.at("package").get<std::string>(), j.at("version").get<std::string>()};
    if (kind == "Undo") return Undo{j.at("target").get<EntryId>()};
    if (kind == "Redo") return Redo{j.at("target").get<EntryId>()};
    if (kind == "Condense") return Condense{j.at("unit").get<CodeUnitRef>()};
    if (kind == "Split")
        return Split{j.at("targets").get<std::vector<EntryId>>(), j.at("branch").get<std::string>()};
    throw ParseError("unknown event kind '" + kind + "'");
}

json tagMapToJson(const TagMap& tags) {
    json j = json::object();
    for (const auto& [key, values] : tags) {
        json arr = json::array();
        for (const auto& value : values) {
            if (const auto* id = std::get_if<EntryId>(&value)) {
                arr.push_back(id->str());
            } else {
                arr.push_back(std::get<std::string>(value));
            }
        }
        j[tagKeyName(key)] = std::move(arr);
    }
    return j;
}

TagMap tagMapFromJson(const json& j) {
    TagMap tags;
    for (auto it = j.begin(); it != j.end(); ++it) {
        TagKey key = parseTagKey(it.key());
        for (const auto& value : it.value()) {
            std::string text = value.get<std::string>();
            if (tagKeyHoldsEntryId(key)) {
                tags[key].push_back(EntryId::parse(text));
            } else {
                tags[key].push_back(std::move(text));
            }
        }
    }
    return tags;
}

} // namespace omlog
