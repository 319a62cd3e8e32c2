#include <unistd.h>
#include <functional>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "omlog/engine.hpp"
#include "omlog/errors.hpp"

namespace fs = std::filesystem;
using namespace omlog;

namespace {

std::string nowUtc() {
    std::time_t now = std::time(nullptr);
    std::tm parts{};
    gmtime_r(&now, &parts);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", parts.tm_year + 1900,
                  parts.tm_mon + 1, parts.tm_mday, parts.tm_hour, parts.tm_min, parts.tm_sec);
    return buf;
}

std::string defaultAuthor() {
    if (const char* a = std::getenv("OMLOG_AUTHOR")) return a;
    if (const char* u = std::getenv("USER")) return u;
    return "anonymous";
}

std::string readSource(const std::string& arg) {
    if (arg == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        std::string text = buf.str();
        if (!text.empty() && text.back() == '\n') text.pop_back();
        return text;
    }
    std::ifstream in(arg, std::ios::binary);
    if (!in) throw Error("cannot read source file " + arg);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    if (!text.empty() && text.back() == '\n') text.pop_back();
    return text;
}

// Accepts both "main:7" and the shorthand ":7" for the current log.
EntryId parseId(const std::string& text, const std::string& logName) {
    if (!text.empty() && text.front() == ':') return EntryId::parse(logName + text);
    return EntryId::parse(text);
}

void printEntries(const Log& log, const std::vector<EntryId>& ids) {
    std::vector<const Entry*> entries;
    for (const auto& id : ids) entries.push_back(&log.at(id));
    std::cout << renderListing(log, entries);
}

void printReplayResult(const Log& log, const ReplayResult& result) {
    if (result.sourceNote) std::cout << "note: " << *result.sourceNote << "\n";
    printEntries(log, result.appended);
    for (const auto& skip : result.skipped) {
        std::cout << "skipped " << skip.source.str() << ": " << skip.reason << "\n";
    }
}

void inspectExport(const fs::path& file) {
    std::vector<Entry> entries = Workspace::readExportFile(file);
    if (entries.empty()) {
        std::cout << "(no entries)\n";
        return;
    }
    // Labels need a Log to chase undo/redo targets, so round-trip the export
    // through a throwaway log file.
    char tmpl[] = "/tmp/omlog-inspect-XXXXXX";
    if (!::mkdtemp(tmpl)) throw Error("cannot create a scratch directory");
    fs::path dir(tmpl);
    try {
        fs::path logFile = dir / (entries.front().id.logName + ".omlog");
        {
            std::ofstream out(logFile, std::ios::binary);
            out << "omlog 1\n";
            for (const auto& entry : entries) out << entryToRecord(entry).dump() << "\n";
        }
        Log log = Log::loadReadOnly(logFile);
        std::vector<const Entry*> all;
        for (const auto& entry : log.entries()) all.push_back(&entry);
        std::cout << renderListing(log, all);
    } catch (...) {
        fs::remove_all(dir);
        throw;
    }
    fs::remove_all(dir);
}

struct Options {
    std::string dir = ".";
    std::string logName = "main";
    std::string author = defaultAuthor();
    std::string at; // fixed timestamp for reproducible runs
    std::string branch;

    RecordContext ctx() const {
        RecordContext c;
        c.author = author;
        c.timestamp = at.empty() ? nowUtc() : at;
        if (!branch.empty()) c.branch = branch;
        return c;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"event log for code history"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("-C,--dir", opt.dir, "workspace directory");
    app.add_option("--log", opt.logName, "log name (default: main)");
    app.add_option("--author", opt.author, "author recorded on new entries");
    app.add_option("--at", opt.at, "fixed timestamp for new entries");
    app.add_option("--branch", opt.branch, "record onto this branch");

    // --- init -----------------------------------------------------------
    auto* cmdInit = app.add_subcommand("init", "create a fresh log here");

    // --- sessions -------------------------------------------------------
    auto* cmdSession = app.add_subcommand("session", "session boundaries");
    cmdSession->require_subcommand(1);
    auto* cmdSessionStart = cmdSession->add_subcommand("start", "begin a working session");
    std::string sessionLabel;
    auto* cmdSessionSave = cmdSession->add_subcommand("save", "mark the image as saved");
    cmdSessionSave->add_option("--label", sessionLabel, "optional label");
    auto* cmdSessionEnd = cmdSession->add_subcommand("end", "close the session");

    // --- code changes ---------------------------------------------------
    std::string argPackage;
    auto* cmdAddPackage = app.add_subcommand("add-package", "create a package");
    cmdAddPackage->add_option("name", argPackage)->required();
    auto* cmdRemovePackage = app.add_subcommand("remove-package", "delete an empty package");
    cmdRemovePackage->add_option("name", argPackage)->required();

    std::string argClass, argSuper = "Object", argIvars, argClassComment;
    auto* cmdAddClass = app.add_subcommand("add-class", "create a class");
    cmdAddClass->add_option("class", argClass, "as package/Name")->required();
    cmdAddClass->add_option("--super", argSuper, "superclass name");
    cmdAddClass->add_option("--ivars", argIvars, "comma-separated instance variables");
    cmdAddClass->add_option("--class-comment", argClassComment, "class comment");
    auto* cmdModifyClass = app.add_subcommand("modify-class", "change a class definition");
    cmdModifyClass->add_option("class", argClass)->required();
    cmdModifyClass->add_option("--super", argSuper);
    cmdModifyClass->add_option("--ivars", argIvars);
    cmdModifyClass->add_option("--class-comment", argClassComment);
    auto* cmdRemoveClass = app.add_subcommand("remove-class", "delete a class with no methods");
    cmdRemoveClass->add_option("class", argClass)->required();

    std::string argMethod, argSource, argProtocol = "as yet unclassified";
    auto* cmdAddMethod = app.add_subcommand("add-method", "create a method");
    cmdAddMethod->add_option("method", argMethod, "as package/Class>>selector")->required();
    cmdAddMethod->add_option("--source", argSource, "source file, or - for stdin")->required();
    cmdAddMethod->add_option("--protocol", argProtocol);
    auto* cmdModifyMethod = app.add_subcommand("modify-method", "change a method");
    cmdModifyMethod->add_option("method", argMethod)->required();
    cmdModifyMethod->add_option("--source", argSource)->required();
    cmdModifyMethod->add_option("--protocol", argProtocol);
    auto* cmdRemoveMethod = app.add_subcommand("remove-method", "delete a method");
    cmdRemoveMethod->add_option("method", argMethod)->required();

    std::string argExpr;
    auto* cmdEval = app.add_subcommand("eval", "record an evaluated expression");
    cmdEval->add_option("expression", argExpr)->required();

    // --- history --------------------------------------------------------
    std::string argUnit;
    auto* cmdLog = app.add_subcommand("log", "list the entries");
    cmdLog->add_option("--unit", argUnit, "only entries touching this unit");
    auto* cmdView = app.add_subcommand("view", "history tree of one unit");
    cmdView->add_option("unit", argUnit)->required();
    std::string argOverlay;
    cmdView->add_option("--overlay", argOverlay,
                        "also show this log's unsaved tail as a branch");

    std::string argId;
    auto* cmdUndo = app.add_subcommand("undo", "take back an entry");
    cmdUndo->add_option("id", argId)->required();
    std::string argRedoId;
    auto* cmdRedo = app.add_subcommand("redo", "replay an undone entry");
    cmdRedo->add_option("id", argRedoId, "defaults to the latest undone entry");

    auto* cmdCondense = app.add_subcommand("condense", "drop history that cancels out");
    cmdCondense->add_option("unit", argUnit)->required();

    std::vector<std::string> argIds;
    auto* cmdSplit = app.add_subcommand("split", "move entries onto a branch (--branch)");
    cmdSplit->add_option("id", argIds)->required();

    std::string argText, argKey, argValue;
    auto* cmdComment = app.add_subcommand("comment", "attach a comment to an entry");
    cmdComment->add_option("id", argId)->required();
    cmdComment->add_option("text", argText)->required();
    auto* cmdTag = app.add_subcommand("tag", "attach a tag to an entry");
    cmdTag->add_option("id", argId)->required();
    cmdTag->add_option("key", argKey)->required();
    cmdTag->add_option("value", argValue)->required();

    // --- versions -------------------------------------------------------
    std::string argLabel;
    auto* cmdSaveVersion = app.add_subcommand("save-version", "freeze a package");
    cmdSaveVersion->add_option("package", argPackage)->required();
    cmdSaveVersion->add_option("label", argLabel)->required();
    std::string argTriggeredBy;
    auto* cmdLoadVersion = app.add_subcommand("load-version", "load a frozen package");
    cmdLoadVersion->add_option("package", argPackage)->required();
    cmdLoadVersion->add_option("label", argLabel)->required();
    cmdLoadVersion->add_option("--triggered-by", argTriggeredBy,
                               "entry that caused this load (e.g. an evaluation)");

    // --- other logs -----------------------------------------------------
    std::string argFile, argAfter;
    auto* cmdRecover = app.add_subcommand("recover", "replay the tail of a crashed log");
    cmdRecover->add_option("crashedlog", argFile, "path to the crashed .omlog")->required();
    cmdRecover->add_option("--after", argAfter, "last entry that made it to a save")->required();
    auto* cmdExport = app.add_subcommand("export", "write the log for someone else");
    cmdExport->add_option("file", argFile)->required();
    bool flagInspect = false;
    auto* cmdImport = app.add_subcommand("import", "replay an exported log here");
    cmdImport->add_option("file", argFile)->required();
    cmdImport->add_flag("--inspect", flagInspect, "list it without changing anything");

    // --- refactorings ---------------------------------------------------
    std::string argNewName;
    auto* cmdRenameMethod = app.add_subcommand("rename-method", "rename a method and its senders");
    cmdRenameMethod->add_option("method", argMethod)->required();
    cmdRenameMethod->add_option("newselector", argNewName)->required();
    auto* cmdRenameClass = app.add_subcommand("rename-class", "rename a class and its references");
    cmdRenameClass->add_option("class", argClass)->required();
    cmdRenameClass->add_option("newname", argNewName)->required();
    auto* cmdReplayRefactoring =
        app.add_subcommand("replay-refactoring", "re-run refactorings from an exported log");
    cmdReplayRefactoring->add_option("file", argFile)->required();

    // Let global flags (--branch, --at, ...) appear after the subcommand too.
    std::function<void(CLI::App*)> enableFallthrough = [&](CLI::App* cmd) {
        for (auto* sub : cmd->get_subcommands([](const CLI::App*) { return true; })) {
            sub->fallthrough();
            enableFallthrough(sub);
        }
    };
    enableFallthrough(&app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        fs::path dir(opt.dir);
        RecordContext ctx = opt.ctx();

        if (cmdInit->parsed()) {
            Workspace::init(dir, opt.logName);
            std::cout << "initialized " << opt.logName << ".omlog\n";
            return 0;
        }
        if (cmdImport->parsed() && flagInspect) {
            inspectExport(argFile);
            return 0;
        }

        Workspace ws = Workspace::open(dir, opt.logName);

        // Read-only commands first.
        if (cmdLog->parsed()) {
            std::vector<const Entry*> entries;
            if (!argUnit.empty()) {
                entries = ws.log().entriesAffecting(parseUnitRef(argUnit));
            } else {
                for (const auto& entry : ws.log().entries()) entries.push_back(&entry);
            }
            std::cout << renderListing(ws.log(), entries);
            return 0;
        }
        if (cmdView->parsed()) {
            CodeUnitRef unit = parseUnitRef(argUnit);
            if (argOverlay.empty()) {
                std::cout << renderView(ws.unitView(unit));
            } else {
                Log overlay = Log::loadReadOnly(argOverlay);
                if (auto note = overlay.truncationNote()) {
                    std::cout << "note: " << *note << "\n";
                }
                std::cout << renderView(buildViewWithOverlay(ws.log(), unit, overlay));
            }
            return 0;
        }
        if (cmdExport->parsed()) {
            ws.exportLog(argFile);
            std::cout << "exported " << ws.log().entries().size() << " entries\n";
            return 0;
        }

        std::vector<EntryId> appended;
        if (cmdSessionStart->parsed()) {
            appended.push_back(ws.startSession(ctx));
        } else if (cmdSessionSave->parsed()) {
            std::optional<std::string> label;
            if (!sessionLabel.empty()) label = sessionLabel;
            appended.push_back(ws.saveSession(ctx, label));
        } else if (cmdSessionEnd->parsed()) {
            appended.push_back(ws.endSession(ctx));
        } else if (cmdAddPackage->parsed()) {
            appended.push_back(ws.record(PackageAdded{PackageDef{argPackage}}, ctx));
        } else if (cmdRemovePackage->parsed()) {
            const PackageDef* def = ws.codebase().findPackage(argPackage);
            if (!def) throw ConflictError(ConflictError::Kind::Missing, argPackage);
            appended.push_back(ws.record(PackageRemoved{*def}, ctx));
        } else if (cmdAddClass->parsed() || cmdModifyClass->parsed()) {
            CodeUnitRef ref = parseUnitRef(argClass);
            if (ref.kind != UnitKind::Class) throw Error("expected package/Name");
            ClassDef def;
            def.name = ref.className;
            def.packageName = ref.packageName;
            def.superclassName = argSuper;
            def.comment = argClassComment;
            std::istringstream ivars(argIvars);
            for (std::string ivar; std::getline(ivars, ivar, ',');) {
                if (!ivar.empty()) def.instanceVariables.push_back(ivar);
            }
            if (cmdAddClass->parsed()) {
                appended.push_back(ws.record(ClassAdded{def}, ctx));
            } else {
                const ClassDef* before = ws.codebase().findClass(ref.className);
                if (!before) throw ConflictError(ConflictError::Kind::Missing, argClass);
                ClassDef after = def;
                if (!cmdModifyClass->count("--super")) after.superclassName = before->superclassName;
                if (!cmdModifyClass->count("--ivars")) after.instanceVariables = before->instanceVariables;
                if (!cmdModifyClass->count("--class-comment")) after.comment = before->comment;
                appended.push_back(ws.record(ClassModified{*before, after}, ctx));
            }
        } else if (cmdRemoveClass->parsed()) {
            CodeUnitRef ref = parseUnitRef(argClass);
            const ClassDef* def = ws.codebase().findClass(ref.className);
            if (!def) throw ConflictError(ConflictError::Kind::Missing, argClass);
            appended.push_back(ws.record(ClassRemoved{*def}, ctx));
        } else if (cmdAddMethod->parsed() || cmdModifyMethod->parsed()) {
            CodeUnitRef ref = parseUnitRef(argMethod);
            if (ref.kind != UnitKind::Method) throw Error("expected package/Class>>selector");
            MethodDef def;
            def.classRef = CodeUnitRef::cls(ref.packageName, ref.className);
            def.classSide = ref.classSide;
            def.selector = ref.selector;
            def.protocol = argProtocol;
            def.source = readSource(argSource);
            if (cmdAddMethod->parsed()) {
                appended.push_back(ws.record(MethodAdded{def}, ctx));
            } else {
                const MethodDef* before = ws.codebase().findMethod(MethodKey::of(ref));
                if (!before) throw ConflictError(ConflictError::Kind::Missing, argMethod);
                MethodDef after = def;
                if (!cmdModifyMethod->count("--protocol")) after.protocol = before->protocol;
                appended.push_back(ws.record(MethodModified{*before, after}, ctx));
            }
        } else if (cmdRemoveMethod->parsed()) {
            CodeUnitRef ref = parseUnitRef(argMethod);
            const MethodDef* def = ws.codebase().findMethod(MethodKey::of(ref));
            if (!def) throw ConflictError(ConflictError::Kind::Missing, argMethod);
            appended.push_back(ws.record(MethodRemoved{*def}, ctx));
        } else if (cmdEval->parsed()) {
            appended.push_back(ws.evaluate(argExpr, ctx));
        } else if (cmdUndo->parsed()) {
            appended = ws.undo(parseId(argId, opt.logName), ctx);
        } else if (cmdRedo->parsed()) {
            std::optional<EntryId> target;
            if (!argRedoId.empty()) target = parseId(argRedoId, opt.logName);
            appended = ws.redo(target, ctx);
        } else if (cmdCondense->parsed()) {
            appended = ws.condense(parseUnitRef(argUnit), ctx);
            if (appended.empty()) {
                std::cout << "nothing to condense\n";
                return 0;
            }
        } else if (cmdSplit->parsed()) {
            if (opt.branch.empty()) throw Error("split needs --branch <label>");
            std::vector<EntryId> targets;
            for (const auto& id : argIds) targets.push_back(parseId(id, opt.logName));
            RecordContext splitCtx = ctx;
            splitCtx.branch.reset(); // --branch names the new branch here
            appended = ws.split(targets, opt.branch, splitCtx);
        } else if (cmdComment->parsed()) {
            ws.comment(parseId(argId, opt.logName), argText);
        } else if (cmdTag->parsed()) {
            TagKey key = parseTagKey(argKey);
            Tag tag = tagKeyHoldsEntryId(key)
                          ? Tag::entry(key, parseId(argValue, opt.logName))
                          : Tag::text(key, argValue);
            ws.attachTag(parseId(argId, opt.logName), tag);
        } else if (cmdSaveVersion->parsed()) {
            appended.push_back(ws.saveVersion(argPackage, argLabel, ctx));
        } else if (cmdLoadVersion->parsed()) {
            std::optional<EntryId> trigger;
            if (!argTriggeredBy.empty()) trigger = parseId(argTriggeredBy, opt.logName);
            appended = ws.loadVersion(argPackage, argLabel, ctx, trigger);
        } else if (cmdRecover->parsed()) {
            Log crashed = Log::loadReadOnly(argFile);
            ReplayResult result =
                ws.recoverSession(argFile, parseId(argAfter, crashed.name()), ctx);
            printReplayResult(ws.log(), result);
            ws.syncCheckout();
            return 0;
        } else if (cmdImport->parsed()) {
            ReplayResult result = ws.importLog(argFile, ctx);
            printReplayResult(ws.log(), result);
            ws.syncCheckout();
            return 0;
        } else if (cmdRenameMethod->parsed()) {
            appended = ws.renameMethod(parseUnitRef(argMethod), argNewName, ctx);
        } else if (cmdRenameClass->parsed()) {
            appended = ws.renameClass(parseUnitRef(argClass), argNewName, ctx);
        } else if (cmdReplayRefactoring->parsed()) {
            ReplayResult result = ws.replayRefactorings(argFile, ctx);
            printReplayResult(ws.log(), result);
            ws.syncCheckout();
            return 0;
        }

        printEntries(ws.log(), appended);
        ws.syncCheckout();
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
