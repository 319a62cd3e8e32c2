#pragma once

// Shared helpers for the test suites: scratch directories, definition
// builders, an independent replay oracle for per-unit histories, a random
// scenario driver, a subprocess runner for the CLI binary, and the walkthrough
// scripts that the golden tests and the acceptance suite both replay.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "omlog/checkout.hpp"
#include "omlog/codebase.hpp"
#include "omlog/engine.hpp"
#include "omlog/views.hpp"

namespace omtest {

namespace fs = std::filesystem;
using namespace omlog;

// ---------------------------------------------------------------------------
// Scratch directories
// ---------------------------------------------------------------------------

class TempDir {
public:
    TempDir() {
        fs::path base = fs::exists("/dev/shm") ? fs::path("/dev/shm") : fs::temp_directory_path();
        std::string name = (base / "omlog-test-XXXXXX").string();
        if (!mkdtemp(name.data())) throw std::runtime_error("mkdtemp failed");
        path_ = name;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
    fs::path path_;
};

inline std::string readFile(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline void writeFile(const fs::path& file, const std::string& content) {
    fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + file.string());
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

inline RecordContext testContext() { return {"tester", "", {}}; }

inline ClassDef classDef(std::string pkg, std::string name, std::string super = "Object",
                         std::vector<std::string> ivars = {}, std::string comment = "") {
    return {std::move(name), std::move(pkg), std::move(super), std::move(ivars),
            std::move(comment)};
}

inline MethodDef methodDef(std::string pkg, std::string cls, std::string selector,
                           std::string source, bool classSide = false,
                           std::string protocol = "tests") {
    return {CodeUnitRef::cls(std::move(pkg), std::move(cls)), classSide, std::move(selector),
            std::move(protocol), std::move(source)};
}

// ---------------------------------------------------------------------------
// Replay oracle
//
// A unit's view extracts a slice of the log, so replaying it starts without
// the enclosing containers. The oracle creates those on demand (and seeds the
// before-state of a modify when the subject itself is outside the slice) but
// stays strict about everything else, so genuine history corruption still
// throws.
// ---------------------------------------------------------------------------

inline void applyLenient(Codebase& cb, const Event& event) {
    for (const auto& ref : subjectRefs(event)) {
        if (ref.kind != UnitKind::Package && !cb.hasPackage(ref.packageName)) {
            cb.applyInPlace(PackageAdded{{ref.packageName}});
        }
        if (ref.kind == UnitKind::Method && !cb.hasClass(ref.className)) {
            cb.applyInPlace(ClassAdded{classDef(ref.packageName, ref.className)});
        }
    }
    if (const auto* cm = std::get_if<ClassModified>(&event)) {
        if (!cb.hasClass(cm->before.name)) cb.applyInPlace(ClassAdded{cm->before});
    }
    if (const auto* mm = std::get_if<MethodModified>(&event)) {
        if (!cb.hasMethod(MethodKey::of(mm->before))) cb.applyInPlace(MethodAdded{mm->before});
    }
    cb.applyInPlace(event);
}

// Canonical, comparable snapshot of everything a unit's view is about.
inline std::string unitState(const Codebase& cb, const CodeUnitRef& unit) {
    nlohmann::json j;
    switch (unit.kind) {
    case UnitKind::Package: {
        j["present"] = cb.hasPackage(unit.packageName);
        j["classes"] = nlohmann::json::array();
        j["methods"] = nlohmann::json::array();
        for (const auto& cls : cb.classesInPackage(unit.packageName)) {
            j["classes"].push_back(cls);
            for (const auto& m : cb.methodsOfClass(cls.name)) j["methods"].push_back(m);
        }
        break;
    }
    case UnitKind::Class: {
        const ClassDef* cls = cb.findClass(unit.className);
        j["present"] = cls != nullptr;
        if (cls) {
            j["def"] = *cls;
            j["methods"] = nlohmann::json::array();
            for (const auto& m : cb.methodsOfClass(cls->name)) j["methods"].push_back(m);
        }
        break;
    }
    case UnitKind::Method: {
        const MethodDef* m = cb.findMethod(MethodKey::of(unit));
        j["present"] = m != nullptr;
        if (m) j["def"] = *m;
        break;
    }
    }
    return j.dump();
}

// Every unit any entry of the log was ever about, containers included.
inline std::vector<CodeUnitRef> unitsTouched(const Log& log) {
    std::set<CodeUnitRef> seen;
    for (const Entry& entry : log.entries()) {
        for (const auto& subject : subjectRefs(entry.event)) {
            for (const auto& ref : enclosingChain(subject)) seen.insert(ref);
        }
    }
    return {seen.begin(), seen.end()};
}

// ---------------------------------------------------------------------------
// Whole-workspace invariants
// ---------------------------------------------------------------------------

struct InvariantFailure {
    std::string what;
};

// The three structural guarantees, checked against independent oracles:
//  - the live codebase equals a from-scratch replay of the log's mainline;
//  - the checked-out file tree parses back to the same codebase;
//  - for every unit ever touched, replaying the view's effective history
//    reproduces the unit's current state.
inline std::vector<InvariantFailure> checkInvariants(const Workspace& ws) {
    std::vector<InvariantFailure> failures;

    if (Workspace::replayMainline(ws.log()) != ws.codebase()) {
        failures.push_back({"mainline replay differs from live codebase"});
    }

    ws.syncCheckout();
    if (loadCheckout(ws.dir()) != ws.codebase()) {
        failures.push_back({"checkout does not parse back to the live codebase"});
    }

    for (const auto& unit : unitsTouched(ws.log())) {
        View view = ws.unitView(unit);
        Codebase replayed;
        std::string note;
        try {
            for (const auto& id : view.effectiveHistory()) {
                applyLenient(replayed, ws.log().at(id).event);
            }
        } catch (const std::exception& e) {
            note = std::string("effective history of ") + formatUnitRef(unit) +
                   " does not replay: " + e.what();
        }
        if (note.empty() && unitState(replayed, unit) != unitState(ws.codebase(), unit)) {
            note = "effective history of " + formatUnitRef(unit) +
                   " replays to a different state";
        }
        if (!note.empty()) failures.push_back({note});
    }
    return failures;
}

// ---------------------------------------------------------------------------
// Random scenarios
//
// Drives a workspace through a random but valid-by-construction operation
// sequence. Draws that fail a domain precondition (undoing a stale entry,
// redoing with nothing undone, ...) count as exercising the error path and
// are simply skipped.
// ---------------------------------------------------------------------------

class ScenarioDriver {
public:
    ScenarioDriver(Workspace& ws, unsigned seed) : ws_(ws), rng_(seed) {}

    void run(int steps) {
        for (int i = 0; i < steps; ++i) step();
    }

    void step() {
        switch (pick(18)) {
        case 0: addPackage(); break;
        case 1: case 2: addClass(); break;
        case 3: case 4: case 5: addMethod(); break;
        case 6: case 7: modifyMethod(); break;
        case 8: removeMethod(); break;
        case 9: removeClass(); break;
        case 10: tryUndo(); break;
        case 11: tryRedo(); break;
        case 12: tryCondense(); break;
        case 13: tryRename(); break;
        case 14: trySplit(); break;
        case 15: session(); break;
        case 16: modifyClass(); break;
        default: comment(); break;
        }
    }

private:
    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

    template <typename T>
    const T* pickFrom(const std::vector<T>& pool) {
        if (pool.empty()) return nullptr;
        return &pool[static_cast<std::size_t>(pick(static_cast<int>(pool.size())))];
    }

    std::vector<std::string> livePackages() const { return ws_.codebase().packageNames(); }

    std::vector<ClassDef> liveClasses() const {
        std::vector<ClassDef> all;
        for (const auto& pkg : ws_.codebase().packageNames()) {
            for (auto& cls : ws_.codebase().classesInPackage(pkg)) all.push_back(cls);
        }
        return all;
    }

    std::vector<MethodDef> liveMethods() const {
        std::vector<MethodDef> all;
        for (const auto& cls : liveClasses()) {
            for (auto& m : ws_.codebase().methodsOfClass(cls.name)) all.push_back(m);
        }
        return all;
    }

    std::string freshSelector() { return "sel" + std::to_string(++nameCounter_); }

    std::string someSource(const std::string& selector) {
        std::string body;
        switch (pick(3)) {
        case 0: body = "  ^ " + std::to_string(pick(100)); break;
        case 1: {
            auto methods = liveMethods();
            if (const MethodDef* m = pickFrom(methods)) {
                body = "  ^ self " + m->selector + " + 1";
            } else {
                body = "  ^ 0";
            }
            break;
        }
        default: body = "  ^ self"; break;
        }
        return selector + "\n" + body;
    }

    void attempt(const std::function<void()>& op) {
        try {
            op();
        } catch (const Error&) {
            // precondition not met for this draw; fine
        }
    }

    void addPackage() {
        std::string name = "P" + std::to_string(pick(3) + 1);
        attempt([&] { ws_.record(PackageAdded{{name}}, testContext()); });
    }

    void addClass() {
        auto pkgs = livePackages();
        const std::string* pkg = pickFrom(pkgs);
        if (!pkg) return;
        std::string name = "C" + std::to_string(++nameCounter_);
        attempt([&] { ws_.record(ClassAdded{classDef(*pkg, name)}, testContext()); });
    }

    void addMethod() {
        auto classes = liveClasses();
        const ClassDef* cls = pickFrom(classes);
        if (!cls) return;
        std::string selector = freshSelector();
        MethodDef def = methodDef(cls->packageName, cls->name, selector, someSource(selector),
                                  pick(6) == 0);
        attempt([&] { ws_.record(MethodAdded{def}, testContext()); });
    }

    void modifyMethod() {
        auto methods = liveMethods();
        const MethodDef* before = pickFrom(methods);
        if (!before) return;
        MethodDef after = *before;
        after.source = someSource(before->selector);
        if (after.source == before->source) after.source += " + 1";
        attempt([&] { ws_.record(MethodModified{*before, after}, testContext()); });
    }

    void modifyClass() {
        auto classes = liveClasses();
        const ClassDef* before = pickFrom(classes);
        if (!before) return;
        ClassDef after = *before;
        after.comment = "note " + std::to_string(++nameCounter_);
        attempt([&] { ws_.record(ClassModified{*before, after}, testContext()); });
    }

    void removeMethod() {
        auto methods = liveMethods();
        const MethodDef* def = pickFrom(methods);
        if (!def) return;
        attempt([&] { ws_.record(MethodRemoved{*def}, testContext()); });
    }

    void removeClass() {
        auto classes = liveClasses();
        const ClassDef* def = pickFrom(classes);
        if (!def) return;
        if (!ws_.codebase().methodsOfClass(def->name).empty()) return;
        attempt([&] { ws_.record(ClassRemoved{*def}, testContext()); });
    }

    void tryUndo() {
        const auto& entries = ws_.log().entries();
        if (entries.empty()) return;
        // Prefer recent entries: stale ones mostly refuse, which is also
        // worth exercising now and then.
        std::size_t back = static_cast<std::size_t>(pick(std::min<int>(6, static_cast<int>(entries.size()))));
        const Entry& target = entries[entries.size() - 1 - back];
        attempt([&] { ws_.undo(target.id, testContext()); });
    }

    void tryRedo() {
        attempt([&] { ws_.redo(std::nullopt, testContext()); });
    }

    void tryCondense() {
        auto pkgs = livePackages();
        const std::string* pkg = pickFrom(pkgs);
        if (!pkg) return;
        attempt([&] { ws_.condense(CodeUnitRef::package(*pkg), testContext()); });
    }

    void tryRename() {
        auto methods = liveMethods();
        const MethodDef* def = pickFrom(methods);
        if (!def) return;
        attempt([&] { ws_.renameMethod(def->ref(), freshSelector(), testContext()); });
    }

    void trySplit() {
        auto pkgs = livePackages();
        const std::string* pkg = pickFrom(pkgs);
        if (!pkg) return;
        auto history = ws_.unitView(CodeUnitRef::package(*pkg)).effectiveHistory();
        if (history.size() < 2) return;
        std::size_t index = history.size() - 1 -
                            static_cast<std::size_t>(pick(std::min<int>(3, static_cast<int>(history.size()) - 1)));
        if (index == 0) return;
        attempt([&] {
            ws_.split({history[index]}, "side" + std::to_string(++nameCounter_), testContext());
        });
    }

    void session() {
        switch (pick(3)) {
        case 0: ws_.startSession(testContext()); break;
        case 1: attempt([&] { ws_.saveSession(testContext()); }); break;
        default: attempt([&] { ws_.endSession(testContext()); }); break;
        }
    }

    void comment() {
        const auto& entries = ws_.log().entries();
        if (entries.empty()) return;
        const Entry& target = entries[static_cast<std::size_t>(pick(static_cast<int>(entries.size())))];
        ws_.comment(target.id, "note " + std::to_string(++nameCounter_));
    }

    Workspace& ws_;
    std::mt19937 rng_;
    int nameCounter_ = 0;
};

// ---------------------------------------------------------------------------
// Random states and events (for apply/invert round-trip properties)
// ---------------------------------------------------------------------------

inline Codebase randomCodebase(std::mt19937& rng) {
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
    Codebase cb;
    int classCounter = 0;
    int packages = 1 + pick(3);
    for (int p = 0; p < packages; ++p) {
        std::string pkg = "P" + std::to_string(p);
        cb.applyInPlace(PackageAdded{{pkg}});
        int classes = pick(4);
        for (int c = 0; c < classes; ++c) {
            std::string cls = "C" + std::to_string(classCounter++);
            cb.applyInPlace(ClassAdded{classDef(pkg, cls)});
            int methods = pick(4);
            for (int m = 0; m < methods; ++m) {
                std::string sel = "sel" + std::to_string(m);
                cb.applyInPlace(MethodAdded{methodDef(
                    pkg, cls, sel, sel + "\n  ^ " + std::to_string(pick(100)), pick(5) == 0)});
            }
        }
    }
    return cb;
}

// Draws one elementary event that `cb` accepts. Retries across kinds, so it
// always terminates (adding a fresh package is always possible).
inline Event randomApplicableEvent(std::mt19937& rng, const Codebase& cb) {
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
    std::vector<ClassDef> classes;
    for (const auto& pkg : cb.packageNames()) {
        for (auto& cls : cb.classesInPackage(pkg)) classes.push_back(cls);
    }
    std::vector<MethodDef> methods;
    for (const auto& cls : classes) {
        for (auto& m : cb.methodsOfClass(cls.name)) methods.push_back(m);
    }
    auto fresh = [&](const char* prefix) {
        for (int i = 0;; ++i) {
            std::string name = std::string(prefix) + std::to_string(i);
            if (!cb.hasPackage(name) && !cb.hasClass(name)) return name;
        }
    };
    for (;;) {
        switch (pick(8)) {
        case 0:
            return PackageAdded{{fresh("New")}};
        case 1: {
            auto pkgs = cb.packageNames();
            if (pkgs.empty()) break;
            const auto& pkg = pkgs[static_cast<std::size_t>(pick(static_cast<int>(pkgs.size())))];
            if (!cb.classesInPackage(pkg).empty()) break;
            return PackageRemoved{*cb.findPackage(pkg)};
        }
        case 2: {
            auto pkgs = cb.packageNames();
            if (pkgs.empty()) break;
            const auto& pkg = pkgs[static_cast<std::size_t>(pick(static_cast<int>(pkgs.size())))];
            return ClassAdded{classDef(pkg, fresh("Fresh"))};
        }
        case 3: {
            if (classes.empty()) break;
            const auto& cls = classes[static_cast<std::size_t>(pick(static_cast<int>(classes.size())))];
            if (!cb.methodsOfClass(cls.name).empty()) break;
            return ClassRemoved{cls};
        }
        case 4: {
            if (classes.empty()) break;
            const auto& before = classes[static_cast<std::size_t>(pick(static_cast<int>(classes.size())))];
            ClassDef after = before;
            if (pick(3) == 0) {
                after.name = fresh("Renamed");
            } else {
                after.comment = "changed " + std::to_string(pick(1000));
            }
            return ClassModified{before, after};
        }
        case 5: {
            if (classes.empty()) break;
            const auto& cls = classes[static_cast<std::size_t>(pick(static_cast<int>(classes.size())))];
            std::string sel = fresh("added");
            if (cb.hasMethod({cls.name, false, sel})) break;
            return MethodAdded{methodDef(cls.packageName, cls.name, sel, sel + "\n  ^ 9")};
        }
        case 6: {
            if (methods.empty()) break;
            return MethodRemoved{methods[static_cast<std::size_t>(pick(static_cast<int>(methods.size())))]};
        }
        default: {
            if (methods.empty()) break;
            const auto& before = methods[static_cast<std::size_t>(pick(static_cast<int>(methods.size())))];
            MethodDef after = before;
            if (pick(4) == 0) {
                after.selector = fresh("moved");
                if (cb.hasMethod({after.classRef.className, after.classSide, after.selector})) break;
            } else {
                after.source = before.source + "\n  \"touched\"";
            }
            return MethodModified{before, after};
        }
        }
    }
}

// ---------------------------------------------------------------------------
// CLI subprocess runner
// ---------------------------------------------------------------------------

inline std::string cliBinary() {
    const char* bin = std::getenv("OMLOG_BIN");
    if (!bin || !*bin) throw std::runtime_error("OMLOG_BIN is not set");
    return bin;
}

inline std::string shellQuote(const std::string& text) {
    std::string quoted = "'";
    for (char c : text) {
        if (c == '\'') quoted += "'\\''";
        else quoted += c;
    }
    return quoted + "'";
}

struct CliResult {
    int exitCode = -1;
    std::string out;
    std::string err;
};

inline CliResult runCli(const fs::path& dir, const std::vector<std::string>& args,
                        const std::string& stdinData = {}) {
    fs::path inFile = dir / ".cli-in";
    fs::path outFile = dir / ".cli-out";
    fs::path errFile = dir / ".cli-err";
    writeFile(inFile, stdinData);
    std::string cmd = "cd " + shellQuote(dir.string()) + " && OMLOG_AUTHOR=tester " +
                      shellQuote(cliBinary());
    for (const auto& arg : args) cmd += " " + shellQuote(arg);
    cmd += " < .cli-in > .cli-out 2> .cli-err";
    int status = std::system(cmd.c_str());
    CliResult result;
    result.exitCode = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = readFile(outFile);
    result.err = readFile(errFile);
    fs::remove(inFile);
    fs::remove(outFile);
    fs::remove(errFile);
    return result;
}

// Runs a command sequence, echoing each command into a transcript above its
// output. Non-zero exits abort with the captured stderr so failures point at
// the offending step.
struct ScriptStep {
    std::vector<std::string> args;
    std::string stdinData;
};

inline std::string runScript(const fs::path& dir, const std::vector<ScriptStep>& steps) {
    std::ostringstream transcript;
    for (const auto& step : steps) {
        transcript << "$ omlog";
        for (const auto& arg : step.args) {
            transcript << ' ' << (arg.find(' ') == std::string::npos ? arg : "'" + arg + "'");
        }
        transcript << "\n";
        CliResult result = runCli(dir, step.args, step.stdinData);
        if (result.exitCode != 0) {
            throw std::runtime_error("script step failed (exit " +
                                     std::to_string(result.exitCode) + "): " + transcript.str() +
                                     result.err);
        }
        transcript << result.out;
    }
    return transcript.str();
}

// ---------------------------------------------------------------------------
// Goldens
// ---------------------------------------------------------------------------

inline fs::path goldenDir() {
    const char* dir = std::getenv("OMLOG_GOLDEN");
    if (!dir || !*dir) throw std::runtime_error("OMLOG_GOLDEN is not set");
    return dir;
}

// Returns the stored golden text; with OMLOG_UPDATE_GOLDEN=1 rewrites it
// from `actual` first (the way the files in tests/golden were produced).
inline std::string goldenExpected(const std::string& name, const std::string& actual) {
    fs::path file = goldenDir() / name;
    const char* update = std::getenv("OMLOG_UPDATE_GOLDEN");
    if (update && *update) writeFile(file, actual);
    return readFile(file);
}

// ---------------------------------------------------------------------------
// Walkthrough scripts
//
// The scenarios behind the golden transcripts: each one exercises a whole
// workflow through the CLI and returns the transcript of a fresh run.
// cli_tests and the acceptance suite compare them against the same goldens.
// ---------------------------------------------------------------------------

namespace walkthroughs {

// Seeds `P-1.version` (package P holding just class A) into `dir` by running
// a throwaway workspace, the way a VCS would have produced it.
inline void seedVersionOne(const fs::path& dir) {
    TempDir prep;
    runScript(prep.path(), {
                               {{"init"}, {}},
                               {{"add-package", "P"}, {}},
                               {{"add-class", "P/A"}, {}},
                               {{"save-version", "P", "1"}, {}},
                           });
    fs::copy_file(prep / "P-1.version", dir / "P-1.version");
}

// Load a package version, undo the class it brought, add another class.
// Shows the undone add as a cancelled branch in the package view and as a
// plain removal in the class's own view.
inline std::string versionUndoAdd(const fs::path& dir) {
    seedVersionOne(dir);
    return runScript(dir, {
                              {{"init"}, {}},
                              {{"session", "start"}, {}},
                              {{"load-version", "P", "1"}, {}},
                              {{"undo", ":4"}, {}},
                              {{"add-class", "P/B"}, {}},
                              {{"log"}, {}},
                              {{"view", "P"}, {}},
                              {{"view", "P/A"}, {}},
                          });
}

// Three sessions touching the same package; the view hides the boundaries.
inline std::string acrossSessions(const fs::path& dir) {
    return runScript(dir, {
                              {{"init"}, {}},
                              {{"session", "start"}, {}},
                              {{"add-package", "P"}, {}},
                              {{"add-class", "P/A"}, {}},
                              {{"session", "end"}, {}},
                              {{"session", "start"}, {}},
                              {{"add-method", "P/A>>m", "--source", "-"}, "m\n  ^ 1"},
                              {{"session", "end"}, {}},
                              {{"session", "start"}, {}},
                              {{"add-method", "P/A>>k", "--source", "-"}, "k\n  ^ 2"},
                              {{"log"}, {}},
                              {{"view", "P"}, {}},
                          });
}

// A session dies with two methods unsaved; a fresh workspace reloads the
// last version, inspects the lost tail as an overlay, then recovers it.
inline std::string crashRecovery(const fs::path& dir) {
    std::string crashed = runScript(dir, {
                                             {{"init", "--log", "lost"}, {}},
                                             {{"session", "start", "--log", "lost"}, {}},
                                             {{"add-package", "P", "--log", "lost"}, {}},
                                             {{"add-class", "P/A", "--log", "lost"}, {}},
                                             {{"save-version", "P", "1", "--log", "lost"}, {}},
                                             {{"add-method", "P/A>>m", "--log", "lost",
                                               "--source", "-"}, "m\n  ^ 1"},
                                             {{"add-method", "P/A>>k", "--log", "lost",
                                               "--source", "-"}, "k\n  ^ 2"},
                                             {{"view", "P", "--log", "lost"}, {}},
                                         });
    fs::path fresh = dir / "fresh";
    fs::create_directories(fresh);
    fs::copy_file(dir / "P-1.version", fresh / "P-1.version");
    fs::copy_file(dir / "lost.omlog", fresh / "lost.omlog");
    std::string recovered = runScript(fresh, {
                                                 {{"init"}, {}},
                                                 {{"session", "start"}, {}},
                                                 {{"load-version", "P", "1"}, {}},
                                                 {{"view", "P", "--overlay", "lost.omlog"}, {}},
                                                 {{"recover", "lost.omlog", "--after", "lost:4"}, {}},
                                                 {{"view", "P"}, {}},
                                                 {{"log"}, {}},
                                             });
    return crashed + recovered;
}

// Undo a method addition in the middle of a chain: both container views
// bracket the originals and re-linearise the survivor; the method's own
// view gains a removal; a sibling method is untouched.
inline std::string undoInMiddle(const fs::path& dir) {
    return runScript(dir, {
                              {{"init"}, {}},
                              {{"add-package", "P"}, {}},
                              {{"add-class", "P/A"}, {}},
                              {{"add-method", "P/A>>m", "--source", "-"}, "m\n  ^ 1"},
                              {{"add-method", "P/A>>k", "--source", "-"}, "k\n  ^ 2"},
                              {{"undo", ":3"}, {}},
                              {{"log"}, {}},
                              {{"view", "P"}, {}},
                              {{"view", "P/A"}, {}},
                              {{"view", "P/A>>m"}, {}},
                              {{"view", "P/A>>k"}, {}},
                          });
}

// An off-topic typo fix lands mid-feature; split moves it onto its own
// branch rooted at the last saved version and rebases the feature work.
inline std::string splitTypoFix(const fs::path& dir) {
    return runScript(dir, {
                              {{"init"}, {}},
                              {{"add-package", "P"}, {}},
                              {{"add-class", "P/A"}, {}},
                              {{"add-method", "P/A>>m", "--source", "-"},
                               "m\n  \"retuns the answer\"\n  ^ 42"},
                              {{"save-version", "P", "37"}, {}},
                              {{"add-class", "P/B"}, {}},
                              {{"add-method", "P/B>>x", "--source", "-"}, "x\n  ^ 1"},
                              {{"modify-method", "P/A>>m", "--source", "-"},
                               "m\n  \"returns the answer\"\n  ^ 42"},
                              {{"add-method", "P/B>>y", "--source", "-"}, "y\n  ^ 2"},
                              {{"add-method", "P/B>>z", "--source", "-"}, "z\n  ^ 3"},
                              {{"view", "P"}, {}},
                              {{"split", ":7", "--branch", "typo-fix"}, {}},
                              {{"comment", ":17", "typo fix"}, {}},
                              {{"log"}, {}},
                              {{"view", "P"}, {}},
                          });
}

// Add/remove pairs neutralise themselves; condense rewrites the package
// history down to the net effect.
inline std::string condensePackage(const fs::path& dir) {
    return runScript(dir, {
                              {{"init"}, {}},
                              {{"session", "start"}, {}},
                              {{"add-package", "P"}, {}},
                              {{"add-class", "P/A"}, {}},
                              {{"add-class", "P/B"}, {}},
                              {{"add-class", "P/C"}, {}},
                              {{"remove-class", "P/B"}, {}},
                              {{"view", "P"}, {}},
                              {{"condense", "P"}, {}},
                              {{"log"}, {}},
                              {{"view", "P"}, {}},
                          });
}

// Rename a method; the sender in another package is rewritten as part of
// the same high-level operation.
inline std::string renameWithSender(const fs::path& dir) {
    return runScript(dir, {
                              {{"init"}, {}},
                              {{"session", "start"}, {}},
                              {{"add-package", "P"}, {}},
                              {{"add-class", "P/A"}, {}},
                              {{"add-package", "Q"}, {}},
                              {{"add-class", "Q/B"}, {}},
                              {{"add-method", "P/A>>m", "--source", "-"}, "m\n  ^ 42"},
                              {{"add-method", "Q/B>>k", "--source", "-"}, "k\n  ^ A new m"},
                              {{"rename-method", "P/A>>m", "p"}, {}},
                              {{"log"}, {}},
                              {{"view", "P"}, {}},
                              {{"view", "Q"}, {}},
                              {{"view", "P/A>>m"}, {}},
                              {{"view", "P/A>>p"}, {}},
                          });
}

struct Walkthrough {
    const char* golden;
    std::string (*run)(const fs::path& dir);
};

inline const std::vector<Walkthrough>& all() {
    static const std::vector<Walkthrough> scripts = {
        {"version_undo_add.txt", versionUndoAdd},
        {"across_sessions.txt", acrossSessions},
        {"crash_recovery.txt", crashRecovery},
        {"undo_in_middle.txt", undoInMiddle},
        {"split_typo_fix.txt", splitTypoFix},
        {"condense_package.txt", condensePackage},
        {"rename_with_sender.txt", renameWithSender},
    };
    return scripts;
}

} // namespace walkthroughs

} // namespace omtest
