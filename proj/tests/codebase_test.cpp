#include "doctest.h"

#include <random>

#include "omlog/codebase.hpp"
#include "support.hpp"

using namespace omlog;
using omtest::classDef;
using omtest::methodDef;

namespace {

Codebase smallCodebase() {
    Codebase cb;
    cb.applyInPlace(PackageAdded{{"P"}});
    cb.applyInPlace(ClassAdded{classDef("P", "A")});
    cb.applyInPlace(MethodAdded{methodDef("P", "A", "size", "size\n  ^ items size")});
    return cb;
}

} // namespace

TEST_CASE("token containment respects identifier boundaries") {
    CHECK(containsToken("^ self size", "size"));
    CHECK(containsToken("size", "size"));
    CHECK(containsToken("(size)", "size"));
    CHECK(containsToken("a size.", "size"));
    CHECK_FALSE(containsToken("^ self sizeTwice", "size"));
    CHECK_FALSE(containsToken("resize", "size"));
    CHECK_FALSE(containsToken("summit", "m"));
    CHECK_FALSE(containsToken("size_", "size"));
    CHECK_FALSE(containsToken("", "size"));
    CHECK_FALSE(containsToken("size", ""));
}

TEST_CASE("token replacement rewrites only standalone occurrences") {
    CHECK(replaceToken("^ self size", "size", "tally") == "^ self tally");
    CHECK(replaceToken("size + size", "size", "tally") == "tally + tally");
    CHECK(replaceToken("resize sizeTwice size", "size", "tally") == "resize sizeTwice tally");
    CHECK(replaceToken("no match here", "size", "tally") == "no match here");
    CHECK(replaceToken("", "size", "tally") == "");
    // Replacement results are not re-scanned.
    CHECK(replaceToken("a a", "a", "a a") == "a a a a");
}

TEST_CASE("adding and finding units") {
    Codebase cb = smallCodebase();
    CHECK(cb.hasPackage("P"));
    CHECK(cb.hasClass("A"));
    CHECK(cb.hasMethod({"A", false, "size"}));
    CHECK(cb.has(parseUnitRef("P")));
    CHECK(cb.has(parseUnitRef("P/A")));
    CHECK(cb.has(parseUnitRef("P/A>>size")));
    CHECK_FALSE(cb.has(parseUnitRef("P/A class>>size")));
    CHECK_FALSE(cb.has(parseUnitRef("Q")));
    REQUIRE(cb.findMethod({"A", false, "size"}) != nullptr);
    CHECK(cb.findMethod({"A", false, "size"})->source == "size\n  ^ items size");
}

TEST_CASE("duplicate adds are conflicts") {
    Codebase cb = smallCodebase();
    auto checkKind = [](const auto& op, ConflictError::Kind kind) {
        try {
            op();
            FAIL_CHECK("expected a conflict");
        } catch (const ConflictError& e) {
            CHECK(e.kind() == kind);
        }
    };
    checkKind([&] { cb.applyInPlace(PackageAdded{{"P"}}); },
              ConflictError::Kind::AlreadyExists);
    checkKind([&] { cb.applyInPlace(ClassAdded{classDef("P", "A")}); },
              ConflictError::Kind::AlreadyExists);
    checkKind([&] {
        cb.applyInPlace(MethodAdded{methodDef("P", "A", "size", "size\n  ^ 1")});
    }, ConflictError::Kind::AlreadyExists);
}

TEST_CASE("adding into a missing container is a conflict") {
    Codebase cb;
    CHECK_THROWS_AS(cb.applyInPlace(ClassAdded{classDef("P", "A")}), ConflictError);
    cb.applyInPlace(PackageAdded{{"P"}});
    CHECK_THROWS_AS(cb.applyInPlace(MethodAdded{methodDef("P", "A", "m", "m\n  ^ 1")}),
                    ConflictError);
}

TEST_CASE("class-side methods do not collide with instance-side ones") {
    Codebase cb = smallCodebase();
    cb.applyInPlace(MethodAdded{methodDef("P", "A", "size", "size\n  ^ 42", true)});
    CHECK(cb.hasMethod({"A", false, "size"}));
    CHECK(cb.hasMethod({"A", true, "size"}));
}

TEST_CASE("removal checks the carried definition") {
    Codebase cb = smallCodebase();
    MethodDef stale = methodDef("P", "A", "size", "size\n  ^ something else");
    try {
        cb.applyInPlace(MethodRemoved{stale});
        FAIL_CHECK("expected a conflict");
    } catch (const ConflictError& e) {
        CHECK(e.kind() == ConflictError::Kind::StaleBefore);
    }
    cb.applyInPlace(MethodRemoved{methodDef("P", "A", "size", "size\n  ^ items size")});
    CHECK_FALSE(cb.hasMethod({"A", false, "size"}));
}

TEST_CASE("removing a non-empty container is refused") {
    Codebase cb = smallCodebase();
    try {
        cb.applyInPlace(ClassRemoved{classDef("P", "A")});
        FAIL_CHECK("expected a conflict");
    } catch (const ConflictError& e) {
        CHECK(e.kind() == ConflictError::Kind::NotEmpty);
        CHECK(std::string(e.what()).find("A>>size") != std::string::npos);
    }
    try {
        cb.applyInPlace(PackageRemoved{{"P"}});
        FAIL_CHECK("expected a conflict");
    } catch (const ConflictError& e) {
        CHECK(e.kind() == ConflictError::Kind::NotEmpty);
    }
}

TEST_CASE("modification requires the exact before-state") {
    Codebase cb = smallCodebase();
    MethodDef actual = *cb.findMethod({"A", false, "size"});
    MethodDef wrong = actual;
    wrong.source = "size\n  ^ 0";
    MethodDef target = actual;
    target.source = "size\n  ^ items count";

    CHECK_THROWS_AS(cb.applyInPlace(MethodModified{wrong, target}), ConflictError);
    cb.applyInPlace(MethodModified{actual, target});
    CHECK(cb.findMethod({"A", false, "size"})->source == "size\n  ^ items count");
}

TEST_CASE("modifying a method's selector moves it") {
    Codebase cb = smallCodebase();
    MethodDef before = *cb.findMethod({"A", false, "size"});
    MethodDef after = before;
    after.selector = "tally";
    after.source = "tally\n  ^ items size";
    cb.applyInPlace(MethodModified{before, after});
    CHECK_FALSE(cb.hasMethod({"A", false, "size"}));
    CHECK(cb.hasMethod({"A", false, "tally"}));
}

TEST_CASE("renaming a class re-keys its methods") {
    Codebase cb = smallCodebase();
    ClassDef before = *cb.findClass("A");
    ClassDef after = before;
    after.name = "A2";
    cb.applyInPlace(ClassModified{before, after});

    CHECK_FALSE(cb.hasClass("A"));
    CHECK(cb.hasClass("A2"));
    CHECK_FALSE(cb.hasMethod({"A", false, "size"}));
    REQUIRE(cb.hasMethod({"A2", false, "size"}));
    CHECK(cb.findMethod({"A2", false, "size"})->classRef == CodeUnitRef::cls("P", "A2"));
}

TEST_CASE("renaming onto an existing class is refused") {
    Codebase cb = smallCodebase();
    cb.applyInPlace(ClassAdded{classDef("P", "B")});
    ClassDef before = *cb.findClass("A");
    ClassDef after = before;
    after.name = "B";
    try {
        cb.applyInPlace(ClassModified{before, after});
        FAIL_CHECK("expected a conflict");
    } catch (const ConflictError& e) {
        CHECK(e.kind() == ConflictError::Kind::AlreadyExists);
    }
    CHECK(cb.hasClass("A")); // nothing half-applied
}

TEST_CASE("a failed apply leaves the codebase unchanged") {
    Codebase cb = smallCodebase();
    Codebase untouched = cb;
    CHECK_THROWS(cb.applyInPlace(PackageAdded{{"P"}}));
    CHECK_THROWS(cb.applyInPlace(ClassRemoved{classDef("P", "A")}));
    CHECK_THROWS(cb.applyInPlace(MethodModified{methodDef("P", "A", "size", "wrong"),
                                                methodDef("P", "A", "size", "s")}));
    CHECK(cb == untouched);
}

TEST_CASE("senders are found by token, excluding implementers, sorted") {
    Codebase cb;
    cb.applyInPlace(PackageAdded{{"P"}});
    cb.applyInPlace(PackageAdded{{"Q"}});
    cb.applyInPlace(ClassAdded{classDef("P", "A")});
    cb.applyInPlace(ClassAdded{classDef("Q", "B")});
    cb.applyInPlace(MethodAdded{methodDef("P", "A", "size", "size\n  ^ items size")});
    cb.applyInPlace(MethodAdded{methodDef("P", "A", "sizeTwice", "sizeTwice\n  ^ self size * 2")});
    cb.applyInPlace(MethodAdded{methodDef("Q", "B", "use", "use\n  ^ thing size")});
    cb.applyInPlace(MethodAdded{methodDef("Q", "B", "other", "other\n  ^ supersize")});

    auto senders = cb.sendersOf("size");
    REQUIRE(senders.size() == 2);
    CHECK(formatUnitRef(senders[0].ref()) == "P/A>>sizeTwice");
    CHECK(formatUnitRef(senders[1].ref()) == "Q/B>>use");
}

TEST_CASE("references to a class include its own implementers") {
    Codebase cb;
    cb.applyInPlace(PackageAdded{{"P"}});
    cb.applyInPlace(ClassAdded{classDef("P", "A")});
    cb.applyInPlace(ClassAdded{classDef("P", "B")});
    cb.applyInPlace(MethodAdded{methodDef("P", "B", "make", "make\n  ^ A new")});
    cb.applyInPlace(MethodAdded{methodDef("P", "A", "self", "self\n  ^ A name")});

    auto refs = cb.referencesToClass("A");
    REQUIRE(refs.size() == 2);
    CHECK(formatUnitRef(refs[0].ref()) == "P/A>>self");
    CHECK(formatUnitRef(refs[1].ref()) == "P/B>>make");
}

TEST_CASE("invert swaps adds and removes and flips modifies") {
    MethodDef def = methodDef("P", "A", "m", "m\n  ^ 1");
    CHECK(eventKind(invert(MethodAdded{def})) == "MethodRemoved");
    CHECK(eventKind(invert(MethodRemoved{def})) == "MethodAdded");
    CHECK(eventKind(invert(PackageAdded{{"P"}})) == "PackageRemoved");
    CHECK(eventKind(invert(ClassRemoved{classDef("P", "A")})) == "ClassAdded");

    MethodDef v2 = def;
    v2.source = "m\n  ^ 2";
    Event back = invert(MethodModified{def, v2});
    const auto& mm = std::get<MethodModified>(back);
    CHECK(mm.before == v2);
    CHECK(mm.after == def);
}

TEST_CASE("composite and system events have no pointwise inverse") {
    CHECK_THROWS_AS(invert(Event{RenameMethod{CodeUnitRef::method("P", "A", "m"), "p"}}),
                    NotInvertibleError);
    CHECK_THROWS_AS(invert(Event{SessionStart{"s1"}}), NotInvertibleError);
    CHECK_THROWS_AS(invert(Event{Undo{{"main", 1}}}), NotInvertibleError);
}

TEST_CASE("applying an event then its inverse restores the state") {
    for (unsigned seed = 0; seed < 150; ++seed) {
        CAPTURE(seed);
        std::mt19937 rng(seed);
        Codebase state = omtest::randomCodebase(rng);
        Event event = omtest::randomApplicableEvent(rng, state);
        CAPTURE(eventKind(event));
        Codebase after = applied(state, event);
        Codebase restored = applied(after, invert(event));
        CHECK(restored == state);
    }
}

TEST_CASE("system events apply as no-ops") {
    Codebase cb = smallCodebase();
    Codebase before = cb;
    cb.applyInPlace(SessionStart{"s1"});
    cb.applyInPlace(Undo{{"main", 2}});
    cb.applyInPlace(Condense{CodeUnitRef::package("P")});
    cb.applyInPlace(RenameMethod{CodeUnitRef::method("P", "A", "size"), "tally"});
    CHECK(cb == before);
}
