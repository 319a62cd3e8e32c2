#pragma once

#include <map>
#include <string>
#include <vector>

#include "omlog/model.hpp"

namespace omlog {

// Key for the flat method table. Class names are global (one namespace across
// packages), so a method is identified by class, side and selector.
struct MethodKey {
    std::string className;
    bool classSide = false;
    std::string selector;

    auto operator<=>(const MethodKey&) const = default;

    static MethodKey of(const MethodDef& def) {
        return {def.classRef.className, def.classSide, def.selector};
    }
    static MethodKey of(const CodeUnitRef& ref) {
        return {ref.className, ref.classSide, ref.selector};
    }
};

// The code under management: packages, classes and methods, nothing else.
// A codebase is a pure value; applying an event either yields the next state
// or throws ConflictError without mutating anything observable.
class Codebase {
public:
    bool empty() const { return packages_.empty(); }

    bool hasPackage(const std::string& name) const { return packages_.count(name) > 0; }
    bool hasClass(const std::string& name) const { return classes_.count(name) > 0; }
    bool hasMethod(const MethodKey& key) const { return methods_.count(key) > 0; }
    bool has(const CodeUnitRef& ref) const;

    const PackageDef* findPackage(const std::string& name) const;
    const ClassDef* findClass(const std::string& name) const;
    const MethodDef* findMethod(const MethodKey& key) const;

    std::vector<std::string> packageNames() const;
    std::vector<ClassDef> classesInPackage(const std::string& packageName) const;
    std::vector<MethodDef> methodsOfClass(const std::string& className) const;

    // All methods whose source mentions `selector` as a standalone token,
    // excluding methods that themselves implement that selector. Sorted by
    // formatted unit ref so results are reproducible.
    std::vector<MethodDef> sendersOf(const std::string& selector) const;

    // All methods whose source mentions `className` as a standalone token.
    std::vector<MethodDef> referencesToClass(const std::string& className) const;

    void applyInPlace(const Event& event);

    bool operator==(const Codebase&) const = default;

private:
    std::map<std::string, PackageDef> packages_;
    std::map<std::string, ClassDef> classes_;
    std::map<MethodKey, MethodDef> methods_;
};

// Functional flavour of applyInPlace: returns the successor state.
Codebase applied(const Codebase& base, const Event& event);

// The elementary inverse: add <-> remove with the same definition, modify with
// before/after swapped. Throws NotInvertibleError for composite and system
// events, which have no pointwise inverse.
Event invert(const Event& event);

// True when `source` contains `token` delimited by non-identifier characters
// (or the ends of the string).
bool containsToken(const std::string& source, const std::string& token);

// Replaces every standalone occurrence of `from` with `to`.
std::string replaceToken(const std::string& source, const std::string& from,
                         const std::string& to);

} // namespace omlog
