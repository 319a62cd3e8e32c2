#include "omlog/codebase.hpp"

#include <algorithm>
#include <cctype>

#include "omlog/errors.hpp"

namespace omlog {

namespace {

bool identChar(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

} // namespace

bool containsToken(const std::string& source, const std::string& token) {
    if (token.empty()) return false;
    std::size_t pos = 0;
    while ((pos = source.find(token, pos)) != std::string::npos) {
        bool leftOk = pos == 0 || !identChar(source[pos - 1]);
        std::size_t end = pos + token.size();
        bool rightOk = end == source.size() || !identChar(source[end]);
        if (leftOk && rightOk) return true;
        pos += 1;
    }
    return false;
}

std::string replaceToken(const std::string& source, const std::string& from,
                         const std::string& to) {
    if (from.empty()) return source;
    std::string out;
    out.reserve(source.size());
    std::size_t pos = 0;
    while (pos < source.size()) {
        std::size_t hit = source.find(from, pos);
        if (hit == std::string::npos) {
            out.append(source, pos, std::string::npos);
            break;
        }
        bool leftOk = hit == 0 || !identChar(source[hit - 1]);
        std::size_t end = hit + from.size();
        bool rightOk = end == source.size() || !identChar(source[end]);
        out.append(source, pos, hit - pos);
        if (leftOk && rightOk) {
            out += to;
        } else {
            out.append(source, hit, from.size());
        }
        pos = end;
    }
    return out;
}

bool Codebase::has(const CodeUnitRef& ref) const {
    switch (ref.kind) {
    case UnitKind::Package: return hasPackage(ref.packageName);
    case UnitKind::Class: return hasClass(ref.className);
    case UnitKind::Method: return hasMethod(MethodKey::of(ref));
    }
    return false;
}

const PackageDef* Codebase::findPackage(const std::string& name) const {
    auto it = packages_.find(name);
    return it == packages_.end() ? nullptr : &it->second;
}

const ClassDef* Codebase::findClass(const std::string& name) const {
    auto it = classes_.find(name);
    return it == classes_.end() ? nullptr : &it->second;
}

const MethodDef* Codebase::findMethod(const MethodKey& key) const {
    auto it = methods_.find(key);
    return it == methods_.end() ? nullptr : &it->second;
}

std::vector<std::string> Codebase::packageNames() const {
    std::vector<std::string> out;
    out.reserve(packages_.size());
    for (const auto& [name, def] : packages_) out.push_back(name);
    return out;
}

std::vector<ClassDef> Codebase::classesInPackage(const std::string& packageName) const {
    std::vector<ClassDef> out;
    for (const auto& [name, def] : classes_) {
        if (def.packageName == packageName) out.push_back(def);
    }
    return out;
}

std::vector<MethodDef> Codebase::methodsOfClass(const std::string& className) const {
    std::vector<MethodDef> out;
    for (const auto& [key, def] : methods_) {
        if (key.className == className) out.push_back(def);
    }
    return out;
}

std::vector<MethodDef> Codebase::sendersOf(const std::string& selector) const {
    std::vector<MethodDef> out;
    for (const auto& [key, def] : methods_) {
        if (key.selector == selector) continue;
        if (containsToken(def.source, selector)) out.push_back(def);
    }
    std::sort(out.begin(), out.end(), [](const MethodDef& a, const MethodDef& b) {
        return formatUnitRef(a.ref()) < formatUnitRef(b.ref());
    });
    return out;
}

std::vector<MethodDef> Codebase::referencesToClass(const std::string& className) const {
    std::vector<MethodDef> out;
    for (const auto& [key, def] : methods_) {
        if (containsToken(def.source, className)) out.push_back(def);
    }
    std::sort(out.begin(), out.end(), [](const MethodDef& a, const MethodDef& b) {
        return formatUnitRef(a.ref()) < formatUnitRef(b.ref());
    });
    return out;
}

void Codebase::applyInPlace(const Event& event) {
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, PackageAdded>) {
                if (hasPackage(e.def.name))
                    throw ConflictError(ConflictError::Kind::AlreadyExists, formatUnitRef(e.def.ref()));
                packages_[e.def.name] = e.def;
            } else if constexpr (std::is_same_v<T, PackageRemoved>) {
                auto it = packages_.find(e.def.name);
                if (it == packages_.end())
                    throw ConflictError(ConflictError::Kind::Missing, formatUnitRef(e.def.ref()));
                if (it->second != e.def)
                    throw ConflictError(ConflictError::Kind::StaleBefore, formatUnitRef(e.def.ref()));
                for (const auto& [name, cls] : classes_) {
                    if (cls.packageName == e.def.name)
                        throw ConflictError(ConflictError::Kind::NotEmpty, formatUnitRef(e.def.ref()),
                                            "still holds class " + name);
                }
                packages_.erase(it);
            } else if constexpr (std::is_same_v<T, ClassAdded>) {
                if (!hasPackage(e.def.packageName))
                    throw ConflictError(ConflictError::Kind::Missing, e.def.packageName,
                                        "package for class " + e.def.name);
                if (hasClass(e.def.name))
                    throw ConflictError(ConflictError::Kind::AlreadyExists, formatUnitRef(e.def.ref()));
                classes_[e.def.name] = e.def;
            } else if constexpr (std::is_same_v<T, ClassRemoved>) {
                auto it = classes_.find(e.def.name);
                if (it == classes_.end())
                    throw ConflictError(ConflictError::Kind::Missing, formatUnitRef(e.def.ref()));
                if (it->second != e.def)
                    throw ConflictError(ConflictError::Kind::StaleBefore, formatUnitRef(e.def.ref()));
                for (const auto& [key, m] : methods_) {
                    if (key.className == e.def.name)
                        throw ConflictError(ConflictError::Kind::NotEmpty, formatUnitRef(e.def.ref()),
                                            "still holds " + formatUnitRef(m.ref()));
                }
                classes_.erase(it);
            } else if constexpr (std::is_same_v<T, ClassModified>) {
                auto it = classes_.find(e.before.name);
                if (it == classes_.end())
                    throw ConflictError(ConflictError::Kind::Missing, formatUnitRef(e.before.ref()));
                if (it->second != e.before)
                    throw ConflictError(ConflictError::Kind::StaleBefore, formatUnitRef(e.before.ref()));
                if (!hasPackage(e.after.packageName))
                    throw ConflictError(ConflictError::Kind::Missing, e.after.packageName,
                                        "package for class " + e.after.name);
                if (e.after.name != e.before.name) {
                    if (hasClass(e.after.name))
                        throw ConflictError(ConflictError::Kind::AlreadyExists,
                                            formatUnitRef(e.after.ref()));
                    classes_.erase(it);
                    classes_[e.after.name] = e.after;
                    // Re-key the methods that live under the renamed class.
                    std::map<MethodKey, MethodDef> rekeyed;
                    for (auto& [key, def] : methods_) {
                        if (key.className == e.before.name) {
                            MethodKey moved = key;
                            moved.className = e.after.name;
                            MethodDef movedDef = def;
                            movedDef.classRef =
                                CodeUnitRef::cls(e.after.packageName, e.after.name);
                            rekeyed[moved] = std::move(movedDef);
                        } else {
                            rekeyed[key] = def;
                        }
                    }
                    methods_ = std::move(rekeyed);
                } else {
                    it->second = e.after;
                }
            } else if constexpr (std::is_same_v<T, MethodAdded>) {
                if (!hasClass(e.def.classRef.className))
                    throw ConflictError(ConflictError::Kind::Missing, e.def.classRef.className,
                                        "class for " + formatUnitRef(e.def.ref()));
                MethodKey key = MethodKey::of(e.def);
                if (hasMethod(key))
                    throw ConflictError(ConflictError::Kind::AlreadyExists, formatUnitRef(e.def.ref()));
                methods_[key] = e.def;
            } else if constexpr (std::is_same_v<T, MethodRemoved>) {
                MethodKey key = MethodKey::of(e.def);
                auto it = methods_.find(key);
                if (it == methods_.end())
                    throw ConflictError(ConflictError::Kind::Missing, formatUnitRef(e.def.ref()));
                if (it->second != e.def)
                    throw ConflictError(ConflictError::Kind::StaleBefore, formatUnitRef(e.def.ref()));
                methods_.erase(it);
            } else if constexpr (std::is_same_v<T, MethodModified>) {
                MethodKey key = MethodKey::of(e.before);
                auto it = methods_.find(key);
                if (it == methods_.end())
                    throw ConflictError(ConflictError::Kind::Missing, formatUnitRef(e.before.ref()));
                if (it->second != e.before)
                    throw ConflictError(ConflictError::Kind::StaleBefore, formatUnitRef(e.before.ref()));
                MethodKey afterKey = MethodKey::of(e.after);
                if (afterKey != key) {
                    if (hasMethod(afterKey))
                        throw ConflictError(ConflictError::Kind::AlreadyExists,
                                            formatUnitRef(e.after.ref()));
                    if (!hasClass(e.after.classRef.className))
                        throw ConflictError(ConflictError::Kind::Missing, e.after.classRef.className,
                                            "class for " + formatUnitRef(e.after.ref()));
                    methods_.erase(it);
                    methods_[afterKey] = e.after;
                } else {
                    it->second = e.after;
                }
            } else {
                // Composite and system events carry no direct code delta.
            }
        },
        event);
}

Codebase applied(const Codebase& base, const Event& event) {
    Codebase next = base;
    next.applyInPlace(event);
    return next;
}

Event invert(const Event& event) {
    return std::visit(
        [](const auto& e) -> Event {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, PackageAdded>) return PackageRemoved{e.def};
            else if constexpr (std::is_same_v<T, PackageRemoved>) return PackageAdded{e.def};
            else if constexpr (std::is_same_v<T, ClassAdded>) return ClassRemoved{e.def};
            else if constexpr (std::is_same_v<T, ClassRemoved>) return ClassAdded{e.def};
            else if constexpr (std::is_same_v<T, ClassModified>) return ClassModified{e.after, e.before};
            else if constexpr (std::is_same_v<T, MethodAdded>) return MethodRemoved{e.def};
            else if constexpr (std::is_same_v<T, MethodRemoved>) return MethodAdded{e.def};
            else if constexpr (std::is_same_v<T, MethodModified>) return MethodModified{e.after, e.before};
            else throw NotInvertibleError("cannot invert a non-elementary event");
        },
        event);
}

} // namespace omlog
