#pragma once

#include <stdexcept>
#include <string>

namespace omlog {

// Base of every domain error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A code change could not be applied to the codebase.
class ConflictError : public Error {
public:
    enum class Kind {
        AlreadyExists,  // Added, but the unit is present
        Missing,        // Removed/Modified, but the unit (or its container) is absent
        StaleBefore,    // current state differs from the carried before/def snapshot
        NotEmpty,       // Removed on a package/class that still has members
    };

    ConflictError(Kind kind, std::string unit, const std::string& detail = "");

    Kind kind() const { return kind_; }
    const std::string& unit() const { return unit_; }
    const char* kindName() const;

private:
    Kind kind_;
    std::string unit_;
};

// parseUnitRef / parseEntryId / record decoding rejected the input text.
class ParseError : public Error {
public:
    using Error::Error;
};

// invert() on a composite or system event.
class NotInvertibleError : public Error {
public:
    using Error::Error;
};

// undo() precondition failure: the target's effect is no longer live.
class NotUndoableError : public Error {
public:
    using Error::Error;
};

// An EntryId that does not resolve in the log at hand.
class UnknownEntryError : public Error {
public:
    using Error::Error;
};

// Storage-level failure: unreadable file, lock contention, version
// mismatch, corruption in a non-final record, failed flush.
class LogError : public Error {
public:
    using Error::Error;
};

} // namespace omlog
