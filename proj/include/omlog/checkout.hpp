#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "omlog/codebase.hpp"

namespace omlog {

// On-disk projection of a package:
//
//   <pkg>/package.json                      {"name": "<pkg>"}
//   <pkg>/<Class>.class                     class definition as JSON
//   <pkg>/<Class>/instance/<selector>.st    protocol line, blank line, source
//   <pkg>/<Class>/class/<selector>.st       same, for class-side methods
//
// The same byte-for-byte layout is frozen into version archives, so rendering
// is factored out as a path->content list.

using FileList = std::vector<std::pair<std::string, std::string>>; // relpath -> bytes

// Renders one package of the codebase, paths relative to the package
// directory and sorted.
FileList renderPackage(const Codebase& codebase, const std::string& packageName);

// Parses a rendered package back into the events that build it: the package,
// then its classes, then its methods, each in a directly applicable order.
std::vector<Event> eventsFromFiles(const std::string& packageName, const FileList& files);

// Rewrites the checkout under `root` to match `codebase`. Only package
// directories (those carrying package.json) are touched; the log and version
// files next to them are left alone.
void writeCheckout(const Codebase& codebase, const std::filesystem::path& root);

// Reads every package directory under `root` back into a codebase.
Codebase loadCheckout(const std::filesystem::path& root);

// A frozen copy of one package at one label, stored as <pkg>-<label>.version.
struct VersionArchive {
    std::string packageName;
    std::string label;
    FileList files;
};

VersionArchive makeVersionArchive(const Codebase& codebase, const std::string& packageName,
                                  const std::string& label);

void writeVersionArchive(const VersionArchive& archive, const std::filesystem::path& file);

VersionArchive readVersionArchive(const std::filesystem::path& file);

// The add-events that reproduce the archived package in an empty workspace.
std::vector<Event> versionEvents(const VersionArchive& archive);

} // namespace omlog
