#include "omlog/checkout.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "omlog/errors.hpp"

namespace omlog {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string methodFileBody(const MethodDef& def) {
    return def.protocol + "\n\n" + def.source;
}

void parseMethodFile(const std::string& body, std::string& protocol, std::string& source) {
    auto eol = body.find('\n');
    if (eol == std::string::npos || eol + 1 >= body.size() || body[eol + 1] != '\n') {
        throw ParseError("method file needs a protocol line followed by a blank line");
    }
    protocol = body.substr(0, eol);
    source = body.substr(eol + 2);
}

std::string readFile(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LogError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void writeFile(const fs::path& path, const std::string& bytes) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw LogError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw LogError("short write to " + path.string());
}

} // namespace

FileList renderPackage(const Codebase& codebase, const std::string& packageName) {
    FileList files;
    files.emplace_back("package.json", json{{"name", packageName}}.dump(2) + "\n");
    for (const auto& cls : codebase.classesInPackage(packageName)) {
        files.emplace_back(cls.name + ".class", json(cls).dump(2) + "\n");
        for (const auto& method : codebase.methodsOfClass(cls.name)) {
            std::string side = method.classSide ? "class" : "instance";
            files.emplace_back(cls.name + "/" + side + "/" + method.selector + ".st",
                               methodFileBody(method));
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<Event> eventsFromFiles(const std::string& packageName, const FileList& files) {
    std::vector<ClassDef> classes;
    std::vector<MethodDef> methods;
    bool sawManifest = false;

    for (const auto& [relpath, bytes] : files) {
        if (relpath == "package.json") {
            auto j = json::parse(bytes);
            if (j.at("name").get<std::string>() != packageName) {
                throw ParseError("package manifest names '" + j.at("name").get<std::string>() +
                                 "', expected '" + packageName + "'");
            }
            sawManifest = true;
        } else if (relpath.size() > 6 && relpath.ends_with(".class") &&
                   relpath.find('/') == std::string::npos) {
            classes.push_back(json::parse(bytes).get<ClassDef>());
        } else if (relpath.ends_with(".st")) {
            auto first = relpath.find('/');
            auto second = relpath.find('/', first + 1);
            if (first == std::string::npos || second == std::string::npos) {
                throw ParseError("unexpected method path '" + relpath + "'");
            }
            std::string className = relpath.substr(0, first);
            std::string side = relpath.substr(first + 1, second - first - 1);
            if (side != "instance" && side != "class") {
                throw ParseError("unexpected method side '" + side + "' in '" + relpath + "'");
            }
            MethodDef def;
            def.classRef = CodeUnitRef::cls(packageName, className);
            def.classSide = side == "class";
            def.selector = relpath.substr(second + 1, relpath.size() - second - 1 - 3);
            parseMethodFile(bytes, def.protocol, def.source);
            methods.push_back(std::move(def));
        } else {
            throw ParseError("unexpected file '" + relpath + "' in package " + packageName);
        }
    }
    if (!sawManifest) throw ParseError("package " + packageName + " has no package.json");

    std::sort(classes.begin(), classes.end(),
              [](const ClassDef& a, const ClassDef& b) { return a.name < b.name; });
    std::sort(methods.begin(), methods.end(), [](const MethodDef& a, const MethodDef& b) {
        return formatUnitRef(a.ref()) < formatUnitRef(b.ref());
    });

    std::vector<Event> events;
    events.push_back(PackageAdded{PackageDef{packageName}});
    for (auto& cls : classes) events.push_back(ClassAdded{std::move(cls)});
    for (auto& m : methods) events.push_back(MethodAdded{std::move(m)});
    return events;
}

void writeCheckout(const Codebase& codebase, const fs::path& root) {
    fs::create_directories(root);
    // Drop every previous package directory, then re-render from scratch.
    for (const auto& dirent : fs::directory_iterator(root)) {
        if (dirent.is_directory() && fs::exists(dirent.path() / "package.json")) {
            fs::remove_all(dirent.path());
        }
    }
    for (const auto& packageName : codebase.packageNames()) {
        for (const auto& [relpath, bytes] : renderPackage(codebase, packageName)) {
            writeFile(root / packageName / relpath, bytes);
        }
    }
}

Codebase loadCheckout(const fs::path& root) {
    Codebase codebase;
    std::vector<std::string> packageNames;
    if (fs::exists(root)) {
        for (const auto& dirent : fs::directory_iterator(root)) {
            if (dirent.is_directory() && fs::exists(dirent.path() / "package.json")) {
                packageNames.push_back(dirent.path().filename().string());
            }
        }
    }
    std::sort(packageNames.begin(), packageNames.end());
    for (const auto& packageName : packageNames) {
        FileList files;
        fs::path pkgDir = root / packageName;
        for (const auto& dirent : fs::recursive_directory_iterator(pkgDir)) {
            if (!dirent.is_regular_file()) continue;
            files.emplace_back(fs::relative(dirent.path(), pkgDir).generic_string(),
                               readFile(dirent.path()));
        }
        std::sort(files.begin(), files.end());
        for (const auto& event : eventsFromFiles(packageName, files)) {
            codebase.applyInPlace(event);
        }
    }
    return codebase;
}

VersionArchive makeVersionArchive(const Codebase& codebase, const std::string& packageName,
                                  const std::string& label) {
    return VersionArchive{packageName, label, renderPackage(codebase, packageName)};
}

void writeVersionArchive(const VersionArchive& archive, const fs::path& file) {
    std::ostringstream out;
    out << "omlog-version 1\n";
    out << "package: " << archive.packageName << "\n";
    out << "label: " << archive.label << "\n";
    for (const auto& [relpath, bytes] : archive.files) {
        out << "=== " << relpath << " " << bytes.size() << "\n" << bytes << "\n";
    }
    writeFile(file, out.str());
}

VersionArchive readVersionArchive(const fs::path& file) {
    std::string text = readFile(file);
    std::size_t pos = 0;
    auto nextLine = [&]() -> std::string {
        auto eol = text.find('\n', pos);
        if (eol == std::string::npos) throw ParseError("truncated version archive " + file.string());
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        return line;
    };

    if (nextLine() != "omlog-version 1") {
        throw ParseError(file.string() + " is not a version archive");
    }
    VersionArchive archive;
    std::string pkgLine = nextLine();
    std::string labelLine = nextLine();
    if (!pkgLine.starts_with("package: ") || !labelLine.starts_with("label: ")) {
        throw ParseError("malformed version archive header in " + file.string());
    }
    archive.packageName = pkgLine.substr(9);
    archive.label = labelLine.substr(7);

    while (pos < text.size()) {
        std::string header = nextLine();
        if (!header.starts_with("=== ")) {
            throw ParseError("malformed section header in " + file.string());
        }
        auto sizeAt = header.rfind(' ');
        std::string relpath = header.substr(4, sizeAt - 4);
        std::size_t size = std::stoull(header.substr(sizeAt + 1));
        if (pos + size + 1 > text.size()) {
            throw ParseError("section for " + relpath + " overruns " + file.string());
        }
        archive.files.emplace_back(relpath, text.substr(pos, size));
        pos += size;
        if (text[pos] != '\n') {
            throw ParseError("section for " + relpath + " is not newline-terminated");
        }
        ++pos;
    }
    return archive;
}

std::vector<Event> versionEvents(const VersionArchive& archive) {
    return eventsFromFiles(archive.packageName, archive.files);
}

} // namespace omlog
