// io.hpp -- run directories, deterministic CSV emission, manifests with
// per-output checksums.
#pragma once

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "latticelab/errors.hpp"
#include "latticelab/rng.hpp"

namespace latticelab {

// Shortest round-trip representation; deterministic across runs and thread
// counts for identical doubles.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

    CsvWriter& row(const std::vector<std::string>& fields) {
        if (fields.size() != header_.size()) throw Error("csv row arity mismatch");
        rows_.push_back(fields);
        return *this;
    }

    std::string render() const {
        std::ostringstream out;
        join(out, header_);
        for (const auto& r : rows_) join(out, r);
        return out.str();
    }

  private:
    static void join(std::ostringstream& out, const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out << ',';
            out << fields[i];
        }
        out << '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

inline std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << bytes;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Collects outputs for one run directory and finalizes the manifest with
// checksums of everything emitted.
class RunDirectory {
  public:
    explicit RunDirectory(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
        started_ = utc_timestamp();
    }

    const std::filesystem::path& path() const { return dir_; }

    void emit(const std::string& name, const std::string& bytes) {
        write_file(dir_ / name, bytes);
        checksums_[name] = fnv1a64_hex(bytes);
    }

    void finalize(const nlohmann::json& config_echo, const std::string& summary, bool pass) {
        nlohmann::json manifest;
        manifest["tool"] = "latticelab";
        manifest["version"] = "0.1.0";
        manifest["config"] = config_echo;
        manifest["started_utc"] = started_;
        manifest["finished_utc"] = utc_timestamp();
        manifest["summary"] = summary;
        manifest["pass"] = pass;
        manifest["outputs"] = checksums_;
        write_file(dir_ / "manifest.json", manifest.dump(2) + "\n");
    }

  private:
    std::filesystem::path dir_;
    std::string started_;
    nlohmann::json checksums_ = nlohmann::json::object();
};

// Loads a manifest and re-hashes every listed output.
inline nlohmann::json load_verified_manifest(const std::filesystem::path& run_dir) {
    const auto manifest_path = run_dir / "manifest.json";
    if (!std::filesystem::exists(manifest_path)) throw ManifestCorrupt("missing manifest: " + manifest_path.string());
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_file(manifest_path));
    } catch (const std::exception& e) {
        throw ManifestCorrupt(std::string("unparseable manifest: ") + e.what());
    }
    if (!manifest.contains("outputs")) throw ManifestCorrupt("manifest lists no outputs");
    for (const auto& [name, sum] : manifest.at("outputs").items()) {
        const auto file = run_dir / name;
        if (!std::filesystem::exists(file)) throw ManifestCorrupt("missing output " + name);
        if (fnv1a64_hex(read_file(file)) != sum.get<std::string>())
            throw ManifestCorrupt("checksum mismatch for " + name);
    }
    return manifest;
}

} // namespace latticelab
