#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace contagion::cli {

// %.17g, with inf and nan spelled out.
std::string format_double(double x);

// Indented JSON with every float printed by format_double; non-finite floats become null.
std::string dump_json(const nlohmann::json& value);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    CsvWriter& cell(double x);
    CsvWriter& cell(std::int64_t x);
    CsvWriter& cell(std::uint64_t x);
    CsvWriter& cell(int x) { return cell(static_cast<std::int64_t>(x)); }
    CsvWriter& cell(const std::string& s);
    void end_row();
    void close();

private:
    void sep();
    std::filesystem::path path_;
    std::ofstream out_;
    bool first_ = true;
};

std::string sha256_hex(const std::filesystem::path& path);

// Output directory that remembers every file written through it and closes
// with a manifest listing sizes and SHA-256 digests.
class OutputTree {
public:
    explicit OutputTree(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path path(const std::string& relative);
    CsvWriter csv(const std::string& relative, const std::vector<std::string>& header);
    void json_file(const std::string& relative, const nlohmann::json& value);
    void write_manifest(const nlohmann::json& header);
    std::size_t file_count() const { return files_.size(); }

private:
    std::filesystem::path root_;
    std::vector<std::string> files_;
};

}  // namespace contagion::cli
