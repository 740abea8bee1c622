#include "contagion_cli/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>

#include "contagion/errors.hpp"

namespace contagion::cli {

namespace fs = std::filesystem;

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header) : path_(path), out_(path) {
    if (!out_) throw IoError("cannot write " + path.string());
    for (const auto& h : header) cell(h);
    end_row();
}

void CsvWriter::sep() {
    if (!first_) out_ << ',';
    first_ = false;
}

CsvWriter& CsvWriter::cell(double x) {
    sep();
    out_ << format_double(x);
    return *this;
}

CsvWriter& CsvWriter::cell(std::int64_t x) {
    sep();
    out_ << x;
    return *this;
}

CsvWriter& CsvWriter::cell(std::uint64_t x) {
    sep();
    out_ << x;
    return *this;
}

CsvWriter& CsvWriter::cell(const std::string& s) {
    sep();
    if (s.find_first_of(",\"\n") == std::string::npos) {
        out_ << s;
    } else {
        out_ << '"';
        for (char c : s) out_ << (c == '"' ? "\"\"" : std::string(1, c));
        out_ << '"';
    }
    return *this;
}

void CsvWriter::end_row() {
    out_ << '\n';
    first_ = true;
}

void CsvWriter::close() {
    out_.close();
    if (!out_) throw IoError("failed writing " + path_.string());
}

std::string sha256_hex(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw IoError("SHA-256 unavailable");
    }
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char byte[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(byte, sizeof byte, "%02x", digest[i]);
        hex += byte;
    }
    return hex;
}

OutputTree::OutputTree(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec || !fs::is_directory(root_)) throw IoError("cannot create output directory " + root_.string());
}

fs::path OutputTree::path(const std::string& relative) {
    const fs::path p = root_ / relative;
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + p.parent_path().string());
    if (std::find(files_.begin(), files_.end(), relative) == files_.end()) files_.push_back(relative);
    return p;
}

CsvWriter OutputTree::csv(const std::string& relative, const std::vector<std::string>& header) {
    return CsvWriter(path(relative), header);
}

namespace {

void dump_into(std::string& out, const nlohmann::json& v, int indent) {
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close(static_cast<std::size_t>(indent), ' ');
    switch (v.type()) {
        case nlohmann::json::value_t::number_float: {
            const double x = v.get<double>();
            out += std::isfinite(x) ? format_double(x) : "null";
            return;
        }
        case nlohmann::json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                out += pad;
                dump_into(out, v[i], indent + 2);
                out += i + 1 < v.size() ? ",\n" : "\n";
            }
            out += close + "]";
            return;
        }
        case nlohmann::json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            std::size_t i = 0;
            for (auto it = v.begin(); it != v.end(); ++it, ++i) {
                out += pad + nlohmann::json(it.key()).dump() + ": ";
                dump_into(out, it.value(), indent + 2);
                out += i + 1 < v.size() ? ",\n" : "\n";
            }
            out += close + "}";
            return;
        }
        default:
            out += v.dump();
    }
}

}  // namespace

std::string dump_json(const nlohmann::json& value) {
    std::string out;
    dump_into(out, value, 0);
    return out;
}

void OutputTree::json_file(const std::string& relative, const nlohmann::json& value) {
    const fs::path p = path(relative);
    std::ofstream out(p);
    out << dump_json(value) << '\n';
    out.close();
    if (!out) throw IoError("failed writing " + p.string());
}

void OutputTree::write_manifest(const nlohmann::json& header) {
    nlohmann::json manifest = header;
    nlohmann::json files = nlohmann::json::array();
    std::vector<std::string> sorted = files_;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& rel : sorted) {
        const fs::path p = root_ / rel;
        files.push_back({{"path", rel}, {"bytes", static_cast<std::uint64_t>(fs::file_size(p))}, {"sha256", sha256_hex(p)}});
    }
    manifest["files"] = files;
    const fs::path p = root_ / "manifest.json";
    std::ofstream out(p);
    out << dump_json(manifest) << '\n';
    out.close();
    if (!out) throw IoError("failed writing " + p.string());
}

}  // namespace contagion::cli
