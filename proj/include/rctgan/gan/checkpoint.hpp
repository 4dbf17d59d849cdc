#pragma once
// Checkpoint container. Byte layout (all integers little-endian):
//
//   magic   "RCTG" (4 bytes)
//   u32     format version (1)
//   u64     rng seed
//   u32     schema text length, then UTF-8 schema descriptor
//   u32     config text length, then UTF-8 key=value config
//   u32     block count
//   blocks: u32 name length, name bytes, u32 rows, u32 cols,
//           rows*cols f64 values (IEEE-754, little-endian), row-major
//
// Files are written to a temp path and renamed, so a killed run never leaves
// a truncated checkpoint that loads.

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rctgan/errors.hpp"
#include "rctgan/grad/tensor.hpp"

namespace rctgan {

struct Checkpoint {
    uint32_t version = 1;
    uint64_t seed = 0;
    std::string schema_text;
    std::string config_text;
    std::vector<std::pair<std::string, Tensor2>> blocks;
};

namespace ckpt_detail {

inline void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_f64(std::string& out, double d) {
    uint64_t bits;
    static_assert(sizeof bits == sizeof d);
    std::memcpy(&bits, &d, 8);
    put_u64(out, bits);
}

struct Reader {
    const std::string& buf;
    size_t pos = 0;
    explicit Reader(const std::string& b) : buf(b) {}
    void need(size_t n) const {
        if (pos + n > buf.size()) throw DataError("checkpoint: truncated file");
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() {
        const uint64_t bits = u64();
        double d;
        std::memcpy(&d, &bits, 8);
        return d;
    }
    std::string bytes(size_t n) {
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

}  // namespace ckpt_detail

inline std::string checkpoint_to_bytes(const Checkpoint& c) {
    using namespace ckpt_detail;
    std::string out;
    out += "RCTG";
    put_u32(out, c.version);
    put_u64(out, c.seed);
    put_u32(out, static_cast<uint32_t>(c.schema_text.size()));
    out += c.schema_text;
    put_u32(out, static_cast<uint32_t>(c.config_text.size()));
    out += c.config_text;
    put_u32(out, static_cast<uint32_t>(c.blocks.size()));
    for (const auto& [name, t] : c.blocks) {
        put_u32(out, static_cast<uint32_t>(name.size()));
        out += name;
        put_u32(out, static_cast<uint32_t>(t.rows()));
        put_u32(out, static_cast<uint32_t>(t.cols()));
        for (int i = 0; i < t.rows(); ++i)
            for (int j = 0; j < t.cols(); ++j) put_f64(out, t(i, j));
    }
    return out;
}

inline Checkpoint checkpoint_from_bytes(const std::string& bytes) {
    using namespace ckpt_detail;
    Reader r(bytes);
    if (r.bytes(4) != "RCTG") throw DataError("bad checkpoint magic");
    Checkpoint c;
    c.version = r.u32();
    if (c.version != 1)
        throw DataError("unsupported checkpoint version " + std::to_string(c.version));
    c.seed = r.u64();
    c.schema_text = r.bytes(r.u32());
    c.config_text = r.bytes(r.u32());
    const uint32_t nblocks = r.u32();
    c.blocks.reserve(nblocks);
    for (uint32_t b = 0; b < nblocks; ++b) {
        std::string name = r.bytes(r.u32());
        const uint32_t rows = r.u32();
        const uint32_t cols = r.u32();
        Tensor2 t(static_cast<int>(rows), static_cast<int>(cols));
        for (uint32_t i = 0; i < rows; ++i)
            for (uint32_t j = 0; j < cols; ++j)
                t(static_cast<int>(i), static_cast<int>(j)) = r.f64();
        c.blocks.emplace_back(std::move(name), std::move(t));
    }
    return c;
}

// Atomic write: temp file in the target directory, then rename.
inline void write_file_atomic(const std::string& path, const std::string& bytes) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("rename to '" + path + "' failed: " + ec.message());
}

inline void save_checkpoint(const Checkpoint& c, const std::string& path) {
    write_file_atomic(path, checkpoint_to_bytes(c));
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return checkpoint_from_bytes(bytes);
}

}  // namespace rctgan
