#include "io/checkpoint.hpp"

#include <cstdint>
#include <cstdio>
#include <memory>

#include "common/error.hpp"

namespace advkit::io {

namespace {

constexpr char kMagic[8] = {'A', 'D', 'V', 'K', 'I', 'T', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

void write_bytes(std::FILE* f, const void* p, std::size_t n) {
    require(std::fwrite(p, 1, n, f) == n, ErrorCode::io, "short write");
}
void read_bytes(std::FILE* f, void* p, std::size_t n) {
    require(std::fread(p, 1, n, f) == n, ErrorCode::io, "truncated checkpoint");
}
void write_u32(std::FILE* f, std::uint32_t v) { write_bytes(f, &v, 4); }
std::uint32_t read_u32(std::FILE* f) {
    std::uint32_t v;
    read_bytes(f, &v, 4);
    return v;
}
void write_str(std::FILE* f, const std::string& s) {
    write_u32(f, static_cast<std::uint32_t>(s.size()));
    write_bytes(f, s.data(), s.size());
}
std::string read_str(std::FILE* f) {
    const std::uint32_t n = read_u32(f);
    require(n <= (1u << 20), ErrorCode::io, "unreasonable string length in checkpoint");
    std::string s(n, '\0');
    read_bytes(f, s.data(), n);
    return s;
}

}  // namespace

const std::string& Checkpoint::meta_at(const std::string& key) const {
    auto it = meta.find(key);
    require(it != meta.end(), ErrorCode::io, "checkpoint missing metadata key '" + key + "'");
    return it->second;
}
int Checkpoint::meta_int(const std::string& key) const { return std::stoi(meta_at(key)); }
double Checkpoint::meta_double(const std::string& key) const { return std::stod(meta_at(key)); }

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    File f(std::fopen(path.c_str(), "wb"));
    require(f != nullptr, ErrorCode::io, "cannot open for write: " + path);
    write_bytes(f.get(), kMagic, 8);
    write_u32(f.get(), kVersion);
    write_u32(f.get(), static_cast<std::uint32_t>(ckpt.meta.size()));
    for (const auto& [k, v] : ckpt.meta) {
        write_str(f.get(), k);
        write_str(f.get(), v);
    }
    write_u32(f.get(), static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& [name, t] : ckpt.tensors) {
        write_str(f.get(), name);
        write_u32(f.get(), static_cast<std::uint32_t>(t.rank()));
        for (int d : t.shape) write_u32(f.get(), static_cast<std::uint32_t>(d));
        write_bytes(f.get(), t.data.data(), t.data.size() * sizeof(float));
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    File f(std::fopen(path.c_str(), "rb"));
    require(f != nullptr, ErrorCode::io, "cannot open checkpoint: " + path);
    char magic[8];
    read_bytes(f.get(), magic, 8);
    require(std::memcmp(magic, kMagic, 8) == 0, ErrorCode::io, "not a checkpoint file: " + path);
    require(read_u32(f.get()) == kVersion, ErrorCode::io, "unsupported checkpoint version");
    Checkpoint ckpt;
    const std::uint32_t n_meta = read_u32(f.get());
    for (std::uint32_t i = 0; i < n_meta; ++i) {
        std::string k = read_str(f.get());
        ckpt.meta[k] = read_str(f.get());
    }
    const std::uint32_t n_tensors = read_u32(f.get());
    for (std::uint32_t i = 0; i < n_tensors; ++i) {
        std::string name = read_str(f.get());
        const std::uint32_t rank = read_u32(f.get());
        require(rank >= 1 && rank <= 4, ErrorCode::io, "bad tensor rank in checkpoint");
        std::vector<int> shape(rank);
        for (auto& d : shape) d = static_cast<int>(read_u32(f.get()));
        nn::TensorF t(shape);
        read_bytes(f.get(), t.data.data(), t.data.size() * sizeof(float));
        ckpt.tensors.emplace(std::move(name), std::move(t));
    }
    return ckpt;
}

void store_params(Checkpoint& ckpt, const std::vector<nn::Param<float>*>& params) {
    for (const auto* p : params) {
        require(!p->name.empty(), ErrorCode::internal, "unnamed parameter");
        require(ckpt.tensors.emplace(p->name, p->value).second, ErrorCode::internal,
                "duplicate parameter name: " + p->name);
    }
}

void load_params(const Checkpoint& ckpt, const std::vector<nn::Param<float>*>& params) {
    for (auto* p : params) {
        auto it = ckpt.tensors.find(p->name);
        require(it != ckpt.tensors.end(), ErrorCode::io, "checkpoint missing tensor '" + p->name + "'");
        require(it->second.shape == p->value.shape, ErrorCode::io, "shape mismatch for tensor '" + p->name + "'");
        p->value = it->second;
    }
}

}  // namespace advkit::io
