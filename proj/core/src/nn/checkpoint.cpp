#include "comets/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include <cstdio>

#include "comets/error.hpp"
#include "comets/io.hpp"

namespace comets::nn {
namespace {

constexpr const char* kConfigEntry = "__config__";

void put_le(std::string& out, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
public:
    explicit Reader(const std::string& b) : bytes_(b) {}
    std::uint64_t le(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    std::string take(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool at_end() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw CheckpointError("checkpoint is truncated");
    }
    const std::string& bytes_;
    std::size_t pos_ = 0;
};

struct Entry {
    Shape shape;
    std::string dtype;
    std::string payload;
};

struct Decoded {
    std::vector<std::string> order;
    std::map<std::string, Entry> entries;
};

Decoded decode(const std::string& bytes) {
    Reader r(bytes);
    if (r.take(8) != std::string(kCheckpointMagic, 8)) throw CheckpointError("not a checkpoint (bad magic)");
    const auto version = r.le(4);
    if (version != kCheckpointVersion) {
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto manifest_len = r.le(8);
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(r.take(manifest_len));
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("corrupt checkpoint manifest: ") + e.what());
    }
    Decoded d;
    try {
        for (const auto& item : manifest) {
            Entry e;
            e.shape = item.at("shape").get<Shape>();
            e.dtype = item.at("dtype").get<std::string>();
            std::size_t width = 0;
            if (e.dtype == "f64") width = 8;
            else if (e.dtype == "u8") width = 1;
            else throw CheckpointError("unsupported dtype " + e.dtype);
            e.payload = r.take(numel(e.shape) * width);
            const auto name = item.at("name").get<std::string>();
            if (d.entries.count(name)) throw CheckpointError("duplicate checkpoint entry " + name);
            d.order.push_back(name);
            d.entries.emplace(name, std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("corrupt checkpoint manifest: ") + e.what());
    }
    if (!r.at_end()) throw CheckpointError("trailing bytes after checkpoint payload");
    return d;
}

nlohmann::json config_of(const Decoded& d) {
    const auto it = d.entries.find(kConfigEntry);
    if (it == d.entries.end()) return nlohmann::json::object();
    try {
        return nlohmann::json::parse(it->second.payload);
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("corrupt checkpoint config: ") + e.what());
    }
}

void read_doubles(const std::string& payload, std::vector<double>& out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(payload[i * 8 + b])) << (8 * b);
        out[i] = std::bit_cast<double>(bits);
    }
}

void fill(const Decoded& d, const std::string& name, const Shape& shape, std::vector<double>& out) {
    const auto it = d.entries.find(name);
    if (it == d.entries.end()) throw CheckpointError("checkpoint has no entry " + name);
    if (it->second.dtype != "f64") throw CheckpointError("entry " + name + " has dtype " + it->second.dtype);
    if (it->second.shape != shape) {
        throw CheckpointError("shape mismatch for " + name + ": checkpoint " + shape_str(it->second.shape) +
                              ", model " + shape_str(shape));
    }
    read_doubles(it->second.payload, out);
}

}  // namespace

std::string encode_checkpoint(const StateList& state, const nlohmann::json& config) {
    nlohmann::json manifest = nlohmann::json::array();
    std::string payload;
    auto add = [&](const std::string& name, const Shape& shape, const std::vector<double>& data) {
        manifest.push_back({{"name", name}, {"shape", shape}, {"dtype", "f64"}});
        for (double x : data) put_le(payload, std::bit_cast<std::uint64_t>(x), 8);
    };
    for (const auto& p : state.params) add(p.name, p.var->shape(), p.var->value().storage());
    for (const auto& b : state.buffers) add(b.name, {b.data->size()}, *b.data);
    const std::string cfg = config.dump();
    manifest.push_back({{"name", kConfigEntry}, {"shape", Shape{cfg.size()}}, {"dtype", "u8"}});
    payload += cfg;

    const std::string man = manifest.dump();
    std::string out(kCheckpointMagic, 8);
    put_le(out, kCheckpointVersion, 4);
    put_le(out, man.size(), 8);
    out += man;
    out += payload;
    return out;
}

nlohmann::json decode_checkpoint_config(const std::string& bytes) { return config_of(decode(bytes)); }

nlohmann::json decode_checkpoint(const std::string& bytes, StateList& state) {
    const Decoded d = decode(bytes);
    std::size_t expected = 0;
    for (auto& p : state.params) {
        std::vector<double> data(p.var->size());
        fill(d, p.name, p.var->shape(), data);
        p.var->mutable_value().storage() = std::move(data);
        ++expected;
    }
    for (auto& b : state.buffers) {
        std::vector<double> data(b.data->size());
        fill(d, b.name, {b.data->size()}, data);
        *b.data = std::move(data);
        ++expected;
    }
    if (d.entries.size() - d.entries.count(kConfigEntry) != expected) {
        throw CheckpointError("checkpoint holds entries the model does not have");
    }
    return config_of(d);
}

void save_checkpoint(const std::filesystem::path& path, const StateList& state, const nlohmann::json& config) {
    write_file_atomic(path, encode_checkpoint(state, config));
}

namespace {
std::string read_checkpoint_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}
}  // namespace

nlohmann::json load_checkpoint(const std::filesystem::path& path, StateList& state) {
    return decode_checkpoint(read_checkpoint_bytes(path), state);
}

nlohmann::json load_checkpoint_config(const std::filesystem::path& path) {
    return decode_checkpoint_config(read_checkpoint_bytes(path));
}

std::string checksum_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace comets::nn
