#include "mrta/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "mrta/error.hpp"

namespace mrta {

namespace {

constexpr char kMagic[4] = {'M', 'R', 'T', 'C'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void put_f32(std::string& out, float v) {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
}

class Reader {
public:
    explicit Reader(std::string data) : data_(std::move(data)) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(
                     static_cast<unsigned char>(data_[at_ + i]))
                 << (8 * i);
        at_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(
                     static_cast<unsigned char>(data_[at_ + i]))
                 << (8 * i);
        at_ += 8;
        return v;
    }

    float f32() { return std::bit_cast<float>(u32()); }

    std::string bytes(std::size_t n) {
        need(n);
        std::string s = data_.substr(at_, n);
        at_ += n;
        return s;
    }

    bool exhausted() const { return at_ == data_.size(); }

private:
    void need(std::size_t n) {
        if (at_ + n > data_.size())
            throw CheckpointError("truncated checkpoint payload");
    }

    std::string data_;
    std::size_t at_ = 0;
};

}  // namespace

void save_checkpoint(const PolicyParams& params, const std::string& config_text,
                     std::uint64_t seed, const std::filesystem::path& path) {
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    put_u64(out, seed);
    put_u32(out, static_cast<std::uint32_t>(config_text.size()));
    out += config_text;

    const auto& manifest = PolicyParams::manifest();
    put_u32(out, static_cast<std::uint32_t>(manifest.size()));
    std::uint64_t payload = 0;
    for (const TensorShape& shape : manifest) {
        const std::string name = shape.name;
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        put_u32(out, static_cast<std::uint32_t>(shape.rows));
        put_u32(out, static_cast<std::uint32_t>(shape.cols));
        payload += static_cast<std::uint64_t>(shape.size());
    }
    put_u64(out, payload);
    for (double w : params.flat()) put_f32(out, static_cast<float>(w));

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw CheckpointError("cannot open " + path.string());
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw CheckpointError("write failed: " + path.string());
}

CheckpointData load_checkpoint(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw CheckpointError("cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(file)),
                     std::istreambuf_iterator<char>());
    Reader in(std::move(data));

    if (in.bytes(4) != std::string(kMagic, 4))
        throw CheckpointError("not a checkpoint file: " + path.string());
    if (in.u32() != kVersion)
        throw CheckpointError("unsupported checkpoint version");

    CheckpointData out;
    out.seed = in.u64();
    out.config_text = in.bytes(in.u32());

    const auto& manifest = PolicyParams::manifest();
    if (in.u32() != manifest.size())
        throw CheckpointError("tensor count mismatch");
    std::uint64_t payload = 0;
    for (const TensorShape& shape : manifest) {
        if (in.bytes(in.u32()) != shape.name)
            throw CheckpointError(std::string("unexpected tensor: want ") +
                                  shape.name);
        const std::uint32_t rows = in.u32();
        const std::uint32_t cols = in.u32();
        if (rows != static_cast<std::uint32_t>(shape.rows) ||
            cols != static_cast<std::uint32_t>(shape.cols))
            throw CheckpointError(std::string("shape mismatch for ") +
                                  shape.name);
        payload += static_cast<std::uint64_t>(shape.size());
    }
    if (in.u64() != payload) throw CheckpointError("payload size mismatch");

    for (double& w : out.params.flat()) w = in.f32();
    if (!in.exhausted())
        throw CheckpointError("trailing bytes after checkpoint payload");
    return out;
}

}  // namespace mrta
