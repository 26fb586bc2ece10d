#include "cncost/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <limits>

#include "cncost/errors.hpp"

namespace cncost::nn {

namespace {

constexpr char kMagic[4] = {'N', 'N', 'C', 'K'};

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T take(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw TruncatedFile("unexpected end of checkpoint data");
    return v;
}

} // namespace

void save_checkpoint(const NamedTensors& tensors, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoFailure("cannot open checkpoint for writing: " + path.string());
    os.write(kMagic, 4);
    put<std::uint32_t>(os, 1);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, tensor] : tensors) {
        if (name.size() > std::numeric_limits<std::uint16_t>::max())
            throw MalformedToken("tensor name too long: " + name);
        if (tensor.shape.size() > std::numeric_limits<std::uint8_t>::max())
            throw ShapeMismatch("tensor rank too large: " + name);
        put<std::uint16_t>(os, static_cast<std::uint16_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put<std::uint8_t>(os, static_cast<std::uint8_t>(tensor.shape.size()));
        for (std::size_t d : tensor.shape) put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
        os.write(reinterpret_cast<const char*>(tensor.data.data()),
                 static_cast<std::streamsize>(tensor.data.size() * sizeof(double)));
    }
    if (!os) throw IoFailure("checkpoint write failed: " + path.string());
}

NamedTensors load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoFailure("cannot open checkpoint for reading: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw MalformedToken("not an NNCK checkpoint: " + path.string());
    const auto version = take<std::uint32_t>(is);
    if (version != 1) throw MalformedToken("unsupported checkpoint version");

    const auto count = take<std::uint32_t>(is);
    NamedTensors tensors;
    tensors.reserve(count);
    for (std::uint32_t n = 0; n < count; ++n) {
        const auto name_len = take<std::uint16_t>(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        if (!is) throw TruncatedFile("checkpoint tensor name is truncated");
        const auto rank = take<std::uint8_t>(is);
        std::vector<std::size_t> shape(rank);
        std::size_t numel = 1;
        for (auto& d : shape) {
            d = take<std::uint32_t>(is);
            if (d == 0) throw ShapeMismatch("checkpoint tensor has a zero dimension");
            numel *= d;
        }
        std::vector<double> data(numel);
        is.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(numel * sizeof(double)));
        if (!is) throw TruncatedFile("checkpoint tensor data is truncated");
        tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
    }
    return tensors;
}

} // namespace cncost::nn
