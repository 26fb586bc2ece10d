#include "cncost/mesh_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cncost/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "STL and container readers assume a little-endian host");

namespace cncost {

namespace {

float read_f32(const unsigned char* p) {
    float v;
    std::memcpy(&v, p, 4);
    return v;
}

std::uint32_t read_u32(const unsigned char* p) {
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    return v;
}

TriangleMesh parse_binary(std::span<const unsigned char> bytes) {
    if (bytes.size() < 84) {
        throw TruncatedFile("binary STL shorter than the 84-byte preamble");
    }
    const std::uint32_t count = read_u32(bytes.data() + 80);
    if (count == 0) {
        throw EmptyMesh("binary STL declares zero facets");
    }
    const std::size_t expected = 84 + static_cast<std::size_t>(count) * 50;
    if (bytes.size() < expected) {
        std::ostringstream msg;
        msg << "binary STL declares " << count << " facets ("
            << expected << " bytes) but holds only " << bytes.size();
        throw TruncatedFile(msg.str());
    }

    TriangleMesh mesh;
    mesh.triangles.reserve(count);
    const unsigned char* p = bytes.data() + 84;
    for (std::uint32_t i = 0; i < count; ++i) {
        // 12 bytes of stored normal are skipped; normals are recomputed.
        Triangle t;
        for (int v = 0; v < 3; ++v) {
            const unsigned char* q = p + 12 + 12 * v;
            Vec3 vert{read_f32(q), read_f32(q + 4), read_f32(q + 8)};
            if (!vert.finite()) {
                throw MalformedToken("non-finite vertex coordinate in binary STL");
            }
            (v == 0 ? t.v0 : v == 1 ? t.v1 : t.v2) = vert;
        }
        mesh.triangles.push_back(t);
        p += 50;
    }
    return mesh;
}

class AsciiTokenizer {
public:
    explicit AsciiTokenizer(std::span<const unsigned char> bytes)
        : data_(reinterpret_cast<const char*>(bytes.data())), size_(bytes.size()) {}

    // Next whitespace-delimited token; empty string at end of input.
    std::string next() {
        while (pos_ < size_ && std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
        std::size_t start = pos_;
        while (pos_ < size_ && !std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
        return std::string(data_ + start, pos_ - start);
    }

    std::string rest_of_line() {
        std::size_t start = pos_;
        while (pos_ < size_ && data_[pos_] != '\n') ++pos_;
        std::string s(data_ + start, pos_ - start);
        while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
        std::size_t lead = s.find_first_not_of(" \t");
        return lead == std::string::npos ? std::string() : s.substr(lead);
    }

private:
    const char* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

double parse_number(const std::string& tok) {
    if (tok.empty()) {
        throw MalformedToken("ASCII STL ended where a number was expected");
    }
    std::size_t used = 0;
    double v;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        throw MalformedToken("expected a number in ASCII STL, got '" + tok + "'");
    }
    if (used != tok.size() || !std::isfinite(v)) {
        throw MalformedToken("expected a finite number in ASCII STL, got '" + tok + "'");
    }
    return v;
}

void expect(AsciiTokenizer& tok, const char* word) {
    std::string t = tok.next();
    if (t != word) {
        throw MalformedToken(std::string("expected '") + word + "' in ASCII STL, got '" + t + "'");
    }
}

TriangleMesh parse_ascii(std::span<const unsigned char> bytes) {
    AsciiTokenizer tok(bytes);
    expect(tok, "solid");
    TriangleMesh mesh;
    mesh.name = tok.rest_of_line();

    for (;;) {
        std::string word = tok.next();
        if (word == "endsolid") {
            break;
        }
        if (word != "facet") {
            throw MalformedToken("expected 'facet' or 'endsolid' in ASCII STL, got '" + word + "'");
        }
        expect(tok, "normal");
        for (int i = 0; i < 3; ++i) parse_number(tok.next()); // stored normal, discarded
        expect(tok, "outer");
        expect(tok, "loop");
        Triangle t;
        for (int v = 0; v < 3; ++v) {
            expect(tok, "vertex");
            Vec3 vert;
            for (int i = 0; i < 3; ++i) vert[i] = parse_number(tok.next());
            (v == 0 ? t.v0 : v == 1 ? t.v1 : t.v2) = vert;
        }
        expect(tok, "endloop");
        expect(tok, "endfacet");
        mesh.triangles.push_back(t);
    }
    if (mesh.triangles.empty()) {
        throw EmptyMesh("ASCII STL contains no facets");
    }
    return mesh;
}

bool plausible_binary(std::span<const unsigned char> bytes) {
    if (bytes.size() < 84) return false;
    const std::uint32_t count = read_u32(bytes.data() + 80);
    return count > 0 && bytes.size() >= 84 + static_cast<std::size_t>(count) * 50;
}

} // namespace

TriangleMesh parse_stl(std::span<const unsigned char> bytes) {
    const bool solid_prefix =
        bytes.size() >= 5 && std::memcmp(bytes.data(), "solid", 5) == 0;
    if (solid_prefix) {
        try {
            return parse_ascii(bytes);
        } catch (const MalformedToken&) {
            if (plausible_binary(bytes)) {
                return parse_binary(bytes);
            }
            throw;
        }
    }
    return parse_binary(bytes);
}

TriangleMesh load_stl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoFailure("cannot open STL file: " + path.string());
    }
    std::vector<unsigned char> bytes(
        (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    TriangleMesh mesh = parse_stl(bytes);
    if (mesh.name.empty()) {
        mesh.name = path.stem().string();
    }
    return mesh;
}

std::vector<unsigned char> serialize_stl_binary(const TriangleMesh& mesh) {
    std::vector<unsigned char> out(84 + mesh.size() * 50, 0);
    const char header[] = "binary STL";
    std::memcpy(out.data(), header, sizeof(header) - 1);
    const std::uint32_t count = static_cast<std::uint32_t>(mesh.size());
    std::memcpy(out.data() + 80, &count, 4);

    unsigned char* p = out.data() + 84;
    for (const Triangle& t : mesh.triangles) {
        Vec3 n = t.normal();
        const double len = n.norm();
        if (len > 0.0) n = n / len;
        float f[12] = {
            static_cast<float>(n.x),    static_cast<float>(n.y),    static_cast<float>(n.z),
            static_cast<float>(t.v0.x), static_cast<float>(t.v0.y), static_cast<float>(t.v0.z),
            static_cast<float>(t.v1.x), static_cast<float>(t.v1.y), static_cast<float>(t.v1.z),
            static_cast<float>(t.v2.x), static_cast<float>(t.v2.y), static_cast<float>(t.v2.z),
        };
        std::memcpy(p, f, 48);
        // attribute byte count stays zero
        p += 50;
    }
    return out;
}

void write_stl_binary(const TriangleMesh& mesh, const std::filesystem::path& path) {
    std::vector<unsigned char> bytes = serialize_stl_binary(mesh);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoFailure("cannot open for writing: " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoFailure("short write: " + path.string());
    }
}

double mesh_volume(const TriangleMesh& mesh) {
    if (mesh.empty()) {
        throw EmptyMesh("mesh_volume of an empty mesh");
    }
    double sum = 0.0;
    for (const Triangle& t : mesh.triangles) {
        sum += t.v0.dot(t.v1.cross(t.v2));
    }
    return std::abs(sum) / 6.0;
}

Aabb bounding_box(const TriangleMesh& mesh) {
    if (mesh.empty()) {
        throw EmptyMesh("bounding_box of an empty mesh");
    }
    Aabb box{mesh.triangles[0].v0, mesh.triangles[0].v0};
    for (const Triangle& t : mesh.triangles) {
        box.expand(t.v0);
        box.expand(t.v1);
        box.expand(t.v2);
    }
    return box;
}

} // namespace cncost
