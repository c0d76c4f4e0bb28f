#include "nsv/snapshot.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nsv {

namespace {

constexpr char magic[4] = {'N', 'S', 'V', 'S'};
// magic, version, mode, size, L, nu, alpha, t, seed, crc
constexpr std::size_t header_size = 4 + 4 + 4 + 4 + 8 * 4 + 8 + 4;
constexpr std::size_t crc_offset = header_size - 4;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
public:
    Reader(const std::string& bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

    std::uint64_t uint(int width) {
        if (pos_ + width > bytes_.size()) throw SnapshotChecksumError("snapshot is truncated");
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += width;
        return v;
    }
    std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
    std::uint64_t u64() { return uint(8); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::size_t pos() const { return pos_; }

private:
    const std::string& bytes_;
    std::size_t pos_;
};

std::uint32_t crc_of(const std::string& bytes) {
    // Header without the checksum field, then the payload.
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(crc_offset));
    const std::size_t rest = bytes.size() - header_size;
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + header_size), static_cast<uInt>(rest));
    return static_cast<std::uint32_t>(crc);
}

template <typename F>
void for_each_stored_mode(int n, F&& f) {
    for (int kx = -n / 2 + 1; kx <= n / 2; ++kx) {
        for (int ky = -n / 2 + 1; ky <= n / 2; ++ky) {
            for (int kz = 0; kz <= n / 2; ++kz) f(kx, ky, kz);
        }
    }
}

}  // namespace

SnapshotVersionError::SnapshotVersionError(std::uint32_t found, std::uint32_t expected)
    : SnapshotFormatError("snapshot version " + std::to_string(found) + " is not supported (expected " +
                          std::to_string(expected) + ")"),
      found_(found) {}

int Snapshot::size() const {
    if (mode == Mode::Shell) return static_cast<int>(shell.size());
    return velocity.empty() ? 0 : velocity.lattice().resolution();
}

std::string encode_snapshot(const Snapshot& s) {
    if (s.mode == Mode::Spectral3d && s.velocity.empty()) throw UsageError("3D snapshot without a velocity field");
    std::string out(magic, 4);
    put_u32(out, snapshot_version);
    put_u32(out, s.mode == Mode::Spectral3d ? 0u : 1u);
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    put_f64(out, s.box_length);
    put_f64(out, s.nu);
    put_f64(out, s.alpha);
    put_f64(out, s.time);
    put_u64(out, s.seed);
    put_u32(out, 0);  // checksum placeholder
    if (s.mode == Mode::Spectral3d) {
        const auto& lat = s.velocity.lattice();
        for_each_stored_mode(lat.resolution(), [&](int kx, int ky, int kz) {
            const auto v = s.velocity.at(lat.index(kx, ky, kz));
            for (const auto& c : v) {
                put_f64(out, c.real());
                put_f64(out, c.imag());
            }
        });
    } else {
        for (const auto& c : s.shell) {
            put_f64(out, c.real());
            put_f64(out, c.imag());
        }
    }
    const std::uint32_t crc = crc_of(out);
    for (int i = 0; i < 4; ++i) out[crc_offset + i] = static_cast<char>((crc >> (8 * i)) & 0xff);
    return out;
}

Snapshot decode_snapshot(const std::string& bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), magic, 4) != 0) {
        throw SnapshotMagicError("not a snapshot file (bad magic)");
    }
    Reader r(bytes, 4);
    const std::uint32_t version = r.u32();
    if (version != snapshot_version) throw SnapshotVersionError(version, snapshot_version);
    if (bytes.size() < header_size) throw SnapshotChecksumError("snapshot is truncated");

    Snapshot s;
    const std::uint32_t tag = r.u32();
    const std::uint32_t size = r.u32();
    s.box_length = r.f64();
    s.nu = r.f64();
    s.alpha = r.f64();
    s.time = r.f64();
    s.seed = r.u64();
    const std::uint32_t stored_crc = r.u32();

    if (tag > 1) throw SnapshotFormatError("unknown snapshot mode tag " + std::to_string(tag));
    s.mode = tag == 0 ? Mode::Spectral3d : Mode::Shell;
    std::size_t values = 0;
    if (s.mode == Mode::Spectral3d) {
        if (size < 4 || size % 2 != 0 || size > 4096) throw SnapshotFormatError("bad 3D resolution in snapshot");
        values = std::size_t(size) * size * (size / 2 + 1) * 3;
    } else {
        if (size > (1u << 20)) throw SnapshotFormatError("bad shell count in snapshot");
        values = size;
    }
    if (bytes.size() != header_size + values * 16 || crc_of(bytes) != stored_crc) {
        throw SnapshotChecksumError("snapshot checksum mismatch (corrupt or truncated file)");
    }

    if (s.mode == Mode::Spectral3d) {
        s.velocity = SpectralField(make_lattice(static_cast<int>(size), s.box_length));
        const auto& lat = s.velocity.lattice();
        for_each_stored_mode(static_cast<int>(size), [&](int kx, int ky, int kz) {
            Vec3c v;
            for (auto& c : v) {
                const double re = r.f64();
                c = {re, r.f64()};
            }
            s.velocity.set(lat.index(kx, ky, kz), v);
        });
    } else {
        s.shell.resize(size);
        for (auto& c : s.shell) {
            const double re = r.f64();
            c = {re, r.f64()};
        }
    }
    return s;
}

void write_snapshot(const std::string& path, const Snapshot& s) {
    const std::string bytes = encode_snapshot(s);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing '" + path + "'");
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return decode_snapshot(ss.str());
}

}  // namespace nsv
