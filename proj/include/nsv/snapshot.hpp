#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "nsv/errors.hpp"
#include "nsv/spectral_field.hpp"
#include "nsv/sweep.hpp"

namespace nsv {

/// State plus the parameters needed to interpret it.
struct Snapshot {
    Mode mode = Mode::Shell;
    double box_length = 0.0;  ///< L for 3D, k0 for the shell model
    double nu = 0.0;
    double alpha = 0.0;
    double time = 0.0;
    std::uint64_t seed = 0;
    SpectralField velocity;                 ///< 3D only
    std::vector<std::complex<double>> shell;  ///< shell only

    /// N for 3D, M for shells.
    int size() const;
};

class SnapshotFormatError : public IoError {
public:
    using IoError::IoError;
};
class SnapshotMagicError : public SnapshotFormatError {
public:
    using SnapshotFormatError::SnapshotFormatError;
};
class SnapshotVersionError : public SnapshotFormatError {
public:
    SnapshotVersionError(std::uint32_t found, std::uint32_t expected);
    std::uint32_t found() const { return found_; }

private:
    std::uint32_t found_;
};
/// Payload does not match its checksum, or the file is truncated.
class SnapshotChecksumError : public SnapshotFormatError {
public:
    using SnapshotFormatError::SnapshotFormatError;
};

inline constexpr std::uint32_t snapshot_version = 1;

std::string encode_snapshot(const Snapshot& s);
Snapshot decode_snapshot(const std::string& bytes);

void write_snapshot(const std::string& path, const Snapshot& s);
Snapshot read_snapshot(const std::string& path);

}  // namespace nsv
