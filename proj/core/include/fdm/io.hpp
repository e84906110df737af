#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "fdm/coupled.hpp"
#include "fdm/grid.hpp"

namespace fdm {

std::uint64_t fnv1a64(const void* data, std::size_t len);

/// State of a run at one step: named 2D field payloads plus summary scalars.
struct Snapshot {
    long step = 0;
    double time = 0.0;
    double macro_e13 = 0.0;
    GridSpec grid;
    std::vector<std::pair<std::string, ScalarField>> fields;
    std::vector<std::pair<std::string, double>> scalars;

    void validate() const;
};

/// Serializes each field as a flat little-endian f64 array in row-major
/// (x1 fastest) order, one file per field, plus a plain-text metadata header
/// `<prefix>.meta` with grid dims, spacing, time, strain and checksums.
/// Returns the meta file path. Round-trips bit-exactly.
std::filesystem::path write_snapshot(const Snapshot& snap,
                                     const std::filesystem::path& dir,
                                     const std::string& prefix);

Snapshot read_snapshot(const std::filesystem::path& meta_path);

/// Linear grayscale rendering: [0, scale] -> [0, 255], clamped. Pixels are
/// returned row-major with row 0 at the top (largest x2).
std::vector<std::uint8_t> render_alpha_map(const ScalarField& f, double scale);

/// Binary PGM (P5) image of render_alpha_map.
void write_pgm(const ScalarField& f, double scale, const std::filesystem::path& path);

/// Fixed-column time series:
/// step,t,eps13,sigma13_mean,alpha_max,alpha_int,dissipation
class SeriesWriter {
  public:
    explicit SeriesWriter(const std::filesystem::path& path);
    void append(const SeriesRow& row);
    void flush();

  private:
    std::ofstream out_;
};

}  // namespace fdm
