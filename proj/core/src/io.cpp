#include "fdm/io.hpp"

#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace fdm {

namespace {

std::uint64_t bswap64(std::uint64_t x) {
    x = ((x & 0x00000000FFFFFFFFull) << 32) | (x >> 32);
    x = ((x & 0x0000FFFF0000FFFFull) << 16) | ((x >> 16) & 0x0000FFFF0000FFFFull);
    x = ((x & 0x00FF00FF00FF00FFull) << 8) | ((x >> 8) & 0x00FF00FF00FF00FFull);
    return x;
}

std::uint64_t to_le_bits(double d) {
    std::uint64_t u;
    std::memcpy(&u, &d, 8);
    if constexpr (std::endian::native == std::endian::big) u = bswap64(u);
    return u;
}

double from_le_bits(std::uint64_t u) {
    if constexpr (std::endian::native == std::endian::big) u = bswap64(u);
    double d;
    std::memcpy(&d, &u, 8);
    return d;
}

std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Payload bytes in file order: x1 fastest, then x2, then x3.
std::vector<std::uint8_t> payload_bytes(const ScalarField& f) {
    const GridSpec& g = f.grid;
    std::vector<std::uint8_t> bytes;
    bytes.reserve(static_cast<std::size_t>(g.num_points()) * 8);
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                const std::uint64_t u = to_le_bits(f.at(i, j, k));
                for (int b = 0; b < 8; ++b)
                    bytes.push_back(static_cast<std::uint8_t>(u >> (8 * b)));
            }
    return bytes;
}

void payload_to_field(const std::vector<std::uint8_t>& bytes, ScalarField& f) {
    const GridSpec& g = f.grid;
    std::size_t pos = 0;
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                std::uint64_t u = 0;
                for (int b = 0; b < 8; ++b)
                    u |= static_cast<std::uint64_t>(bytes[pos + b]) << (8 * b);
                pos += 8;
                f.at(i, j, k) = from_le_bits(u);
            }
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

void Snapshot::validate() const {
    for (const auto& [name, f] : fields) {
        if (f.grid.n != grid.n)
            throw std::invalid_argument("Snapshot: field '" + name +
                                        "' dims mismatch the snapshot grid");
        if (!all_finite(f.v))
            throw std::invalid_argument("Snapshot: field '" + name +
                                        "' holds non-finite values");
    }
    for (const auto& [name, x] : scalars)
        if (!std::isfinite(x))
            throw std::invalid_argument("Snapshot: scalar '" + name +
                                        "' is non-finite");
}

std::filesystem::path write_snapshot(const Snapshot& snap,
                                     const std::filesystem::path& dir,
                                     const std::string& prefix) {
    snap.validate();
    std::filesystem::create_directories(dir);

    std::ostringstream meta;
    meta << "fdm-snapshot 1\n";
    meta << "step " << snap.step << "\n";
    meta << "time " << fmt_double(snap.time) << "\n";
    meta << "macro_e13 " << fmt_double(snap.macro_e13) << "\n";
    meta << "grid " << snap.grid.n[0] << " " << snap.grid.n[1] << " "
         << snap.grid.n[2] << "\n";
    meta << "spacing " << fmt_double(snap.grid.dx(0)) << " "
         << fmt_double(snap.grid.dx(1)) << " " << fmt_double(snap.grid.dx(2))
         << "\n";

    for (const auto& [name, f] : snap.fields) {
        const auto bytes = payload_bytes(f);
        const std::uint64_t sum = fnv1a64(bytes.data(), bytes.size());
        const std::string fname = prefix + "." + name + ".f64";
        std::ofstream out(dir / fname, std::ios::binary);
        if (!out) throw std::runtime_error("write_snapshot: cannot open " + fname);
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("write_snapshot: write failed " + fname);
        char sumhex[32];
        std::snprintf(sumhex, sizeof sumhex, "%016" PRIx64, sum);
        meta << "field " << name << " " << fname << " " << f.v.size() << " "
             << sumhex << "\n";
    }
    for (const auto& [name, x] : snap.scalars)
        meta << "scalar " << name << " " << fmt_double(x) << "\n";
    meta << "end\n";

    const std::filesystem::path meta_path = dir / (prefix + ".meta");
    std::ofstream out(meta_path);
    if (!out) throw std::runtime_error("write_snapshot: cannot open meta file");
    out << meta.str();
    if (!out) throw std::runtime_error("write_snapshot: meta write failed");
    return meta_path;
}

Snapshot read_snapshot(const std::filesystem::path& meta_path) {
    std::ifstream in(meta_path);
    if (!in)
        throw std::runtime_error("read_snapshot: cannot open " + meta_path.string());
    const std::filesystem::path dir = meta_path.parent_path();

    Snapshot snap;
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    bool have_grid = false, have_end = false;
    struct FieldRef {
        std::string name, file;
        std::size_t count;
        std::uint64_t sum;
    };
    std::vector<FieldRef> refs;

    std::string line;
    if (!std::getline(in, line) || line != "fdm-snapshot 1")
        throw std::runtime_error("read_snapshot: bad magic line");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "step") {
            ls >> snap.step;
        } else if (key == "time") {
            ls >> snap.time;
        } else if (key == "macro_e13") {
            ls >> snap.macro_e13;
        } else if (key == "grid") {
            int a, b, c;
            ls >> a >> b >> c;
            if (!ls) throw std::runtime_error("read_snapshot: bad grid line");
            snap.grid.n = {a, b, c};
            have_grid = true;
        } else if (key == "spacing") {
            ls >> spacing[0] >> spacing[1] >> spacing[2];
        } else if (key == "field") {
            FieldRef r;
            std::string sumhex;
            ls >> r.name >> r.file >> r.count >> sumhex;
            if (!ls) throw std::runtime_error("read_snapshot: bad field line");
            r.sum = std::stoull(sumhex, nullptr, 16);
            refs.push_back(std::move(r));
        } else if (key == "scalar") {
            std::string name;
            double x;
            ls >> name >> x;
            if (!ls) throw std::runtime_error("read_snapshot: bad scalar line");
            snap.scalars.emplace_back(name, x);
        } else if (key == "end") {
            have_end = true;
            break;
        } else {
            throw std::runtime_error("read_snapshot: unknown key '" + key + "'");
        }
    }
    if (!have_grid || !have_end)
        throw std::runtime_error("read_snapshot: truncated metadata");
    for (int a = 0; a < 3; ++a) snap.grid.length[a] = spacing[a] * snap.grid.n[a];
    snap.grid.validate();

    for (const auto& r : refs) {
        if (r.count != static_cast<std::size_t>(snap.grid.num_points()))
            throw std::runtime_error("read_snapshot: field '" + r.name +
                                     "' count does not match the grid dims");
        std::ifstream fin(dir / r.file, std::ios::binary);
        if (!fin)
            throw std::runtime_error("read_snapshot: cannot open payload " + r.file);
        std::vector<std::uint8_t> bytes(r.count * 8);
        fin.read(reinterpret_cast<char*>(bytes.data()),
                 static_cast<std::streamsize>(bytes.size()));
        if (fin.gcount() != static_cast<std::streamsize>(bytes.size()))
            throw std::runtime_error("read_snapshot: short payload " + r.file);
        fin.peek();
        if (!fin.eof())
            throw std::runtime_error("read_snapshot: trailing bytes in " + r.file);
        const std::uint64_t sum = fnv1a64(bytes.data(), bytes.size());
        if (sum != r.sum)
            throw std::runtime_error("read_snapshot: checksum mismatch in " + r.file);
        ScalarField f(snap.grid);
        payload_to_field(bytes, f);
        snap.fields.emplace_back(r.name, std::move(f));
    }
    return snap;
}

std::vector<std::uint8_t> render_alpha_map(const ScalarField& f, double scale) {
    const GridSpec& g = f.grid;
    if (g.n[2] != 1)
        throw std::invalid_argument("render_alpha_map: expected a 2D field");
    if (!(scale > 0.0))
        throw std::invalid_argument("render_alpha_map: scale > 0 required");
    std::vector<std::uint8_t> px(static_cast<std::size_t>(g.n[0]) * g.n[1]);
    for (int j = 0; j < g.n[1]; ++j) {
        const int row = g.n[1] - 1 - j;  // x2 grows upward in the image
        for (int i = 0; i < g.n[0]; ++i) {
            double t = f.at(i, j) / scale;
            t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
            px[static_cast<std::size_t>(row) * g.n[0] + i] =
                static_cast<std::uint8_t>(std::lround(t * 255.0));
        }
    }
    return px;
}

void write_pgm(const ScalarField& f, double scale, const std::filesystem::path& path) {
    const auto px = render_alpha_map(f, scale);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_pgm: cannot open " + path.string());
    out << "P5\n" << f.grid.n[0] << " " << f.grid.n[1] << "\n255\n";
    out.write(reinterpret_cast<const char*>(px.data()),
              static_cast<std::streamsize>(px.size()));
    if (!out) throw std::runtime_error("write_pgm: write failed");
}

SeriesWriter::SeriesWriter(const std::filesystem::path& path) : out_(path) {
    if (!out_)
        throw std::runtime_error("SeriesWriter: cannot open " + path.string());
    out_ << "step,t,eps13,sigma13_mean,alpha_max,alpha_int,dissipation\n";
}

void SeriesWriter::append(const SeriesRow& row) {
    out_ << row.step << ',' << fmt_double(row.time) << ','
         << fmt_double(row.macro_e13) << ',' << fmt_double(row.mean_sigma13) << ','
         << fmt_double(row.alpha_max) << ',' << fmt_double(row.alpha_integral) << ','
         << fmt_double(row.dissipation) << '\n';
}

void SeriesWriter::flush() { out_.flush(); }

}  // namespace fdm
