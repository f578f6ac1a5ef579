#include "fpps/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "fpps/error.hpp"

namespace fpps::io {

namespace {

namespace fs = std::filesystem;

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

float load_le_float(const unsigned char* p) {
    std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                         (static_cast<std::uint32_t>(p[2]) << 16) |
                         (static_cast<std::uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(bits);
}

void store_le_float(float v, unsigned char* p) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    p[0] = static_cast<unsigned char>(bits);
    p[1] = static_cast<unsigned char>(bits >> 8);
    p[2] = static_cast<unsigned char>(bits >> 16);
    p[3] = static_cast<unsigned char>(bits >> 24);
}

long numeric_or(const std::string& s, long fallback) {
    if (s.empty()) return fallback;
    long value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    return (ec == std::errc() && ptr == s.data() + s.size()) ? value : fallback;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw FormatError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    return out;
}

// Splits on whitespace and parses every token as a double.
bool parse_reals(std::string_view line, std::vector<double>& out) {
    out.clear();
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i == line.size()) break;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        double v = 0.0;
        const char* first = line.data() + i;
        const char* last = line.data() + j;
        if (*first == '+') ++first;
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last) return false;
        out.push_back(v);
        i = j;
    }
    return true;
}

void append_shortest(std::string& s, double v) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    s.append(buf.data(), ptr);
}

}  // namespace

KittiFrame read_kitti_bin(const fs::path& path) {
    std::ifstream in = open_in(path, std::ios::in | std::ios::binary);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() % 16 != 0) {
        throw FormatError(path.string() + ": byte length " + std::to_string(bytes.size()) +
                          " is not a multiple of 16");
    }

    KittiFrame frame;
    frame.frame_index = numeric_or(path.stem().string(), -1);
    fs::path dir = path.parent_path();
    if (dir.filename() == "velodyne") dir = dir.parent_path();
    frame.sequence_id = static_cast<int>(numeric_or(dir.filename().string(), -1));
    frame.points.frame_id = path.stem().string();

    const std::size_t n = bytes.size() / 16;
    if (n == 0) warn(path.string() + ": empty scan");
    frame.points.points.resize(n);
    frame.intensities.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char* rec = bytes.data() + 16 * i;
        const float x = load_le_float(rec), y = load_le_float(rec + 4), z = load_le_float(rec + 8);
        const float r = load_le_float(rec + 12);
        if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
            throw FormatError(path.string() + ": non-finite coordinate at point " + std::to_string(i), i);
        }
        if (!std::isfinite(r)) {
            throw FormatError(path.string() + ": non-finite reflectance at point " + std::to_string(i), i);
        }
        frame.points[i] = Point3{x, y, z};
        frame.intensities[i] = r;
    }
    return frame;
}

void write_kitti_bin(const fs::path& path, const KittiFrame& frame) {
    const std::size_t n = frame.points.size();
    if (frame.intensities.size() != n && !frame.intensities.empty()) {
        throw FormatError("frame has " + std::to_string(n) + " points but " +
                          std::to_string(frame.intensities.size()) + " intensities");
    }
    std::vector<unsigned char> bytes(16 * n);
    for (std::size_t i = 0; i < n; ++i) {
        unsigned char* rec = bytes.data() + 16 * i;
        const Point3& p = frame.points[i];
        store_le_float(static_cast<float>(p.x), rec);
        store_le_float(static_cast<float>(p.y), rec + 4);
        store_le_float(static_cast<float>(p.z), rec + 8);
        store_le_float(frame.intensities.empty() ? 0.0f : frame.intensities[i], rec + 12);
    }
    std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("failed writing " + path.string());
}

PoseTrack read_kitti_poses(const fs::path& path) {
    std::ifstream in = open_in(path);
    PoseTrack track;
    std::string line;
    std::vector<double> values;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (!parse_reals(line, values) || values.size() != 12) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) +
                                  ": expected 12 real numbers",
                              line_no);
        }
        if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": non-finite value",
                              line_no);
        }
        const Mat3 raw({values[0], values[1], values[2], values[4], values[5], values[6], values[8],
                        values[9], values[10]});
        RigidTransform pose(raw, Vec3{values[3], values[7], values[11]});
        if (!pose.is_valid(1e-12)) {
            const Mat3 fixed = nearest_rotation(raw);
            double moved = 0.0;
            for (std::size_t i = 0; i < 9; ++i) {
                moved = std::max(moved, std::abs(fixed.data()[i] - raw.data()[i]));
            }
            if (moved > 1e-6) {
                throw FormatError(path.string() + ":" + std::to_string(line_no) +
                                      ": rotation block is not orthonormal",
                                  line_no);
            }
            pose = RigidTransform(fixed, pose.translation());
        }
        track.poses.push_back(pose);
    }
    return track;
}

void write_kitti_poses(const fs::path& path, const PoseTrack& track) {
    std::string text;
    for (const RigidTransform& pose : track.poses) {
        const std::array<double, 16> m = pose.matrix4();
        for (std::size_t i = 0; i < 12; ++i) {
            if (i > 0) text.push_back(' ');
            append_shortest(text, m[i]);
        }
        text.push_back('\n');
    }
    std::ofstream out = open_out(path);
    out << text;
    if (!out) throw FormatError("failed writing " + path.string());
}

PointCloud read_xyz(const fs::path& path) {
    std::ifstream in = open_in(path);
    PointCloud cloud;
    cloud.frame_id = path.stem().string();
    std::string line;
    std::vector<double> values;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (!parse_reals(line, values) || values.size() != 3) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected \"x y z\"",
                              line_no);
        }
        const Point3 p{values[0], values[1], values[2]};
        if (!is_finite(p)) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": non-finite coordinate",
                              line_no);
        }
        cloud.points.push_back(p);
    }
    return cloud;
}

void write_xyz(const fs::path& path, const PointCloud& cloud) {
    std::string text;
    for (const Point3& p : cloud.points) {
        append_shortest(text, p.x);
        text.push_back(' ');
        append_shortest(text, p.y);
        text.push_back(' ');
        append_shortest(text, p.z);
        text.push_back('\n');
    }
    std::ofstream out = open_out(path);
    out << text;
    if (!out) throw FormatError("failed writing " + path.string());
}

PointCloud load_cloud(const fs::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".bin") return read_kitti_bin(path).points;
    if (ext == ".xyz" || ext == ".txt") return read_xyz(path);
    throw FormatError("unsupported point cloud format '" + ext + "' (" + path.string() + ")");
}

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
    if (bound == 0) return 0;
    // Reject the low residue class so every value in [0, bound) is equally likely.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = engine_();
        if (r >= threshold) return r % bound;
    }
}

double Rng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u = 0.0, v = 0.0, s = 0.0;
    do {
        u = 2.0 * uniform01() - 1.0;
        v = 2.0 * uniform01() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

std::vector<std::size_t> sample_indices(std::size_t size, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ConfigError("sample size must be at least 1");
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (n >= size) return idx;
    Rng rng(seed);
    // Partial Fisher-Yates: the first n slots become a uniform n-subset.
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(size - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    return idx;
}

PointCloud sample_points(const PointCloud& cloud, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ConfigError("sample size must be at least 1");
    if (n >= cloud.size()) return cloud;
    PointCloud out;
    out.frame_id = cloud.frame_id;
    out.points.reserve(n);
    for (std::size_t i : sample_indices(cloud.size(), n, seed)) out.points.push_back(cloud[i]);
    return out;
}

}  // namespace fpps::io
