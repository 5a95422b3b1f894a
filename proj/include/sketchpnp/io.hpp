#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sketchpnp/errors.hpp"
#include "sketchpnp/image.hpp"
#include "sketchpnp/solvers.hpp"

namespace sketchpnp {

static_assert(std::endian::native == std::endian::little, "image files are little-endian");

inline constexpr std::array<char, 8> kImageMagic{'S', 'P', 'N', 'P', 'I', 'M', 'G', '1'};
inline constexpr const char* kTrajectoryHeader =
    "iter,stage,psnr_db,data_fidelity,cost_units,wall_seconds";

// Binary image: 8-byte magic, uint32 width, uint32 height, then float64 pixels
// in row-major order.

inline void write_image(const std::filesystem::path& path, const Image& x) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  const auto w = static_cast<std::uint32_t>(x.width());
  const auto h = static_cast<std::uint32_t>(x.height());
  out.write(kImageMagic.data(), kImageMagic.size());
  out.write(reinterpret_cast<const char*>(&w), sizeof w);
  out.write(reinterpret_cast<const char*>(&h), sizeof h);
  out.write(reinterpret_cast<const char*>(x.data.data()),
            static_cast<std::streamsize>(x.data.size() * sizeof(double)));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

/// Pixel size is not stored in the file and must be supplied.
inline Image read_image(const std::filesystem::path& path, double pixel_size = 1.0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::array<char, 8> magic{};
  std::uint32_t w = 0, h = 0;
  in.read(magic.data(), magic.size());
  in.read(reinterpret_cast<char*>(&w), sizeof w);
  in.read(reinterpret_cast<char*>(&h), sizeof h);
  if (!in || magic != kImageMagic) throw IoError("'" + path.string() + "' is not an image file");
  Image x(GridSpec{w, h, pixel_size});
  in.read(reinterpret_cast<char*>(x.data.data()),
          static_cast<std::streamsize>(x.data.size() * sizeof(double)));
  if (!in) throw IoError("'" + path.string() + "' is truncated");
  return x;
}

/// 8-bit binary PGM, linearly scaled from [min, max] to [0, 255].
inline void write_pgm(const std::filesystem::path& path, const Image& x) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  const auto [lo_it, hi_it] = std::minmax_element(x.data.begin(), x.data.end());
  const double lo = *lo_it, hi = *hi_it;
  const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
  out << "P5\n" << x.width() << ' ' << x.height() << "\n255\n";
  std::vector<unsigned char> bytes(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    bytes[i] = static_cast<unsigned char>(std::lround((x.data[i] - lo) * scale));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << kTrajectoryHeader << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : traj)
    out << r.iter << ',' << r.stage << ',' << r.psnr_db << ',' << r.data_fidelity << ','
        << r.cost_units << ',' << r.wall_seconds << '\n';
}

inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_trajectory_csv(out, traj);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryHeader)
    throw IoError("'" + path.string() + "' does not have the trajectory header");
  Trajectory traj;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(row, field, ',')) f.push_back(field);
    if (f.size() != 6) throw IoError("malformed trajectory row in '" + path.string() + "'");
    TrajectoryRecord r;
    try {
      r.iter = std::stoi(f[0]);
      r.stage = std::stoi(f[1]);
      r.psnr_db = std::stod(f[2]);
      r.data_fidelity = std::stod(f[3]);
      r.cost_units = std::stod(f[4]);
      r.wall_seconds = std::stod(f[5]);
    } catch (const std::exception&) {
      throw IoError("malformed trajectory row in '" + path.string() + "'");
    }
    traj.push_back(r);
  }
  return traj;
}

using KeyValues = std::map<std::string, std::string>;

inline void write_key_values(const std::filesystem::path& path, const KeyValues& kv) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  KeyValues kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return kv;
}

}  // namespace sketchpnp
