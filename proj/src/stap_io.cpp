#include "stapcrb/stap_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace stapcrb {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

constexpr char kMagic[4] = {'S', 'T', 'A', 'P'};

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ConfigError("truncated STAP container");
  return v;
}

void read_header(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw ConfigError("missing STAP magic bytes");
  const auto version = get<std::uint16_t>(is);
  if (version != kStapVersion) throw ConfigError("unsupported STAP version " + std::to_string(version));
}

}  // namespace

void write_matrix(std::ostream& os, const CMatrix& m) {
  os.write(kMagic, 4);
  put<std::uint16_t>(os, kStapVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(m.rows()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(m.cols()));
  // Eigen storage is column-major std::complex<double>, i.e. interleaved re/im.
  os.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(cplx)));
}

CMatrix read_matrix(std::istream& is) {
  read_header(is);
  const auto rows = get<std::uint32_t>(is);
  const auto cols = get<std::uint32_t>(is);
  CMatrix m(rows, cols);
  is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(cplx)));
  if (!is) throw ConfigError("truncated STAP matrix payload");
  return m;
}

void write_matrix_file(const std::string& path, const CMatrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path);
  write_matrix(os, m);
}

CMatrix read_matrix_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  return read_matrix(is);
}

void write_tensor(std::ostream& os, const HeatmapTensor& t) {
  os.write(kMagic, 4);
  put<std::uint16_t>(os, kStapVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(t.bins));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(t.n_az));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(t.n_vel));
  for (int l = 0; l < t.n_vel; ++l) {
    for (int j = 0; j < t.n_az; ++j) {
      for (int b = 0; b < t.bins; ++b) put<double>(os, t.at(b, j, l));
    }
  }
}

HeatmapTensor read_tensor(std::istream& is, const std::vector<double>& azimuth_deg,
                          const std::vector<double>& velocity_mps) {
  read_header(is);
  const auto bins = static_cast<int>(get<std::uint32_t>(is));
  const auto n_az = get<std::uint32_t>(is);
  const auto n_vel = get<std::uint32_t>(is);
  if (n_az != azimuth_deg.size() || n_vel != velocity_mps.size()) {
    throw ConfigError("tensor dims do not match the scene grid");
  }
  HeatmapTensor t(bins, azimuth_deg, velocity_mps);
  for (int l = 0; l < t.n_vel; ++l) {
    for (int j = 0; j < t.n_az; ++j) {
      for (int b = 0; b < t.bins; ++b) t.at(b, j, l) = get<double>(is);
    }
  }
  return t;
}

void write_tensor_file(const std::string& path, const HeatmapTensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path);
  write_tensor(os, t);
}

HeatmapTensor read_tensor_file(const std::string& path, const std::vector<double>& azimuth_deg,
                               const std::vector<double>& velocity_mps) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  return read_tensor(is, azimuth_deg, velocity_mps);
}

void write_tensor_csv(std::ostream& os, const HeatmapTensor& t) {
  os << "rho,theta_deg,v_mps,gamma\n";
  const auto old = os.precision(17);
  for (int b = 0; b < t.bins; ++b) {
    for (int j = 0; j < t.n_az; ++j) {
      for (int l = 0; l < t.n_vel; ++l) {
        os << b << ',' << t.azimuth_deg[j] << ',' << t.velocity_mps[l] << ',' << t.at(b, j, l) << '\n';
      }
    }
  }
  os.precision(old);
}

}  // namespace stapcrb
