#ifndef STAPCRB_STAP_IO_HPP
#define STAPCRB_STAP_IO_HPP

#include <iosfwd>
#include <string>

#include "stapcrb/common.hpp"
#include "stapcrb/heatmap.hpp"

namespace stapcrb {

// Container layout, little-endian:
//   "STAP" | u16 version (1) | u32 dims... | f64 payload
// Complex matrices carry two dims (rows, cols) and interleaved re/im pairs in
// column-major order. Heatmap tensors carry three dims (κ, n_az, n_vel) and
// real values with the first index fastest.
inline constexpr std::uint16_t kStapVersion = 1;

void write_matrix(std::ostream& os, const CMatrix& m);
CMatrix read_matrix(std::istream& is);
void write_matrix_file(const std::string& path, const CMatrix& m);
CMatrix read_matrix_file(const std::string& path);

/// Grid metadata is not stored; the reader takes it from the scene.
void write_tensor(std::ostream& os, const HeatmapTensor& t);
HeatmapTensor read_tensor(std::istream& is, const std::vector<double>& azimuth_deg,
                          const std::vector<double>& velocity_mps);
void write_tensor_file(const std::string& path, const HeatmapTensor& t);
HeatmapTensor read_tensor_file(const std::string& path, const std::vector<double>& azimuth_deg,
                               const std::vector<double>& velocity_mps);

/// Long-form CSV rows (rho, theta_deg, v_mps, gamma).
void write_tensor_csv(std::ostream& os, const HeatmapTensor& t);

}  // namespace stapcrb

#endif  // STAPCRB_STAP_IO_HPP
