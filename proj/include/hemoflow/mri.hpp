// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HEMOFLOW_MRI_HPP
#define HEMOFLOW_MRI_HPP

#include "hemoflow/flowfields.hpp"
#include "hemoflow/mesh.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hemoflow {

inline constexpr double kGyromagneticRatio = 42.577e6; // Hz/T, protons

enum class Encode : int { Reference = 0, X = 1, Y = 2, Z = 3 };
inline constexpr std::array<Encode, 4> kAllEncodes{Encode::Reference, Encode::X, Encode::Y, Encode::Z};
const char* to_string(Encode e);

enum class LineOrder { PartitionOuter, PhaseOuter };

/// Acquisition parameters in the units scanners report them in. Defaults are
/// the aortic protocol used throughout the project.
struct SequenceParams {
  double venc = 2.5;                    // m/s
  std::array<int, 3> matrix{56, 30, 113};
  std::array<double, 3> voxel{2.0, 2.0, 2.0}; // mm
  int oversampling = 2;                 // readout (x) only
  int cardiac_phases = 30;
  double time_spacing = 32.0;           // ms
  double t2_star = 254.0;               // ms
  double adc_bandwidth = 128.0;         // kHz
  double slew_rate = 195.0;             // mT/m/ms (= T/m/s)
  double max_gradient = 30.0;           // mT/m
  double raster_time = 0.01;            // ms, gradient raster
  LineOrder line_order = LineOrder::PartitionOuter;

  void validate() const;
  int readout_samples() const { return matrix[0] * oversampling; }
  // Field of view of the acquired grid in m, readout including oversampling.
  std::array<double, 3> fov() const;
  std::array<int, 3> kspace_dims() const { return {readout_samples(), matrix[1], matrix[2]}; }
};

struct Trapezoid {
  double ramp = 0.0;      // s
  double flat = 0.0;      // s
  double amplitude = 0.0; // T/m
  double duration() const { return 2.0 * ramp + flat; }
  double area() const { return amplitude * (ramp + flat); }
};

struct SequenceTimings {
  double te = 0.0;             // s, excitation to k-space center
  double dwell = 0.0;          // s
  double repetition = 0.0;     // s, shortest line repetition time
  Trapezoid bipolar_lobe;      // one of the two encoding lobes
  Trapezoid prewinder;
  Trapezoid readout;           // flat part spans the ADC window
  std::vector<double> sample_times; // s after excitation, per readout sample
};

/// Shortest gradient-echo timing on a raster: balanced bipolar encoding, a
/// combined phase/partition/readout prewinder, then the readout up to the
/// center sample. Throws InfeasibleSequence when the readout cannot be played
/// within the gradient limit or a line does not fit the cardiac frame.
SequenceTimings sequence_timings(const SequenceParams& params);

/// Shortest raster-aligned trapezoid with the given area.
Trapezoid shortest_trapezoid(double area, double max_gradient, double slew, double raster);

/// Shortest raster-aligned lobe pair whose first moment is `moment` (T s^2/m).
Trapezoid shortest_bipolar_lobe(double moment, double max_gradient, double slew, double raster);

struct ImageGeometry {
  std::array<int, 3> dims{1, 1, 1};
  std::array<double, 3> spacing{1.0, 1.0, 1.0}; // m
  Vec3 center = Vec3::Zero();                    // m, location of index floor(N/2)

  size_t voxel_count() const { return static_cast<size_t>(dims[0]) * dims[1] * dims[2]; }
  size_t index(int i, int j, int k) const {
    return static_cast<size_t>(i) + static_cast<size_t>(dims[0]) * (static_cast<size_t>(j) + static_cast<size_t>(dims[1]) * static_cast<size_t>(k));
  }
  Vec3 position(int i, int j, int k) const;
};

/// One encode of one cardiac phase on the full Cartesian grid.
/// Sample (i, j, k) is at k = ((i, j, k) - floor(dims / 2)) / FOV.
struct KSpaceData {
  std::array<int, 3> dims{};     // readout (oversampled), phase, partition
  std::array<double, 3> fov{};   // m
  Vec3 center = Vec3::Zero();    // m, FOV center
  Encode encode = Encode::Reference;
  int cardiac_phase = 0;
  double phase_time = 0.0;       // s
  double venc = 0.0;             // m/s
  std::vector<double> sample_times; // s after excitation, per readout index
  LineOrder line_order = LineOrder::PartitionOuter;
  std::vector<std::complex<double>> samples; // readout fastest
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  std::string params_hash;

  size_t index(int i, int j, int k) const {
    return static_cast<size_t>(i) + static_cast<size_t>(dims[0]) * (static_cast<size_t>(j) + static_cast<size_t>(dims[1]) * static_cast<size_t>(k));
  }
  // Acquisition order of line (j, k).
  size_t line_index(int j, int k) const;
};

struct SynthesisOptions {
  Vec3 fov_center = Vec3::Zero(); // m
  int quadrature_subdivisions = 0; // 0: 4-point rule per tet; L: rule on 8^L sub-tets
  bool motion = true;              // first-order spin displacement during the readout
};

/// Evaluates the gradient-echo signal of one encode for one velocity frame.
/// M0 and velocity are linear on each tet and integrated with the 4-point
/// Gauss rule; the reference encode carries no velocity phase.
KSpaceData synthesize_signal(const TetMesh& mesh, std::span<const double> m0, std::span<const Vec3> velocity,
                             const SequenceParams& params, Encode encode, const SynthesisOptions& options = {});

/// Largest |s| over a set of encodes.
double max_abs_signal(std::span<const KSpaceData> data);

/// Adds N(0, sigma^2) to real and imaginary parts. The stream depends only on
/// (seed, encode, cardiac phase).
void add_noise_sigma(KSpaceData& k, double sigma, std::uint64_t seed);

/// add_noise_sigma with sigma = sigma_fraction * max |s| of `k`.
void add_noise(KSpaceData& k, double sigma_fraction, std::uint64_t seed);

struct ImageVolume {
  ImageGeometry geometry;
  Encode encode = Encode::Reference;
  int cardiac_phase = 0;
  double phase_time = 0.0;
  double venc = 0.0;
  std::vector<std::complex<double>> voxels;
};

/// Centered inverse DFT normalized by 1/N over the full grid, so that
/// sum |k|^2 = N sum |img|^2 before cropping. With `crop` the oversampled
/// readout is cut back to the central `readout_matrix` voxels.
ImageVolume reconstruct(const KSpaceData& k, int readout_matrix = 0);

struct ReconstructedVelocity {
  ImageGeometry geometry;
  int cardiac_phase = 0;
  double phase_time = 0.0;
  std::vector<Vec3> velocity;      // m/s
  std::vector<double> magnitude;   // |reference|
  std::vector<std::uint8_t> wrapped; // bit a set when component a hit the wrap boundary
};

/// u_a = -VENC * arg(img_a conj(img_ref)) / pi, so u_a lies in [-VENC, VENC).
ReconstructedVelocity phase_to_velocity(const ImageVolume& ref, const ImageVolume& x, const ImageVolume& y,
                                        const ImageVolume& z, double venc);

/// Zeroes the velocity of voxels whose magnitude is below `fraction` of the
/// largest magnitude; their phase carries only noise.
void mask_background(ReconstructedVelocity& v, double fraction);

/// Mean of a nodal field over each voxel, by quadrature on sub-tets, plus
/// the fraction of each voxel covered by the mesh.
struct VoxelAverage {
  std::vector<Vec3> mean;
  std::vector<double> coverage; // 0..1
};
VoxelAverage voxel_average(const TetMesh& mesh, std::span<const Vec3> values, const ImageGeometry& grid,
                           int subdivisions = 2);

/// Mean |clean| over `mask` divided by the standard deviation of the noise
/// (noisy - clean) pooled over real and imaginary parts of all voxels.
double measure_snr(const ImageVolume& clean, const ImageVolume& noisy, std::span<const char> mask);

// Flat little-endian complex64 with a JSON sidecar `<path>.json`.
void write_kspace(const std::filesystem::path& path, const KSpaceData& k);
KSpaceData read_kspace(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const ImageVolume& img);
ImageVolume read_image(const std::filesystem::path& path);

/// Stable hash of every field of the parameters, for provenance metadata.
std::string params_hash(const SequenceParams& params);

} // namespace hemoflow

#endif
