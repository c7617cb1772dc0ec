#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace xpra {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Hyperspectral cube of n x m pixels and f bands.
///
/// Values are stored pixel-major with the band index fastest, i.e. the
/// reflectance at (row, col, band) lives at `((row * m) + col) * f + band`.
/// This is also the byte layout of the `.f32` interchange payload.
struct HsCube {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t f = 0;
  std::vector<double> values;
  std::optional<std::vector<double>> band_wavelengths;

  double at(std::size_t row, std::size_t col, std::size_t band) const {
    return values[(row * m + col) * f + band];
  }
  double &at(std::size_t row, std::size_t col, std::size_t band) {
    return values[(row * m + col) * f + band];
  }

  /// Throws Error{size|format} if the invariants do not hold.
  void validate() const;
};

/// Per-voxel binary labels in unfolding order.
struct GroundTruthMask {
  std::vector<std::uint8_t> labels;
  int positive_class_id = 16;

  std::size_t positives() const;
  std::size_t negatives() const { return labels.size() - positives(); }
};

enum class CubeFormat { raw_f32_json, csv_matrix };

/// Loads a cube. For `raw_f32_json` the path may name either the `.json`
/// header or the `.f32` payload; the sibling is located by extension. For
/// `csv_matrix` the file holds the unfolded f x nm matrix; a sibling `.json`
/// header, if present, supplies n and m (otherwise n = 1, m = nm).
HsCube load_cube(const std::filesystem::path &path, CubeFormat format);

/// Writes `<stem>.json` and `<stem>.f32` next to each other.
void save_cube(const HsCube &cube, const std::filesystem::path &stem);

/// Column j of the result is the voxel at pixel j = row * m + col.
Matrix unfold(const HsCube &cube);

/// Inverse of unfold.
HsCube refold(const Matrix &data, std::size_t n, std::size_t m);

struct JointNormalized {
  Matrix data;
  Matrix dictionary;
  double scale = 1.0;
};

/// Divides both the data and the raw dictionary by max|Y_ij|.
JointNormalized normalize_joint(const Matrix &data, const Matrix &raw_dictionary);

// CSV matrices: one row per line, comma separated, no header.
Matrix read_csv_matrix(const std::filesystem::path &path);
void write_csv_matrix(const Matrix &mat, const std::filesystem::path &path);

// Raw matrices: little-endian f32 payload plus a {"rows","cols","order"} sidecar.
void write_f32_matrix(const Matrix &mat, const std::filesystem::path &stem);
Matrix read_f32_matrix(const std::filesystem::path &stem);

/// Reads integer class labels (any mix of commas and whitespace) and
/// binarizes them against `positive_class_id`.
GroundTruthMask read_mask_csv(const std::filesystem::path &path,
                              int positive_class_id = 16);
void write_mask_csv(const std::vector<std::uint8_t> &labels,
                    const std::filesystem::path &path);

/// Loads an f x nm data matrix from a cube header/payload or a CSV matrix,
/// chosen by extension.
Matrix load_data_matrix(const std::filesystem::path &path);

} // namespace xpra
