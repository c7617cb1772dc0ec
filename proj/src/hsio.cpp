#include "xpra/hsio.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "xpra/error.hpp"

namespace xpra {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<char> read_bytes(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

float decode_f32_le(const char *p) {
  std::uint32_t bits = 0;
  for (int i = 3; i >= 0; --i)
    bits = (bits << 8) | static_cast<unsigned char>(p[i]);
  return std::bit_cast<float>(bits);
}

void encode_f32_le(float value, std::ostream &out) {
  auto bits = std::bit_cast<std::uint32_t>(value);
  char buf[4];
  for (int i = 0; i < 4; ++i) {
    buf[i] = static_cast<char>(bits & 0xffu);
    bits >>= 8;
  }
  out.write(buf, 4);
}

json parse_header(const fs::path &path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error &e) {
    throw Error(ErrorKind::format,
                "header " + path.string() + " is not valid JSON: " + e.what());
  }
}

std::size_t positive_field(const json &header, const char *name) {
  if (!header.contains(name))
    throw Error(ErrorKind::format, std::string("header field '") + name + "' missing");
  const auto &v = header.at(name);
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw Error(ErrorKind::format,
                std::string("header field '") + name + "' must be a positive integer");
  return v.get<std::size_t>();
}

fs::path with_ext(fs::path p, const char *ext) { return p.replace_extension(ext); }

std::vector<double> parse_numbers(const std::string &line, const fs::path &path,
                                  std::size_t lineno) {
  std::vector<double> out;
  const char *p = line.c_str();
  const char *end = p + line.size();
  while (p < end) {
    while (p < end && (*p == ',' || std::isspace(static_cast<unsigned char>(*p))))
      ++p;
    if (p >= end)
      break;
    char *next = nullptr;
    double v = std::strtod(p, &next);
    if (next == p)
      throw Error(ErrorKind::format, path.string() + ":" + std::to_string(lineno) +
                                         ": not a number near '" +
                                         std::string(p, std::min<std::size_t>(end - p, 16)) + "'");
    out.push_back(v);
    p = next;
  }
  return out;
}

} // namespace

void HsCube::validate() const {
  if (n < 1 || m < 1 || f < 1)
    throw Error(ErrorKind::size, "cube dimensions must be >= 1");
  if (values.size() != n * m * f)
    throw Error(ErrorKind::size, "cube holds " + std::to_string(values.size()) +
                                     " values, expected n*m*f = " +
                                     std::to_string(n * m * f));
  for (double v : values)
    if (!std::isfinite(v))
      throw Error(ErrorKind::format, "cube contains a non-finite value");
  if (band_wavelengths && band_wavelengths->size() != f)
    throw Error(ErrorKind::size, "band_wavelengths length differs from f");
}

std::size_t GroundTruthMask::positives() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

HsCube load_cube(const fs::path &path, CubeFormat format) {
  HsCube cube;
  if (format == CubeFormat::raw_f32_json) {
    const fs::path header_path = with_ext(path, ".json");
    const fs::path payload_path = with_ext(path, ".f32");
    const json header = parse_header(header_path);
    cube.n = positive_field(header, "n");
    cube.m = positive_field(header, "m");
    cube.f = positive_field(header, "f");
    if (header.contains("order") &&
        (!header["order"].is_string() || header["order"] != "row-major"))
      throw Error(ErrorKind::format, "header field 'order' must be \"row-major\"");
    if (header.contains("band_wavelengths")) {
      const auto &bw = header["band_wavelengths"];
      if (!bw.is_array())
        throw Error(ErrorKind::format, "header field 'band_wavelengths' must be an array");
      std::vector<double> wl;
      for (const auto &x : bw) {
        if (!x.is_number())
          throw Error(ErrorKind::format, "header field 'band_wavelengths' must hold numbers");
        wl.push_back(x.get<double>());
      }
      cube.band_wavelengths = std::move(wl);
    }
    const auto bytes = read_bytes(payload_path);
    const std::size_t expected = cube.n * cube.m * cube.f;
    if (bytes.size() != expected * 4)
      throw Error(ErrorKind::size, "payload " + payload_path.string() + " holds " +
                                       std::to_string(bytes.size()) + " bytes, header implies " +
                                       std::to_string(expected * 4));
    cube.values.resize(expected);
    for (std::size_t i = 0; i < expected; ++i)
      cube.values[i] = decode_f32_le(bytes.data() + 4 * i);
  } else {
    const Matrix data = read_csv_matrix(path);
    std::size_t n = 1, m = static_cast<std::size_t>(data.cols());
    const fs::path header_path = with_ext(path, ".json");
    if (fs::exists(header_path)) {
      const json header = parse_header(header_path);
      n = positive_field(header, "n");
      m = positive_field(header, "m");
      if (header.contains("f") && positive_field(header, "f") != std::size_t(data.rows()))
        throw Error(ErrorKind::size, "header f differs from CSV row count");
    }
    if (n * m != std::size_t(data.cols()))
      throw Error(ErrorKind::size, "header n*m differs from CSV column count");
    cube = refold(data, n, m);
  }
  cube.validate();
  return cube;
}

void save_cube(const HsCube &cube, const fs::path &stem) {
  cube.validate();
  json header = {{"n", cube.n}, {"m", cube.m}, {"f", cube.f}, {"order", "row-major"}};
  if (cube.band_wavelengths)
    header["band_wavelengths"] = *cube.band_wavelengths;
  std::ofstream h(with_ext(stem, ".json"));
  h << header.dump(2) << "\n";
  std::ofstream p(with_ext(stem, ".f32"), std::ios::binary);
  for (double v : cube.values)
    encode_f32_le(static_cast<float>(v), p);
  if (!h || !p)
    throw Error(ErrorKind::io, "failed writing cube " + stem.string());
}

Matrix unfold(const HsCube &cube) {
  cube.validate();
  Matrix out(cube.f, cube.n * cube.m);
  for (std::size_t j = 0; j < cube.n * cube.m; ++j)
    for (std::size_t b = 0; b < cube.f; ++b)
      out(b, j) = cube.values[j * cube.f + b];
  return out;
}

HsCube refold(const Matrix &data, std::size_t n, std::size_t m) {
  if (std::size_t(data.cols()) != n * m)
    throw Error(ErrorKind::size, "refold: column count differs from n*m");
  HsCube cube;
  cube.n = n;
  cube.m = m;
  cube.f = static_cast<std::size_t>(data.rows());
  cube.values.resize(n * m * cube.f);
  for (std::size_t j = 0; j < n * m; ++j)
    for (std::size_t b = 0; b < cube.f; ++b)
      cube.values[j * cube.f + b] = data(b, j);
  return cube;
}

JointNormalized normalize_joint(const Matrix &data, const Matrix &raw_dictionary) {
  const double scale = data.size() ? data.cwiseAbs().maxCoeff() : 0.0;
  if (!(scale > 0.0))
    throw Error(ErrorKind::degenerate_input, "normalize_joint: data matrix is all zero");
  return {data / scale, raw_dictionary / scale, scale};
}

Matrix read_csv_matrix(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::io, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto row = parse_numbers(line, path, lineno);
    if (row.empty())
      continue;
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorKind::size, path.string() + ":" + std::to_string(lineno) +
                                       ": ragged row (" + std::to_string(row.size()) +
                                       " vs " + std::to_string(rows.front().size()) + ")");
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw Error(ErrorKind::format, path.string() + ": empty matrix");
  Matrix out(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out(i, j) = rows[i][j];
  return out;
}

void write_csv_matrix(const Matrix &mat, const fs::path &path) {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorKind::io, "cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j) {
      if (j)
        out << ',';
      out << mat(i, j);
    }
    out << '\n';
  }
}

void write_f32_matrix(const Matrix &mat, const fs::path &stem) {
  json header = {{"rows", mat.rows()}, {"cols", mat.cols()}, {"order", "row-major"}};
  std::ofstream h(with_ext(stem, ".json"));
  h << header.dump(2) << "\n";
  std::ofstream p(with_ext(stem, ".f32"), std::ios::binary);
  for (Eigen::Index i = 0; i < mat.rows(); ++i)
    for (Eigen::Index j = 0; j < mat.cols(); ++j)
      encode_f32_le(static_cast<float>(mat(i, j)), p);
  if (!h || !p)
    throw Error(ErrorKind::io, "failed writing matrix " + stem.string());
}

Matrix read_f32_matrix(const fs::path &stem) {
  const json header = parse_header(with_ext(stem, ".json"));
  const auto rows = positive_field(header, "rows");
  const auto cols = positive_field(header, "cols");
  const auto bytes = read_bytes(with_ext(stem, ".f32"));
  if (bytes.size() != rows * cols * 4)
    throw Error(ErrorKind::size, "matrix payload size differs from header");
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      out(i, j) = decode_f32_le(bytes.data() + 4 * (i * cols + j));
  return out;
}

GroundTruthMask read_mask_csv(const fs::path &path, int positive_class_id) {
  const std::string text = read_text(path);
  GroundTruthMask mask;
  mask.positive_class_id = positive_class_id;
  for (double v : parse_numbers(text, path, 1)) {
    if (v != std::floor(v))
      throw Error(ErrorKind::format, path.string() + ": class labels must be integers");
    mask.labels.push_back(static_cast<int>(v) == positive_class_id ? 1 : 0);
  }
  if (mask.labels.empty())
    throw Error(ErrorKind::format, path.string() + ": empty mask");
  return mask;
}

void write_mask_csv(const std::vector<std::uint8_t> &labels, const fs::path &path) {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorKind::io, "cannot write " + path.string());
  for (auto l : labels)
    out << int(l) << '\n';
}

Matrix load_data_matrix(const fs::path &path) {
  const auto ext = path.extension().string();
  if (ext == ".json" || ext == ".f32") {
    const json header = parse_header(with_ext(path, ".json"));
    if (header.contains("rows"))
      return read_f32_matrix(path);
    return unfold(load_cube(path, CubeFormat::raw_f32_json));
  }
  return read_csv_matrix(path);
}

} // namespace xpra
