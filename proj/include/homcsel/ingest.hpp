#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "homcsel/binary_io.hpp"
#include "homcsel/data_matrix.hpp"
#include "homcsel/detection.hpp"
#include "homcsel/evaluation.hpp"

namespace homcsel {

// Cube samples live in a flat band-last array: value(x, y, b) sits at
// ((y-1)*width + (x-1))*bands + (b-1). x runs along samples, y along lines.
struct HsiCube {
  int width = 0;   // samples
  int height = 0;  // lines
  int bands = 0;
  std::vector<double> values;
  std::vector<double> wavelengths;  // empty or one per band

  double at(int x, int y, int b) const {
    return values[(static_cast<std::size_t>(y - 1) * width + (x - 1)) *
                      static_cast<std::size_t>(bands) +
                  (b - 1)];
  }
  double& at(int x, int y, int b) {
    return values[(static_cast<std::size_t>(y - 1) * width + (x - 1)) *
                      static_cast<std::size_t>(bands) +
                  (b - 1)];
  }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
};

struct EnviHeader {
  int samples = 0;
  int lines = 0;
  int bands = 0;
  int data_type = 0;   // 4 = float32, 2 = int16
  int byte_order = 0;  // 0 = little endian, 1 = big endian
  int header_offset = 0;
  std::string interleave;  // bsq, bil, bip
  std::vector<double> wavelengths;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline int parse_int_field(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("malformed header: field '" + key +
                          "' has non-integer value '" + value + "'");
  }
}

}  // namespace detail

// Parses the key = value text of an ENVI header. Brace-wrapped list values may
// span lines; unknown keys are ignored.
inline EnviHeader parse_envi_header(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line).rfind("ENVI", 0) != 0)
    throw ValidationError("malformed header: missing ENVI magic on line 1");
  std::map<std::string, std::string> fields;
  while (std::getline(in, line)) {
    line = detail::trim(line);
    if (line.empty() || line[0] == ';') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("malformed header: expected 'key = value', got '" +
                            line + "'");
    std::string key = detail::lower(detail::trim(line.substr(0, eq)));
    std::string value = detail::trim(line.substr(eq + 1));
    if (!value.empty() && value.front() == '{') {
      while (value.find('}') == std::string::npos) {
        std::string cont;
        if (!std::getline(in, cont))
          throw ValidationError("malformed header: unterminated { list in '" +
                                key + "'");
        value += " " + detail::trim(cont);
      }
      value = detail::trim(value.substr(1, value.find('}') - 1));
    }
    fields[key] = value;
  }

  EnviHeader h;
  for (const char* req : {"samples", "lines", "bands", "data type",
                          "interleave", "byte order"}) {
    if (!fields.count(req))
      throw ValidationError("malformed header: missing required field '" +
                            std::string(req) + "'");
  }
  h.samples = detail::parse_int_field("samples", fields["samples"]);
  h.lines = detail::parse_int_field("lines", fields["lines"]);
  h.bands = detail::parse_int_field("bands", fields["bands"]);
  h.data_type = detail::parse_int_field("data type", fields["data type"]);
  h.byte_order = detail::parse_int_field("byte order", fields["byte order"]);
  h.interleave = detail::lower(fields["interleave"]);
  if (fields.count("header offset"))
    h.header_offset = detail::parse_int_field("header offset", fields["header offset"]);

  if (h.samples < 1 || h.lines < 1 || h.bands < 1)
    throw ValidationError("malformed header: non-positive dimensions");
  if (h.data_type != 4 && h.data_type != 2)
    throw ValidationError("unsupported data type " + std::to_string(h.data_type) +
                          " (supported: 4 = float32, 2 = int16)");
  if (h.interleave != "bsq" && h.interleave != "bil" && h.interleave != "bip")
    throw ValidationError("malformed header: unknown interleave '" +
                          h.interleave + "'");
  if (h.byte_order != 0 && h.byte_order != 1)
    throw ValidationError("malformed header: byte order must be 0 or 1");
  if (h.header_offset != 0)
    throw ValidationError("nonzero header offset (" +
                          std::to_string(h.header_offset) + ") is not supported");

  if (fields.count("wavelength")) {
    std::istringstream ws(fields["wavelength"]);
    std::string tok;
    while (std::getline(ws, tok, ',')) {
      tok = detail::trim(tok);
      if (tok.empty()) continue;
      try {
        h.wavelengths.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ValidationError("malformed header: bad wavelength entry '" + tok + "'");
      }
    }
    if (static_cast<int>(h.wavelengths.size()) != h.bands)
      throw ValidationError("malformed header: " +
                            std::to_string(h.wavelengths.size()) +
                            " wavelengths for " + std::to_string(h.bands) +
                            " bands");
  }
  return h;
}

namespace detail {

inline std::string default_header_path(const std::string& raw_path) {
  namespace fs = std::filesystem;
  const std::string appended = raw_path + ".hdr";
  if (fs::exists(appended)) return appended;
  fs::path swapped(raw_path);
  swapped.replace_extension(".hdr");
  if (fs::exists(swapped)) return swapped.string();
  return appended;  // let the open fail with a clear message
}

}  // namespace detail

// Reads an ENVI cube (any of bsq/bil/bip, float32 or int16, either byte
// order) into the canonical band-last layout. header_path defaults to
// raw_path + ".hdr", falling back to replacing the extension.
inline HsiCube load_cube(const std::string& raw_path,
                         std::string header_path = "") {
  if (header_path.empty()) header_path = detail::default_header_path(raw_path);
  const EnviHeader h = parse_envi_header(detail::read_file_text(header_path));
  const auto bytes = detail::read_file_bytes(raw_path);
  const std::size_t px = static_cast<std::size_t>(h.samples) * h.lines;
  const std::size_t count = px * h.bands;
  const std::size_t sample_size = h.data_type == 4 ? 4 : 2;
  if (bytes.size() != count * sample_size)
    throw ValidationError("size mismatch: " + raw_path + " holds " +
                          std::to_string(bytes.size()) + " bytes but header " +
                          header_path + " implies " +
                          std::to_string(count * sample_size));

  HsiCube cube;
  cube.width = h.samples;
  cube.height = h.lines;
  cube.bands = h.bands;
  cube.wavelengths = h.wavelengths;
  cube.values.resize(count);

  auto decode = [&](std::size_t src_index) {
    const std::uint8_t* p = bytes.data() + src_index * sample_size;
    if (h.data_type == 4) return static_cast<double>(detail::get_f32(p, h.byte_order));
    return static_cast<double>(
        static_cast<std::int16_t>(detail::get_u16(p, h.byte_order)));
  };
  const std::size_t samples = static_cast<std::size_t>(h.samples);
  const std::size_t lines = static_cast<std::size_t>(h.lines);
  const std::size_t bands = static_cast<std::size_t>(h.bands);
  for (std::size_t y = 0; y < lines; ++y) {
    for (std::size_t x = 0; x < samples; ++x) {
      for (std::size_t b = 0; b < bands; ++b) {
        std::size_t src;
        if (h.interleave == "bsq") src = (b * lines + y) * samples + x;
        else if (h.interleave == "bil") src = (y * bands + b) * samples + x;
        else src = (y * samples + x) * bands + b;
        cube.values[(y * samples + x) * bands + b] = decode(src);
      }
    }
  }
  return cube;
}

// Writes the cube as float32 ENVI raster + header. Returns nothing; the pair
// of files round-trips through load_cube exactly (values are stored as the
// float32 they were cast to).
inline void write_cube(const HsiCube& cube, const std::string& raw_path,
                       const std::string& header_path,
                       const std::string& interleave = "bsq",
                       int byte_order = 0) {
  if (interleave != "bsq" && interleave != "bil" && interleave != "bip")
    throw ValidationError("write_cube: unknown interleave '" + interleave + "'");
  if (byte_order != 0 && byte_order != 1)
    throw ValidationError("write_cube: byte order must be 0 or 1");
  const std::size_t samples = static_cast<std::size_t>(cube.width);
  const std::size_t lines = static_cast<std::size_t>(cube.height);
  const std::size_t bands = static_cast<std::size_t>(cube.bands);
  std::vector<std::uint8_t> bytes(samples * lines * bands * 4);
  for (std::size_t y = 0; y < lines; ++y) {
    for (std::size_t x = 0; x < samples; ++x) {
      for (std::size_t b = 0; b < bands; ++b) {
        std::size_t dst;
        if (interleave == "bsq") dst = (b * lines + y) * samples + x;
        else if (interleave == "bil") dst = (y * bands + b) * samples + x;
        else dst = (y * samples + x) * bands + b;
        detail::put_f32(
            bytes.data() + dst * 4,
            static_cast<float>(cube.values[(y * samples + x) * bands + b]),
            byte_order);
      }
    }
  }
  detail::write_file_bytes(raw_path, bytes.data(), bytes.size());

  std::ostringstream hdr;
  hdr << "ENVI\n";
  hdr << "samples = " << cube.width << "\n";
  hdr << "lines = " << cube.height << "\n";
  hdr << "bands = " << cube.bands << "\n";
  hdr << "header offset = 0\n";
  hdr << "file type = ENVI Standard\n";
  hdr << "data type = 4\n";
  hdr << "interleave = " << interleave << "\n";
  hdr << "byte order = " << byte_order << "\n";
  if (!cube.wavelengths.empty()) {
    hdr << "wavelength = {";
    hdr.precision(6);
    hdr << std::fixed;
    for (std::size_t b = 0; b < cube.wavelengths.size(); ++b)
      hdr << (b ? ", " : " ") << cube.wavelengths[b];
    hdr << " }\n";
  }
  detail::write_file_text(header_path, hdr.str());
}

// Pixels become rows in raster order (x fastest), bands become columns.
inline DataMatrixd unfold_cube(const HsiCube& cube) {
  MatrixX<double> x(static_cast<Index>(cube.pixel_count()),
                    static_cast<Index>(cube.bands));
  const std::size_t bands = static_cast<std::size_t>(cube.bands);
  for (std::size_t j = 0; j < cube.pixel_count(); ++j)
    for (std::size_t b = 0; b < bands; ++b)
      x(static_cast<Index>(j), static_cast<Index>(b)) =
          cube.values[j * bands + b];
  return DataMatrixd(std::move(x), {}, cube.wavelengths);
}

// Inverse of unfold_cube for a matrix whose rows are raster-ordered pixels.
inline HsiCube fold_cube(const DataMatrixd& data, int width, int height) {
  if (static_cast<Index>(width) * height != data.t())
    throw ValidationError("fold_cube: width*height does not match row count");
  HsiCube cube;
  cube.width = width;
  cube.height = height;
  cube.bands = static_cast<int>(data.n());
  cube.wavelengths = data.wavelengths;
  cube.values.resize(cube.pixel_count() * static_cast<std::size_t>(cube.bands));
  const std::size_t bands = static_cast<std::size_t>(cube.bands);
  for (std::size_t j = 0; j < cube.pixel_count(); ++j)
    for (std::size_t b = 0; b < bands; ++b)
      cube.values[j * bands + b] =
          data.values(static_cast<Index>(j), static_cast<Index>(b));
  return cube;
}

// Keeps the columns whose band id is in `keep`, preserving column order.
template <typename Scalar>
DataMatrix<Scalar> subset_bands(const DataMatrix<Scalar>& data,
                                const std::vector<int>& keep) {
  if (keep.empty()) throw ValidationError("subset_bands: empty band selection");
  std::set<int> keep_set(keep.begin(), keep.end());
  for (int id : keep_set) {
    if (std::find(data.band_ids.begin(), data.band_ids.end(), id) ==
        data.band_ids.end())
      throw ValidationError("subset_bands: band id " + std::to_string(id) +
                            " is not present in the data");
  }
  MatrixX<Scalar> x(data.t(), static_cast<Index>(keep_set.size()));
  std::vector<int> ids;
  std::vector<double> wl;
  Index c = 0;
  for (Index j = 0; j < data.n(); ++j) {
    if (!keep_set.count(data.band_ids[static_cast<std::size_t>(j)])) continue;
    x.col(c++) = data.values.col(j);
    ids.push_back(data.band_ids[static_cast<std::size_t>(j)]);
    if (!data.wavelengths.empty())
      wl.push_back(data.wavelengths[static_cast<std::size_t>(j)]);
  }
  return DataMatrix<Scalar>(std::move(x), std::move(ids), std::move(wl));
}

// The standard noisy-band removal for the 224-band Cuprite scene (water
// absorption and detector edges), then the last 50 surviving bands.
inline std::vector<int> cuprite_band_preset(const std::vector<int>& band_ids) {
  std::set<int> drop;
  auto add_range = [&](int a, int b) { for (int i = a; i <= b; ++i) drop.insert(i); };
  add_range(1, 3);
  add_range(104, 113);
  add_range(148, 167);
  add_range(221, 224);
  std::vector<int> surviving;
  for (int id : band_ids)
    if (!drop.count(id)) surviving.push_back(id);
  if (surviving.size() < 50)
    throw ValidationError("cuprite_band_preset: only " +
                          std::to_string(surviving.size()) +
                          " bands survive the removal list; need 50");
  return std::vector<int>(surviving.end() - 50, surviving.end());
}

struct MaskOptions {
  std::set<int> ignore_codes;
  int expect_width = 0;   // 0 = no check
  int expect_height = 0;
};

namespace detail {

inline GroundTruthMask mask_from_codes(const std::vector<int>& codes, int w,
                                       int h, const MaskOptions& opt) {
  GroundTruthMask mask(w, h);
  for (std::size_t j = 0; j < codes.size(); ++j) {
    if (opt.ignore_codes.count(codes[j])) mask.ignore[j] = 1;
    else mask.labels[j] = codes[j] != 0 ? 1 : 0;
  }
  return mask;
}

inline int next_pgm_token(std::istringstream& in, const std::string& path) {
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    try {
      return std::stoi(tok);
    } catch (const std::exception&) {
      throw ValidationError("malformed PGM token '" + tok + "' in " + path);
    }
  }
  throw ValidationError("truncated PGM header in " + path);
}

}  // namespace detail

// Ground truth from PGM (P2 or P5) or CSV of integer codes. Code 0 is
// background, anything else is target, unless listed in ignore_codes.
inline GroundTruthMask load_mask(const std::string& path,
                                 const MaskOptions& opt = {}) {
  const auto bytes = detail::read_file_bytes(path);
  std::vector<int> codes;
  int w = 0, h = 0;
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5')) {
    const bool binary = bytes[1] == '5';
    std::istringstream in(std::string(bytes.begin(), bytes.end()));
    in.ignore(2);
    w = detail::next_pgm_token(in, path);
    h = detail::next_pgm_token(in, path);
    const int maxval = detail::next_pgm_token(in, path);
    if (w < 1 || h < 1 || maxval < 1)
      throw ValidationError("malformed PGM dimensions in " + path);
    if (maxval > 255)
      throw ValidationError("unsupported PGM maxval " + std::to_string(maxval) +
                            " in " + path + " (only single-byte samples)");
    const std::size_t count = static_cast<std::size_t>(w) * h;
    codes.reserve(count);
    if (binary) {
      const std::size_t data_at = static_cast<std::size_t>(in.tellg()) + 1;
      if (bytes.size() < data_at + count)
        throw ValidationError("size mismatch: PGM " + path + " is truncated");
      for (std::size_t j = 0; j < count; ++j)
        codes.push_back(bytes[data_at + j]);
    } else {
      for (std::size_t j = 0; j < count; ++j)
        codes.push_back(detail::next_pgm_token(in, path));
    }
  } else {
    std::istringstream in(std::string(bytes.begin(), bytes.end()));
    std::string line;
    int cols = -1;
    while (std::getline(in, line)) {
      line = detail::trim(line);
      if (line.empty() || line[0] == '#') continue;
      std::istringstream row(line);
      std::string tok;
      int n = 0;
      while (std::getline(row, tok, ',')) {
        tok = detail::trim(tok);
        try {
          codes.push_back(std::stoi(tok));
        } catch (const std::exception&) {
          throw ValidationError("malformed mask CSV value '" + tok + "' in " + path);
        }
        ++n;
      }
      if (cols < 0) cols = n;
      else if (n != cols)
        throw ValidationError("malformed mask CSV: ragged rows in " + path);
      ++h;
    }
    w = cols;
    if (w < 1 || h < 1)
      throw ValidationError("malformed mask CSV: no data in " + path);
  }
  if ((opt.expect_width && w != opt.expect_width) ||
      (opt.expect_height && h != opt.expect_height))
    throw ValidationError("mask " + path + " is " + std::to_string(w) + "x" +
                          std::to_string(h) + " but the scene is " +
                          std::to_string(opt.expect_width) + "x" +
                          std::to_string(opt.expect_height));
  return detail::mask_from_codes(codes, w, h, opt);
}

// Binary PGM with target=255, background=0, ignored=128.
inline void write_mask_pgm(const GroundTruthMask& mask, const std::string& path) {
  std::string out = "P5\n" + std::to_string(mask.width) + " " +
                    std::to_string(mask.height) + "\n255\n";
  const std::size_t head = out.size();
  out.resize(head + mask.labels.size());
  for (std::size_t j = 0; j < mask.labels.size(); ++j)
    out[head + j] = static_cast<char>(mask.ignore[j] ? 128 : (mask.labels[j] ? 255 : 0));
  detail::write_file_bytes(path, reinterpret_cast<const std::uint8_t*>(out.data()),
                           out.size());
}

struct LibrarySpectrum {
  std::vector<double> wavelengths;  // strictly increasing
  std::vector<double> reflectance;
  std::string name;
};

// Two-column CSV (wavelength, reflectance); # starts a comment line.
inline LibrarySpectrum load_spectrum(const std::string& path) {
  std::istringstream in(detail::read_file_text(path));
  LibrarySpectrum spec;
  spec.name = std::filesystem::path(path).stem().string();
  std::string line;
  while (std::getline(in, line)) {
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    double wl, refl;
    char comma;
    if (!(row >> wl >> comma >> refl) || comma != ',')
      throw ValidationError("malformed spectrum row in " + path + ": " + line);
    spec.wavelengths.push_back(wl);
    spec.reflectance.push_back(refl);
  }
  if (spec.wavelengths.size() < 2)
    throw ValidationError("spectrum " + path + " needs at least 2 samples");
  for (std::size_t k = 1; k < spec.wavelengths.size(); ++k)
    if (spec.wavelengths[k] <= spec.wavelengths[k - 1])
      throw ValidationError("spectrum " + path +
                            " wavelengths must be strictly increasing");
  return spec;
}

inline void write_spectrum_csv(const LibrarySpectrum& spec,
                               const std::string& path) {
  std::ostringstream os;
  os << "# wavelength_nm,reflectance\n";
  os.precision(17);
  for (std::size_t k = 0; k < spec.wavelengths.size(); ++k)
    os << spec.wavelengths[k] << "," << spec.reflectance[k] << "\n";
  detail::write_file_text(path, os.str());
}

// Linear interpolation of the library spectrum onto the given band centres.
// Band centres outside the tabulated range are an error (no extrapolation).
inline Signatured resample_signature(const LibrarySpectrum& spec,
                                     const std::vector<double>& wavelengths,
                                     const std::vector<int>& band_ids) {
  if (wavelengths.empty())
    throw ValidationError("resample_signature: no band wavelengths given");
  if (wavelengths.size() != band_ids.size())
    throw ValidationError("resample_signature: wavelengths and band ids disagree");
  Signatured sig;
  sig.name = spec.name;
  sig.band_ids = band_ids;
  sig.values.resize(static_cast<Index>(wavelengths.size()));
  for (std::size_t k = 0; k < wavelengths.size(); ++k) {
    const double wl = wavelengths[k];
    if (wl < spec.wavelengths.front() || wl > spec.wavelengths.back())
      throw ValidationError("resample_signature: band at " + std::to_string(wl) +
                            " nm is outside the spectrum range [" +
                            std::to_string(spec.wavelengths.front()) + ", " +
                            std::to_string(spec.wavelengths.back()) +
                            "]; extrapolation is not supported");
    const auto it = std::lower_bound(spec.wavelengths.begin(),
                                     spec.wavelengths.end(), wl);
    const std::size_t hi = static_cast<std::size_t>(it - spec.wavelengths.begin());
    if (spec.wavelengths[hi] == wl) {
      sig.values(static_cast<Index>(k)) = spec.reflectance[hi];
    } else {
      const std::size_t lo = hi - 1;
      const double f = (wl - spec.wavelengths[lo]) /
                       (spec.wavelengths[hi] - spec.wavelengths[lo]);
      sig.values(static_cast<Index>(k)) =
          (1.0 - f) * spec.reflectance[lo] + f * spec.reflectance[hi];
    }
  }
  return sig;
}

}  // namespace homcsel
