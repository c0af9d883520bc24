// Copyright Contributors to the topotrack project.
// SPDX-License-Identifier: Apache-2.0

#include "topotrack/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "topotrack/errors.hpp"

namespace topotrack {

namespace {

// Skips PGM whitespace and '#' comments.
int next_pgm_token(std::istream& in, std::string& token) {
  token.clear();
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (!std::isspace(c)) break;
  }
  if (c == EOF) return 0;
  token.push_back(char(c));
  while ((c = in.get()) != EOF && !std::isspace(c) && c != '#') token.push_back(char(c));
  if (c == '#') in.unget();
  return 1;
}

long parse_pgm_int(std::istream& in, const std::string& path) {
  std::string tok;
  if (!next_pgm_token(in, tok))
    throw IoError(IoError::Kind::Truncated, path + ": truncated PGM header");
  try {
    size_t pos = 0;
    long v = std::stol(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IoError(IoError::Kind::UnsupportedFormat, path + ": malformed PGM header token '" + tok + "'");
  }
}

GrayImage read_pgm(std::istream& in, const std::string& path, bool binary) {
  long w = parse_pgm_int(in, path);
  long h = parse_pgm_int(in, path);
  long maxval = parse_pgm_int(in, path);
  if (w < 1 || h < 1)
    throw IoError(IoError::Kind::UnsupportedFormat, path + ": non-positive PGM dimensions");
  if (maxval < 1 || maxval > 255)
    throw IoError(IoError::Kind::UnsupportedFormat,
                  path + ": only 8-bit PGM is supported (maxval <= 255)");

  GrayImage img{int(w), int(h)};
  if (binary) {
    // Header ends with exactly one whitespace byte before the raster.
    std::vector<unsigned char> buf(size_t(w) * h);
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    if (in.gcount() != std::streamsize(buf.size()))
      throw IoError(IoError::Kind::Truncated, path + ": truncated PGM raster");
    for (size_t i = 0; i < buf.size(); ++i) img.pixels[i] = double(buf[i]) / double(maxval);
  } else {
    for (size_t i = 0; i < img.pixels.size(); ++i) {
      long v = parse_pgm_int(in, path);
      if (v < 0 || v > maxval)
        throw IoError(IoError::Kind::UnsupportedFormat, path + ": PGM sample out of range");
      img.pixels[i] = double(v) / double(maxval);
    }
  }
  return img;
}

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;

  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

GrayImage read_png_gray(const std::string& path) {
  PngReader r;
  r.fp = std::fopen(path.c_str(), "rb");
  if (!r.fp) throw IoError(IoError::Kind::MissingFile, path + ": cannot open");

  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png) throw IoError(IoError::Kind::UnsupportedFormat, path + ": libpng init failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) throw IoError(IoError::Kind::UnsupportedFormat, path + ": libpng init failed");

  if (setjmp(png_jmpbuf(r.png)))
    throw IoError(IoError::Kind::Truncated, path + ": corrupt PNG stream");

  png_init_io(r.png, r.fp);
  png_read_info(r.png, r.info);

  png_uint_32 w = png_get_image_width(r.png, r.info);
  png_uint_32 h = png_get_image_height(r.png, r.info);
  int bit_depth = png_get_bit_depth(r.png, r.info);
  int color_type = png_get_color_type(r.png, r.info);

  if (color_type != PNG_COLOR_TYPE_GRAY)
    throw IoError(IoError::Kind::NotGrayscale, path + ": PNG is not grayscale");
  if (bit_depth > 8)
    throw IoError(IoError::Kind::UnsupportedFormat,
                  path + ": only 8-bit grayscale PNG is supported");
  if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
  png_read_update_info(r.png, r.info);

  GrayImage img{int(w), int(h)};
  std::vector<unsigned char> row(w);
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(r.png, row.data(), nullptr);
    for (png_uint_32 x = 0; x < w; ++x) img.pixels[size_t(y) * w + x] = double(row[x]) / 255.0;
  }
  return img;
}

constexpr unsigned char kPngSignature[4] = {0x89, 'P', 'N', 'G'};

}  // namespace

GrayImage load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoError::Kind::MissingFile, path + ": no such file");

  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  if (in.gcount() < 2) throw IoError(IoError::Kind::Truncated, path + ": file too short");

  if (std::memcmp(magic, kPngSignature, size_t(std::min<std::streamsize>(in.gcount(), 4))) == 0 &&
      in.gcount() == 4) {
    in.close();
    return read_png_gray(path);
  }
  if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '2') && std::isspace(magic[2])) {
    in.seekg(2);
    return read_pgm(in, path, magic[1] == '5');
  }
  throw IoError(IoError::Kind::UnsupportedFormat, path + ": not a PGM (P5/P2) or PNG file");
}

void write_pgm(const std::string& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(IoError::Kind::WriteFailure, path + ": cannot open for writing");
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> buf(img.pixels.size());
  for (size_t i = 0; i < buf.size(); ++i) {
    double v = std::clamp(img.pixels[i], 0.0, 1.0);
    buf[i] = (unsigned char)std::lround(v * 255.0);
  }
  out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  if (!out) throw IoError(IoError::Kind::WriteFailure, path + ": write failed");
}

void write_pgm(const std::string& path, const ScalarField& field) {
  double lo = field.values.empty() ? 0.0 : *std::min_element(field.values.begin(), field.values.end());
  double hi = field.values.empty() ? 1.0 : *std::max_element(field.values.begin(), field.values.end());
  double span = hi - lo;
  GrayImage img(field.width, field.height);
  for (size_t i = 0; i < field.values.size(); ++i)
    img.pixels[i] = span > 0.0 ? (field.values[i] - lo) / span : 0.0;
  write_pgm(path, img);
}

void write_pgm16(const std::string& path, int width, int height,
                 const std::vector<uint16_t>& values) {
  if (values.size() != size_t(width) * height)
    throw ConfigError("write_pgm16: value count does not match dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(IoError::Kind::WriteFailure, path + ": cannot open for writing");
  out << "P5\n" << width << " " << height << "\n65535\n";
  std::vector<unsigned char> buf(values.size() * 2);
  for (size_t i = 0; i < values.size(); ++i) {
    buf[2 * i] = (unsigned char)(values[i] >> 8);  // most significant byte first
    buf[2 * i + 1] = (unsigned char)(values[i] & 0xff);
  }
  out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  if (!out) throw IoError(IoError::Kind::WriteFailure, path + ": write failed");
}

namespace {

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;

  ~PngWriter() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

void write_png_rows(const std::string& path, int width, int height, int color_type,
                    const unsigned char* data, size_t stride) {
  PngWriter w;
  w.fp = std::fopen(path.c_str(), "wb");
  if (!w.fp) throw IoError(IoError::Kind::WriteFailure, path + ": cannot open for writing");
  w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!w.png) throw IoError(IoError::Kind::WriteFailure, path + ": libpng init failed");
  w.info = png_create_info_struct(w.png);
  if (!w.info) throw IoError(IoError::Kind::WriteFailure, path + ": libpng init failed");
  if (setjmp(png_jmpbuf(w.png)))
    throw IoError(IoError::Kind::WriteFailure, path + ": PNG write failed");

  png_init_io(w.png, w.fp);
  png_set_IHDR(w.png, w.info, png_uint_32(width), png_uint_32(height), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  for (int y = 0; y < height; ++y)
    png_write_row(w.png, const_cast<png_bytep>(data + size_t(y) * stride));
  png_write_end(w.png, nullptr);
}

}  // namespace

void write_png(const std::string& path, const GrayImage& img) {
  std::vector<unsigned char> buf(img.pixels.size());
  for (size_t i = 0; i < buf.size(); ++i)
    buf[i] = (unsigned char)std::lround(std::clamp(img.pixels[i], 0.0, 1.0) * 255.0);
  write_png_rows(path, img.width, img.height, PNG_COLOR_TYPE_GRAY, buf.data(), size_t(img.width));
}

void write_png(const std::string& path, const RgbImage& img) {
  write_png_rows(path, img.width, img.height, PNG_COLOR_TYPE_RGB, img.data.data(),
                 size_t(img.width) * 3);
}

}  // namespace topotrack
