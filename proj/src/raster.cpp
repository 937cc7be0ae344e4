#include "safe/raster.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>

#include "safe/error.hpp"

namespace safe {
namespace {

enum Tag : std::uint16_t {
  kImageWidth = 256,
  kImageLength = 257,
  kBitsPerSample = 258,
  kCompression = 259,
  kPhotometric = 262,
  kStripOffsets = 273,
  kSamplesPerPixel = 277,
  kRowsPerStrip = 278,
  kStripByteCounts = 279,
  kPlanarConfig = 284,
  kPredictor = 317,
  kTileWidth = 322,
  kTileLength = 323,
  kTileOffsets = 324,
  kTileByteCounts = 325,
  kSampleFormat = 339,
  kModelPixelScale = 33550,
  kModelTiepoint = 33922,
  kModelTransformation = 34264,
  kGeoKeyDirectory = 34735,
  kGdalNodata = 42113,
};

enum GeoKey : std::uint16_t {
  kModelType = 1024,
  kRasterType = 1025,
  kGeographicType = 2048,
  kProjectedCsType = 3072,
  kProjLinearUnits = 3076,
  kVerticalUnits = 4099,
};

constexpr int kUnitMetre = 9001;

[[noreturn]] void malformed(const std::string& what) {
  fail(Errc::MalformedRaster, "malformed GeoTIFF: " + what);
}

std::size_t type_size(std::uint16_t type) {
  switch (type) {
    case 1: case 2: case 6: case 7: return 1;
    case 3: case 8: return 2;
    case 4: case 9: case 11: return 4;
    case 5: case 10: case 12: return 8;
    default: return 0;
  }
}

class ByteReader {
 public:
  ByteReader(std::vector<std::uint8_t> bytes, bool little) : bytes_(std::move(bytes)), little_(little) {}

  std::size_t size() const { return bytes_.size(); }
  const std::uint8_t* at(std::size_t offset, std::size_t n) const {
    if (offset > bytes_.size() || n > bytes_.size() - offset) malformed("offset beyond end of file");
    return bytes_.data() + offset;
  }

  std::uint64_t uint(std::size_t offset, std::size_t n) const {
    const std::uint8_t* p = at(offset, n);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = little_ ? n - 1 - i : i;
      v = (v << 8) | p[k];
    }
    return v;
  }

  bool little() const { return little_; }

 private:
  std::vector<std::uint8_t> bytes_;
  bool little_;
};

struct Entry {
  std::uint16_t type = 0;
  std::uint32_t count = 0;
  std::size_t data_offset = 0;
};

double read_scalar(const ByteReader& r, std::uint16_t type, std::size_t off) {
  switch (type) {
    case 1: case 7: return static_cast<double>(r.uint(off, 1));
    case 6: return static_cast<double>(static_cast<std::int8_t>(r.uint(off, 1)));
    case 3: return static_cast<double>(r.uint(off, 2));
    case 8: return static_cast<double>(static_cast<std::int16_t>(r.uint(off, 2)));
    case 4: return static_cast<double>(r.uint(off, 4));
    case 9: return static_cast<double>(static_cast<std::int32_t>(r.uint(off, 4)));
    case 5: {
      const double den = static_cast<double>(r.uint(off + 4, 4));
      return den == 0.0 ? 0.0 : static_cast<double>(r.uint(off, 4)) / den;
    }
    case 10: {
      const auto num = static_cast<std::int32_t>(r.uint(off, 4));
      const auto den = static_cast<std::int32_t>(r.uint(off + 4, 4));
      return den == 0 ? 0.0 : static_cast<double>(num) / den;
    }
    case 11: return static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(r.uint(off, 4))));
    case 12: return std::bit_cast<double>(r.uint(off, 8));
    default: malformed("unsupported tag type " + std::to_string(type));
  }
}

class Directory {
 public:
  Directory(const ByteReader& r, std::size_t ifd_offset) : r_(r) {
    const std::size_t n = r.uint(ifd_offset, 2);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t e = ifd_offset + 2 + 12 * i;
      Entry entry;
      const auto tag = static_cast<std::uint16_t>(r.uint(e, 2));
      entry.type = static_cast<std::uint16_t>(r.uint(e + 2, 2));
      entry.count = static_cast<std::uint32_t>(r.uint(e + 4, 4));
      const std::size_t sz = type_size(entry.type);
      if (sz == 0) continue;  // unknown types are skipped, as libtiff does
      const std::size_t total = sz * entry.count;
      entry.data_offset = total <= 4 ? e + 8 : static_cast<std::size_t>(r.uint(e + 8, 4));
      entries_[tag] = entry;
    }
  }

  bool has(std::uint16_t tag) const { return entries_.count(tag) != 0; }

  std::vector<double> numbers(std::uint16_t tag) const {
    auto it = entries_.find(tag);
    if (it == entries_.end()) return {};
    const Entry& e = it->second;
    const std::size_t sz = type_size(e.type);
    std::vector<double> out;
    out.reserve(e.count);
    r_.at(e.data_offset, sz * e.count);
    for (std::size_t i = 0; i < e.count; ++i) out.push_back(read_scalar(r_, e.type, e.data_offset + i * sz));
    return out;
  }

  std::uint64_t number(std::uint16_t tag, std::uint64_t fallback) const {
    auto v = numbers(tag);
    return v.empty() ? fallback : static_cast<std::uint64_t>(v.front());
  }

  std::string ascii(std::uint16_t tag) const {
    auto it = entries_.find(tag);
    if (it == entries_.end()) return {};
    const Entry& e = it->second;
    const auto* p = r_.at(e.data_offset, e.count);
    std::string s(reinterpret_cast<const char*>(p), e.count);
    while (!s.empty() && (s.back() == '\0' || std::isspace(static_cast<unsigned char>(s.back())))) s.pop_back();
    return s;
  }

 private:
  const ByteReader& r_;
  std::map<std::uint16_t, Entry> entries_;
};

std::vector<std::uint8_t> lzw_decode(const std::uint8_t* src, std::size_t n, std::size_t expected) {
  std::vector<std::uint8_t> out;
  out.reserve(expected);
  std::vector<std::vector<std::uint8_t>> table;
  auto reset = [&] {
    table.assign(258, {});
    for (int i = 0; i < 256; ++i) table[i] = {static_cast<std::uint8_t>(i)};
  };
  reset();
  std::size_t bitpos = 0;
  int width = 9;
  auto next_code = [&]() -> int {
    if (bitpos + width > n * 8) return 257;
    int code = 0;
    for (int i = 0; i < width; ++i, ++bitpos) {
      code = (code << 1) | ((src[bitpos >> 3] >> (7 - (bitpos & 7))) & 1);
    }
    return code;
  };
  auto grow = [&] {
    // Early change: widen one code before the table fills the current width.
    if (table.size() + 1 >= (std::size_t{1} << width) && width < 12) ++width;
  };
  int old = -1;
  while (out.size() < expected) {
    int code = next_code();
    if (code == 257) break;
    if (code == 256) {
      reset();
      width = 9;
      code = next_code();
      if (code == 257) break;
      if (code > 255) malformed("invalid LZW stream");
      out.push_back(static_cast<std::uint8_t>(code));
      old = code;
      continue;
    }
    if (old < 0) malformed("invalid LZW stream");
    std::vector<std::uint8_t> entry;
    if (static_cast<std::size_t>(code) < table.size()) {
      entry = table[code];
      auto added = table[old];
      added.push_back(entry.front());
      table.push_back(std::move(added));
    } else if (static_cast<std::size_t>(code) == table.size()) {
      entry = table[old];
      entry.push_back(entry.front());
      table.push_back(entry);
    } else {
      malformed("invalid LZW code");
    }
    grow();
    out.insert(out.end(), entry.begin(), entry.end());
    old = code;
  }
  out.resize(expected, 0);
  return out;
}

std::vector<std::uint8_t> inflate_block(const std::uint8_t* src, std::size_t n, std::size_t expected) {
  std::vector<std::uint8_t> out(expected);
  uLongf len = static_cast<uLongf>(expected);
  const int rc = uncompress(out.data(), &len, src, static_cast<uLong>(n));
  if (rc != Z_OK && rc != Z_BUF_ERROR) malformed("deflate stream error");
  return out;
}

struct Layout {
  std::size_t width = 0, height = 0;
  std::size_t bytes_per_sample = 0;
  int sample_format = 1;
  int predictor = 1;
  bool little = true;
};

void undo_predictor(std::vector<std::uint8_t>& block, std::size_t block_width, std::size_t rows, const Layout& L) {
  const std::size_t bps = L.bytes_per_sample;
  const std::size_t row_bytes = block_width * bps;
  if (L.predictor == 2) {
    for (std::size_t r = 0; r < rows; ++r) {
      std::uint8_t* row = block.data() + r * row_bytes;
      for (std::size_t c = 1; c < block_width; ++c) {
        std::uint64_t prev = 0, cur = 0;
        for (std::size_t b = 0; b < bps; ++b) {
          const std::size_t k = L.little ? bps - 1 - b : b;
          prev = (prev << 8) | row[(c - 1) * bps + k];
          cur = (cur << 8) | row[c * bps + k];
        }
        std::uint64_t sum = prev + cur;
        for (std::size_t b = 0; b < bps; ++b) {
          const std::size_t k = L.little ? b : bps - 1 - b;
          row[c * bps + k] = static_cast<std::uint8_t>(sum >> (8 * b));
        }
      }
    }
  } else if (L.predictor == 3) {
    std::vector<std::uint8_t> tmp(row_bytes);
    for (std::size_t r = 0; r < rows; ++r) {
      std::uint8_t* row = block.data() + r * row_bytes;
      for (std::size_t i = 1; i < row_bytes; ++i) row[i] = static_cast<std::uint8_t>(row[i] + row[i - 1]);
      std::copy(row, row + row_bytes, tmp.begin());
      // Byte planes are stored most-significant first; rebuild in file order.
      for (std::size_t c = 0; c < block_width; ++c) {
        for (std::size_t b = 0; b < bps; ++b) {
          const std::size_t k = L.little ? bps - 1 - b : b;
          row[c * bps + k] = tmp[b * block_width + c];
        }
      }
    }
  } else if (L.predictor != 1) {
    malformed("unsupported predictor " + std::to_string(L.predictor));
  }
}

double decode_sample(const std::uint8_t* p, const Layout& L) {
  std::uint64_t v = 0;
  const std::size_t n = L.bytes_per_sample;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = L.little ? n - 1 - i : i;
    v = (v << 8) | p[k];
  }
  switch (L.sample_format) {
    case 3:
      if (n == 4) return static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(v)));
      if (n == 8) return std::bit_cast<double>(v);
      break;
    case 2:
      if (n == 1) return static_cast<std::int8_t>(v);
      if (n == 2) return static_cast<std::int16_t>(v);
      if (n == 4) return static_cast<std::int32_t>(v);
      break;
    case 1:
      return static_cast<double>(v);
    default:
      break;
  }
  malformed("unsupported sample format");
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(Errc::FileMissing, "no such file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

RasterData read_geotiff(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  if (bytes.size() < 8) malformed("file too small");
  bool little;
  if (bytes[0] == 'I' && bytes[1] == 'I') little = true;
  else if (bytes[0] == 'M' && bytes[1] == 'M') little = false;
  else malformed("not a TIFF file");
  ByteReader r(std::move(bytes), little);
  const auto magic = r.uint(2, 2);
  if (magic == 43) malformed("BigTIFF is not supported");
  if (magic != 42) malformed("bad TIFF magic");
  Directory dir(r, r.uint(4, 4));

  Layout L;
  L.little = little;
  L.width = dir.number(kImageWidth, 0);
  L.height = dir.number(kImageLength, 0);
  if (L.width == 0 || L.height == 0) malformed("missing image dimensions");
  if (dir.number(kSamplesPerPixel, 1) != 1) malformed("only single-band rasters are supported");
  const auto bits = dir.number(kBitsPerSample, 1);
  if (bits % 8 != 0 || bits == 0 || bits > 64) malformed("unsupported bit depth");
  L.bytes_per_sample = bits / 8;
  L.sample_format = static_cast<int>(dir.number(kSampleFormat, 1));
  L.predictor = static_cast<int>(dir.number(kPredictor, 1));
  const auto compression = dir.number(kCompression, 1);
  if (compression != 1 && compression != 5 && compression != 8 && compression != 32946) {
    malformed("unsupported compression " + std::to_string(compression));
  }

  const bool tiled = dir.has(kTileOffsets);
  const std::size_t block_w = tiled ? dir.number(kTileWidth, 0) : L.width;
  const std::size_t block_h = tiled ? dir.number(kTileLength, 0) : std::min<std::size_t>(dir.number(kRowsPerStrip, L.height), L.height);
  if (block_w == 0 || block_h == 0) malformed("bad block size");
  const auto offsets = dir.numbers(tiled ? kTileOffsets : kStripOffsets);
  const auto counts = dir.numbers(tiled ? kTileByteCounts : kStripByteCounts);
  const std::size_t blocks_across = (L.width + block_w - 1) / block_w;
  const std::size_t blocks_down = (L.height + block_h - 1) / block_h;
  if (offsets.size() < blocks_across * blocks_down || counts.size() < offsets.size()) malformed("block table too short");

  RasterData out;
  out.width = L.width;
  out.height = L.height;
  out.values.assign(L.width * L.height, 0.0);
  const std::size_t block_bytes = block_w * block_h * L.bytes_per_sample;
  for (std::size_t by = 0; by < blocks_down; ++by) {
    for (std::size_t bx = 0; bx < blocks_across; ++bx) {
      const std::size_t idx = by * blocks_across + bx;
      const auto off = static_cast<std::size_t>(offsets[idx]);
      const auto cnt = static_cast<std::size_t>(counts[idx]);
      const std::uint8_t* src = r.at(off, cnt);
      std::vector<std::uint8_t> block;
      if (compression == 1) {
        block.assign(src, src + std::min(cnt, block_bytes));
        block.resize(block_bytes, 0);
      } else if (compression == 5) {
        block = lzw_decode(src, cnt, block_bytes);
      } else {
        block = inflate_block(src, cnt, block_bytes);
      }
      undo_predictor(block, block_w, block_h, L);
      for (std::size_t y = 0; y < block_h; ++y) {
        const std::size_t row = by * block_h + y;
        if (row >= L.height) break;
        for (std::size_t x = 0; x < block_w; ++x) {
          const std::size_t col = bx * block_w + x;
          if (col >= L.width) break;
          out.values[row * L.width + col] = decode_sample(block.data() + (y * block_w + x) * L.bytes_per_sample, L);
        }
      }
    }
  }

  // Georeferencing.
  int raster_type = 1;
  int model_type = 0;
  const auto keys = dir.numbers(kGeoKeyDirectory);
  if (keys.size() >= 4) {
    const std::size_t nkeys = static_cast<std::size_t>(keys[3]);
    for (std::size_t k = 0; k < nkeys && 4 + 4 * k + 3 < keys.size(); ++k) {
      const auto id = static_cast<int>(keys[4 + 4 * k]);
      const auto location = static_cast<int>(keys[4 + 4 * k + 1]);
      const auto value = static_cast<int>(keys[4 + 4 * k + 3]);
      if (location != 0) continue;  // only inline SHORT values are used below
      switch (id) {
        case kModelType: model_type = value; break;
        case kRasterType: raster_type = value; break;
        case kGeographicType: if (model_type != 1) out.epsg = value; break;
        case kProjectedCsType: out.epsg = value; break;
        case kProjLinearUnits:
          if (value != kUnitMetre) malformed("projected linear units are not metres");
          break;
        case kVerticalUnits: out.vertical_units = value; break;
        default: break;
      }
    }
  }
  if (dir.has(kModelTransformation)) {
    const auto m = dir.numbers(kModelTransformation);
    if (m.size() < 16) malformed("short model transformation");
    out.transform = GeoTransform{m[3], m[0], m[1], m[7], m[4], m[5]};
  } else if (dir.has(kModelTiepoint) && dir.has(kModelPixelScale)) {
    const auto tp = dir.numbers(kModelTiepoint);
    const auto sc = dir.numbers(kModelPixelScale);
    if (tp.size() < 6 || sc.size() < 2) malformed("short tiepoint or pixel scale");
    GeoTransform gt;
    gt.pixel_width = sc[0];
    gt.pixel_height = -sc[1];
    gt.origin_x = tp[3] - tp[0] * sc[0];
    gt.origin_y = tp[4] + tp[1] * sc[1];
    out.transform = gt;
  }
  if (out.transform && raster_type == 2) {
    // PixelIsPoint: tiepoints address pixel centres.
    out.transform->origin_x -= 0.5 * (out.transform->pixel_width + out.transform->row_rotation);
    out.transform->origin_y -= 0.5 * (out.transform->col_rotation + out.transform->pixel_height);
  }

  if (const std::string nd = dir.ascii(kGdalNodata); !nd.empty()) {
    try {
      out.nodata = std::stod(nd);
    } catch (const std::exception&) {
      if (nd == "nan" || nd == "NaN") out.nodata = std::nan("");
      else malformed("unparseable nodata value '" + nd + "'");
    }
  }
  return out;
}

namespace {

class TiffWriter {
 public:
  void add(std::uint16_t tag, std::uint16_t type, std::uint32_t count, std::vector<std::uint8_t> payload) {
    entries_[tag] = {type, count, std::move(payload)};
  }
  void add_short(std::uint16_t tag, std::vector<std::uint16_t> v) {
    std::vector<std::uint8_t> p;
    for (auto x : v) put(p, x, 2);
    add(tag, 3, static_cast<std::uint32_t>(v.size()), std::move(p));
  }
  void add_long(std::uint16_t tag, std::uint32_t v) {
    std::vector<std::uint8_t> p;
    put(p, v, 4);
    add(tag, 4, 1, std::move(p));
  }
  void add_double(std::uint16_t tag, const std::vector<double>& v) {
    std::vector<std::uint8_t> p;
    for (double x : v) put(p, std::bit_cast<std::uint64_t>(x), 8);
    add(tag, 12, static_cast<std::uint32_t>(v.size()), std::move(p));
  }
  void add_ascii(std::uint16_t tag, const std::string& s) {
    std::vector<std::uint8_t> p(s.begin(), s.end());
    p.push_back(0);
    const auto count = static_cast<std::uint32_t>(p.size());
    add(tag, 2, count, std::move(p));
  }

  std::vector<std::uint8_t> finish(const std::vector<std::uint8_t>& image) {
    // Layout: header | image | IFD | out-of-line values. Strip offset is 8.
    std::vector<std::uint8_t> out{'I', 'I', 42, 0};
    const std::size_t ifd_offset = 8 + image.size() + (image.size() % 2);
    put(out, static_cast<std::uint32_t>(ifd_offset), 4);
    out.insert(out.end(), image.begin(), image.end());
    if (image.size() % 2) out.push_back(0);
    std::size_t extra = ifd_offset + 2 + 12 * entries_.size() + 4;
    std::vector<std::uint8_t> tail;
    put(out, static_cast<std::uint16_t>(entries_.size()), 2);
    for (const auto& [tag, e] : entries_) {
      put(out, tag, 2);
      put(out, e.type, 2);
      put(out, e.count, 4);
      if (e.payload.size() <= 4) {
        auto p = e.payload;
        p.resize(4, 0);
        out.insert(out.end(), p.begin(), p.end());
      } else {
        put(out, static_cast<std::uint32_t>(extra + tail.size()), 4);
        tail.insert(tail.end(), e.payload.begin(), e.payload.end());
        if (tail.size() % 2) tail.push_back(0);
      }
    }
    put(out, std::uint32_t{0}, 4);
    out.insert(out.end(), tail.begin(), tail.end());
    return out;
  }

  static void put(std::vector<std::uint8_t>& p, std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) p.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

 private:
  struct Pending {
    std::uint16_t type;
    std::uint32_t count;
    std::vector<std::uint8_t> payload;
  };
  std::map<std::uint16_t, Pending> entries_;
};

}  // namespace

void write_geotiff(const std::filesystem::path& path, const RasterData& raster) {
  if (raster.width == 0 || raster.height == 0 || raster.values.size() != raster.width * raster.height) {
    fail(Errc::InvalidParameter, "raster dimensions do not match value count");
  }
  std::vector<std::uint8_t> image;
  image.reserve(raster.values.size() * 4);
  for (double v : raster.values) TiffWriter::put(image, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);

  TiffWriter w;
  w.add_long(kImageWidth, static_cast<std::uint32_t>(raster.width));
  w.add_long(kImageLength, static_cast<std::uint32_t>(raster.height));
  w.add_short(kBitsPerSample, {32});
  w.add_short(kCompression, {1});
  w.add_short(kPhotometric, {1});
  w.add_long(kStripOffsets, 8);
  w.add_short(kSamplesPerPixel, {1});
  w.add_long(kRowsPerStrip, static_cast<std::uint32_t>(raster.height));
  w.add_long(kStripByteCounts, static_cast<std::uint32_t>(image.size()));
  w.add_short(kPlanarConfig, {1});
  w.add_short(kSampleFormat, {3});
  if (raster.transform) {
    const GeoTransform& t = *raster.transform;
    if (t.row_rotation == 0.0 && t.col_rotation == 0.0) {
      w.add_double(kModelPixelScale, {t.pixel_width, -t.pixel_height, 0.0});
      w.add_double(kModelTiepoint, {0.0, 0.0, 0.0, t.origin_x, t.origin_y, 0.0});
    } else {
      w.add_double(kModelTransformation, {t.pixel_width, t.row_rotation, 0.0, t.origin_x, t.col_rotation,
                                          t.pixel_height, 0.0, t.origin_y, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                                          0.0, 1.0});
    }
  }
  if (raster.epsg != 0) {
    const bool geographic = raster.epsg == 4326 || raster.epsg == 4269 || raster.epsg == 4617;
    std::vector<std::uint16_t> keys{1, 1, 0, 0};
    auto key = [&](std::uint16_t id, std::uint16_t value) {
      keys.insert(keys.end(), {id, 0, 1, value});
      ++keys[3];
    };
    key(kModelType, geographic ? 2 : 1);
    key(kRasterType, 1);
    if (geographic) key(kGeographicType, static_cast<std::uint16_t>(raster.epsg));
    else key(kProjectedCsType, static_cast<std::uint16_t>(raster.epsg));
    if (!geographic) key(kProjLinearUnits, kUnitMetre);
    if (raster.vertical_units) key(kVerticalUnits, static_cast<std::uint16_t>(*raster.vertical_units));
    w.add_short(kGeoKeyDirectory, keys);
  }
  if (raster.nodata) {
    std::ostringstream s;
    s.precision(17);
    s << *raster.nodata;
    w.add_ascii(kGdalNodata, s.str());
  }
  const auto bytes = w.finish(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::IoError, "write failed for " + path.string());
}

}  // namespace safe
