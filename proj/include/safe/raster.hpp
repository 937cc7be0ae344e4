#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

namespace safe {

// GDAL-ordered affine transform:
//   x = origin_x + col * pixel_width + row * row_rotation
//   y = origin_y + col * col_rotation + row * pixel_height
struct GeoTransform {
  double origin_x = 0.0;
  double pixel_width = 1.0;
  double row_rotation = 0.0;
  double origin_y = 0.0;
  double col_rotation = 0.0;
  double pixel_height = -1.0;

  friend bool operator==(const GeoTransform&, const GeoTransform&) = default;
};

// Single-band raster as stored in a GeoTIFF file.
struct RasterData {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;  // row-major, height * width
  std::optional<GeoTransform> transform;
  int epsg = 0;  // 0 when the file declares no coordinate system
  std::optional<double> nodata;
  std::optional<int> vertical_units;  // EPSG unit-of-measure code
};

// Reads baseline single-band GeoTIFF (classic TIFF, strips or tiles,
// uncompressed / LZW / deflate, predictors 1-3, integer or float samples).
// Throws FileMissing, MalformedRaster or IoError.
RasterData read_geotiff(const std::filesystem::path& path);

// Writes an uncompressed little-endian float32 GeoTIFF.
void write_geotiff(const std::filesystem::path& path, const RasterData& raster);

}  // namespace safe
