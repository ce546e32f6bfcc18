#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "motionzip/error.hpp"

namespace motionzip {

enum class PixelFormat {
  Gray8,   // one luma plane
  Rgb24,   // packed R,G,B triplets
  Yuv420,  // planar Y, U, V with 2x2 chroma subsampling
  Yuv444,  // planar Y, U, V at full resolution
};

constexpr std::string_view to_string(PixelFormat fmt) {
  switch (fmt) {
    case PixelFormat::Gray8: return "gray8";
    case PixelFormat::Rgb24: return "rgb24";
    case PixelFormat::Yuv420: return "yuv420";
    case PixelFormat::Yuv444: return "yuv444";
  }
  return "unknown";
}

/// Bytes occupied by one frame of the given geometry. YUV420 requires even
/// dimensions; callers validate that before asking.
constexpr std::size_t bytes_per_frame(int width, int height, PixelFormat fmt) {
  const auto pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  switch (fmt) {
    case PixelFormat::Gray8: return pixels;
    case PixelFormat::Rgb24: return 3 * pixels;
    case PixelFormat::Yuv420: return pixels + 2 * (pixels / 4);
    case PixelFormat::Yuv444: return 3 * pixels;
  }
  return 0;
}

struct FrameRate {
  int num = 30;
  int den = 1;

  double fps() const { return static_cast<double>(num) / den; }
  friend bool operator==(const FrameRate&, const FrameRate&) = default;
};

/// Geometry and timing of a video stream.
///
/// `tags` holds the raw header tokens in their original order when the header
/// came from a parsed Y4M stream, so that unknown tags (interlacing, aspect,
/// X-extensions) survive a read/write round trip byte for byte.
struct StreamHeader {
  int width = 0;
  int height = 0;
  FrameRate rate;
  PixelFormat format = PixelFormat::Gray8;
  std::vector<std::string> tags;

  std::size_t frame_bytes() const { return bytes_per_frame(width, height, format); }

  bool same_geometry(const StreamHeader& other) const {
    return width == other.width && height == other.height && format == other.format;
  }

  friend bool operator==(const StreamHeader&, const StreamHeader&) = default;
};

inline void validate(const StreamHeader& h) {
  if (h.width < 1 || h.height < 1) {
    throw Error(Errc::MalformedHeader, "frame dimensions must be positive");
  }
  if (h.rate.num < 1 || h.rate.den < 1) {
    throw Error(Errc::MalformedHeader, "frame rate terms must be positive");
  }
  if (h.format == PixelFormat::Yuv420 && (h.width % 2 != 0 || h.height % 2 != 0)) {
    throw Error(Errc::MalformedHeader, "4:2:0 streams need even dimensions");
  }
}

/// One uncompressed image. `index` is the zero-based position in the stream
/// the frame was read from.
struct Frame {
  std::uint64_t index = 0;
  int width = 0;
  int height = 0;
  PixelFormat format = PixelFormat::Gray8;
  std::vector<std::uint8_t> data;

  Frame() = default;
  Frame(std::uint64_t idx, int w, int h, PixelFormat fmt)
      : index(idx), width(w), height(h), format(fmt), data(bytes_per_frame(w, h, fmt)) {}
  Frame(std::uint64_t idx, int w, int h, PixelFormat fmt, std::vector<std::uint8_t> bytes)
      : index(idx), width(w), height(h), format(fmt), data(std::move(bytes)) {
    if (data.size() != bytes_per_frame(w, h, fmt)) {
      throw Error(Errc::DimensionMismatch, "frame payload size does not match its geometry");
    }
  }

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }

  /// Luma plane for YUV and gray frames. Not meaningful for RGB24.
  std::span<const std::uint8_t> luma() const { return {data.data(), pixel_count()}; }

  bool matches(const StreamHeader& h) const {
    return width == h.width && height == h.height && format == h.format;
  }

  friend bool operator==(const Frame&, const Frame&) = default;
};

}  // namespace motionzip
