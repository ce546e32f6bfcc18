#pragma once

// Compression and pixel-change statistics, with JSON and table renderings.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "motionzip/error.hpp"
#include "motionzip/frame.hpp"
#include "motionzip/motion.hpp"
#include "motionzip/stream.hpp"

namespace motionzip {

/// Half-up rounding to two decimals, the precision reductions are quoted at.
inline double round2(double value) { return std::floor(value * 100.0 + 0.5) / 100.0; }

namespace detail {

inline double reduction_pct(double before, double after, const char* what) {
  if (before <= 0) throw Error(Errc::ZeroInput, std::string("no input ") + what);
  if (after < 0 || after > before) {
    throw Error(Errc::InvalidArgument,
                std::string("processed ") + what + " must lie between 0 and the input " + what);
  }
  return round2(100.0 * (before - after) / before);
}

}  // namespace detail

inline double frame_reduction(std::uint64_t frames_in, std::uint64_t frames_out) {
  return detail::reduction_pct(static_cast<double>(frames_in), static_cast<double>(frames_out),
                               "frames");
}

/// Accepts any byte unit (bytes, MB) as long as both sides agree.
inline double size_reduction(double bytes_in, double bytes_out) {
  return detail::reduction_pct(bytes_in, bytes_out, "bytes");
}

struct PixelChangeSeries {
  int threshold = 0;
  std::vector<double> per_frame_pct;  // one value per adjacent pair
  double mean_pct = 0;
  double median_pct = 0;

  friend bool operator==(const PixelChangeSeries&, const PixelChangeSeries&) = default;
};

inline double median_of(std::vector<double> values) {
  if (values.empty()) return 0;
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lower + upper) / 2.0;
}

/// Percentage of full-resolution luma pixels whose change between adjacent
/// frames exceeds `threshold`. Frames are fed one at a time.
class PixelChangeAccumulator {
 public:
  explicit PixelChangeAccumulator(int threshold) : threshold_(threshold) {
    if (threshold < 0 || threshold > 255) {
      throw Error(Errc::InvalidArgument, "pixel-change threshold must lie in [0, 255]");
    }
  }

  void add(const Frame& frame) {
    GrayFrame gray = to_grayscale(frame);
    if (prev_) {
      if (prev_->width != gray.width || prev_->height != gray.height) {
        throw Error(Errc::DimensionMismatch, "frame size changes mid-stream");
      }
      std::size_t changed = 0;
      for (std::size_t i = 0; i < gray.data.size(); ++i) {
        const int d = static_cast<int>(gray.data[i]) - static_cast<int>(prev_->data[i]);
        changed += static_cast<std::size_t>((d < 0 ? -d : d) > threshold_);
      }
      series_.push_back(100.0 * static_cast<double>(changed) /
                        static_cast<double>(gray.data.size()));
    }
    prev_ = std::move(gray);
  }

  PixelChangeSeries finish() const {
    if (series_.empty()) {
      throw Error(Errc::TooFewFrames, "pixel change needs at least two frames");
    }
    PixelChangeSeries out;
    out.threshold = threshold_;
    out.per_frame_pct = series_;
    out.mean_pct = std::accumulate(series_.begin(), series_.end(), 0.0) /
                   static_cast<double>(series_.size());
    out.median_pct = median_of(series_);
    return out;
  }

 private:
  int threshold_;
  std::optional<GrayFrame> prev_;
  std::vector<double> series_;
};

inline PixelChangeSeries pixel_change_series(const std::vector<Frame>& frames, int threshold) {
  PixelChangeAccumulator acc(threshold);
  for (const auto& f : frames) acc.add(f);
  return acc.finish();
}

inline PixelChangeSeries pixel_change_series(FrameSource& source, int threshold) {
  PixelChangeAccumulator acc(threshold);
  while (auto f = source.next()) acc.add(*f);
  source.close();
  return acc.finish();
}

struct CompressionStats {
  std::uint64_t frames_in = 0;
  std::uint64_t frames_out = 0;
  std::optional<std::uint64_t> bytes_in;
  std::optional<std::uint64_t> bytes_out;  // compressed video plus sidecar
  std::optional<PixelChangeSeries> pixel_change;

  double frame_reduction_pct() const { return frame_reduction(frames_in, frames_out); }

  std::optional<double> size_reduction_pct() const {
    if (!bytes_in || !bytes_out) return std::nullopt;
    return size_reduction(static_cast<double>(*bytes_in), static_cast<double>(*bytes_out));
  }

  friend bool operator==(const CompressionStats&, const CompressionStats&) = default;
};

inline nlohmann::ordered_json pixel_change_to_json(const PixelChangeSeries& pc) {
  nlohmann::ordered_json p;
  p["threshold"] = pc.threshold;
  p["mean_pct"] = round2(pc.mean_pct);
  p["median_pct"] = round2(pc.median_pct);
  p["per_frame_pct"] = pc.per_frame_pct;
  return p;
}

/// JSON with a fixed key order. Reductions, mean and median at two decimals;
/// the per-frame series is kept at full precision for plotting.
inline nlohmann::ordered_json stats_to_json(const CompressionStats& s) {
  nlohmann::ordered_json j;
  j["frames_in"] = s.frames_in;
  j["frames_out"] = s.frames_out;
  j["frame_reduction_pct"] = s.frame_reduction_pct();
  if (auto size = s.size_reduction_pct()) {
    j["bytes_in"] = *s.bytes_in;
    j["bytes_out"] = *s.bytes_out;
    j["size_reduction_pct"] = *size;
  }
  if (s.pixel_change) j["pixel_change"] = pixel_change_to_json(*s.pixel_change);
  return j;
}

/// Inverse of stats_to_json for the measured fields; derived percentages
/// are recomputed, and the pixel-change mean/median come from the series.
inline CompressionStats stats_from_json(const nlohmann::json& j) {
  try {
    CompressionStats s;
    s.frames_in = j.at("frames_in").get<std::uint64_t>();
    s.frames_out = j.at("frames_out").get<std::uint64_t>();
    if (j.contains("bytes_in")) s.bytes_in = j.at("bytes_in").get<std::uint64_t>();
    if (j.contains("bytes_out")) s.bytes_out = j.at("bytes_out").get<std::uint64_t>();
    if (j.contains("pixel_change")) {
      const auto& p = j.at("pixel_change");
      PixelChangeSeries pc;
      pc.threshold = p.at("threshold").get<int>();
      pc.per_frame_pct = p.at("per_frame_pct").get<std::vector<double>>();
      if (!pc.per_frame_pct.empty()) {
        pc.mean_pct = std::accumulate(pc.per_frame_pct.begin(), pc.per_frame_pct.end(), 0.0) /
                      static_cast<double>(pc.per_frame_pct.size());
        pc.median_pct = median_of(pc.per_frame_pct);
      }
      s.pixel_change = std::move(pc);
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("stats json: ") + e.what());
  }
}

inline std::string format_pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

/// Human-readable table in the layout of a per-dataset results row.
inline std::string stats_table(const CompressionStats& s) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %14s %14s %12s\n", "", "raw", "processed", "reduc. (%)");
  out += line;
  std::snprintf(line, sizeof line, "%-22s %14llu %14llu %12s\n", "frames",
                static_cast<unsigned long long>(s.frames_in),
                static_cast<unsigned long long>(s.frames_out),
                format_pct(s.frame_reduction_pct()).c_str());
  out += line;
  if (auto size = s.size_reduction_pct()) {
    std::snprintf(line, sizeof line, "%-22s %14llu %14llu %12s\n", "file size (bytes)",
                  static_cast<unsigned long long>(*s.bytes_in),
                  static_cast<unsigned long long>(*s.bytes_out), format_pct(*size).c_str());
    out += line;
  }
  if (s.pixel_change) {
    std::snprintf(line, sizeof line, "pixel change > %d: mean %s%%, median %s%% over %zu pairs\n",
                  s.pixel_change->threshold, format_pct(s.pixel_change->mean_pct).c_str(),
                  format_pct(s.pixel_change->median_pct).c_str(),
                  s.pixel_change->per_frame_pct.size());
    out += line;
  }
  return out;
}

}  // namespace motionzip
