#pragma once

// Per-frame motion analysis.
//
// Each frame is reduced to a downscaled luma image and differenced against
// the previous input frame. Cells whose absolute difference exceeds the
// threshold form a binary mask, which is dilated by a square buffer,
// upscaled back to full resolution and multiplied into the original frame.
// Frames without enough motion are dropped; full frames are kept at the
// start of the video, at the start of every motion sequence, and every
// `keyframe_interval` emitted frames within a sequence.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "motionzip/error.hpp"
#include "motionzip/frame.hpp"
#include "motionzip/sidecar.hpp"

namespace motionzip {

struct MotionConfig {
  int threshold = 25;          // strict: a cell moves when |diff| > threshold
  int downscale = 2;           // analysis grid is ceil(w/s) x ceil(h/s)
  int buffer_radius = 5;       // dilation radius, in analysis cells
  int keyframe_interval = 100; // emitted frames per keyframe within a sequence
  int min_motion_pixels = 10;  // thresholded cells needed to keep a frame

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(Errc::InvalidArgument, what); };
    if (threshold < 1 || threshold > 255) fail("threshold must lie in [1, 255]");
    if (downscale < 1) fail("downscale must be at least 1");
    if (buffer_radius < 0) fail("buffer radius must be non-negative");
    if (keyframe_interval < 1) fail("keyframe interval must be at least 1");
    if (min_motion_pixels < 1) fail("min motion pixels must be at least 1");
  }

  friend bool operator==(const MotionConfig&, const MotionConfig&) = default;
};

struct GrayFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  GrayFrame() = default;
  GrayFrame(int w, int h)
      : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {}
  GrayFrame(int w, int h, std::vector<std::uint8_t> bytes)
      : width(w), height(h), data(std::move(bytes)) {
    if (data.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
      throw Error(Errc::DimensionMismatch, "gray payload size does not match its geometry");
    }
  }

  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const GrayFrame&, const GrayFrame&) = default;
};

/// Binary image, one byte per cell holding 0 or 1.
struct MotionMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  MotionMask() = default;
  MotionMask(int w, int h)
      : width(w), height(h), bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {}

  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v = true) {
    bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
  std::size_t count() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
  }

  friend bool operator==(const MotionMask&, const MotionMask&) = default;
};

constexpr int ceil_div(int a, int b) { return (a + b - 1) / b; }

/// BT.601 luma in integer arithmetic: round(0.299 R + 0.587 G + 0.114 B).
constexpr std::uint8_t rgb_to_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

inline GrayFrame to_grayscale(const Frame& frame) {
  GrayFrame g(frame.width, frame.height);
  if (frame.format == PixelFormat::Rgb24) {
    const auto* px = frame.data.data();
    for (std::size_t i = 0; i < g.data.size(); ++i, px += 3) {
      g.data[i] = rgb_to_luma(px[0], px[1], px[2]);
    }
  } else {
    const auto luma = frame.luma();
    std::copy(luma.begin(), luma.end(), g.data.begin());
  }
  return g;
}

namespace detail {

// Block means with half-up rounding; ragged edge blocks average only the
// pixels that exist.
inline GrayFrame downscale_plane(std::span<const std::uint8_t> src, int w, int h, int s) {
  const int ow = ceil_div(w, s);
  const int oh = ceil_div(h, s);
  GrayFrame out(ow, oh);

  if (s == 2 && w % 2 == 0 && h % 2 == 0) {
    for (int oy = 0; oy < oh; ++oy) {
      const auto* r0 = src.data() + static_cast<std::size_t>(2 * oy) * w;
      const auto* r1 = r0 + w;
      auto* dst = out.data.data() + static_cast<std::size_t>(oy) * ow;
      for (int ox = 0; ox < ow; ++ox) {
        const unsigned sum = r0[2 * ox] + r0[2 * ox + 1] + r1[2 * ox] + r1[2 * ox + 1];
        dst[ox] = static_cast<std::uint8_t>((sum + 2) >> 2);
      }
    }
    return out;
  }

  std::vector<std::uint32_t> sums(static_cast<std::size_t>(ow));
  for (int oy = 0; oy < oh; ++oy) {
    std::fill(sums.begin(), sums.end(), 0u);
    const int y0 = oy * s;
    const int y1 = std::min(h, y0 + s);
    for (int y = y0; y < y1; ++y) {
      const auto* row = src.data() + static_cast<std::size_t>(y) * w;
      for (int x = 0; x < w; ++x) sums[static_cast<std::size_t>(x / s)] += row[x];
    }
    const int rows = y1 - y0;
    auto* dst = out.data.data() + static_cast<std::size_t>(oy) * ow;
    for (int ox = 0; ox < ow; ++ox) {
      const int cols = std::min(w, (ox + 1) * s) - ox * s;
      const std::uint32_t n = static_cast<std::uint32_t>(rows * cols);
      dst[ox] = static_cast<std::uint8_t>((sums[static_cast<std::size_t>(ox)] + n / 2) / n);
    }
  }
  return out;
}

}  // namespace detail

inline GrayFrame downscale(const GrayFrame& gray, int s) {
  if (s < 1) throw Error(Errc::InvalidArgument, "downscale factor must be at least 1");
  if (s == 1) return gray;
  return detail::downscale_plane(gray.data, gray.width, gray.height, s);
}

/// Downscaled luma of a frame, skipping the full-resolution gray copy for
/// formats that carry a luma plane.
inline GrayFrame analysis_gray(const Frame& frame, int s) {
  if (frame.format == PixelFormat::Rgb24) return downscale(to_grayscale(frame), s);
  if (s == 1) return to_grayscale(frame);
  return detail::downscale_plane(frame.luma(), frame.width, frame.height, s);
}

inline GrayFrame abs_diff(const GrayFrame& prev, const GrayFrame& curr) {
  if (prev.width != curr.width || prev.height != curr.height) {
    throw Error(Errc::DimensionMismatch, "cannot difference frames of different sizes");
  }
  GrayFrame out(curr.width, curr.height);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const int d = static_cast<int>(curr.data[i]) - static_cast<int>(prev.data[i]);
    out.data[i] = static_cast<std::uint8_t>(d < 0 ? -d : d);
  }
  return out;
}

inline MotionMask threshold_mask(const GrayFrame& diff, int threshold) {
  MotionMask m(diff.width, diff.height);
  for (std::size_t i = 0; i < m.bits.size(); ++i) m.bits[i] = diff.data[i] > threshold ? 1 : 0;
  return m;
}

/// Dilation by a (2r+1)x(2r+1) square, clipped at the borders. Separable:
/// a sliding-window OR along rows, then along columns.
inline MotionMask dilate(const MotionMask& mask, int r) {
  if (r < 0) throw Error(Errc::InvalidArgument, "dilation radius must be non-negative");
  if (r == 0) return mask;
  const int w = mask.width;
  const int h = mask.height;

  MotionMask horiz(w, h);
  for (int y = 0; y < h; ++y) {
    const auto* src = mask.bits.data() + static_cast<std::size_t>(y) * w;
    auto* dst = horiz.bits.data() + static_cast<std::size_t>(y) * w;
    int window = 0;
    for (int x = 0; x < std::min(r, w); ++x) window += src[x];
    for (int x = 0; x < w; ++x) {
      if (x + r < w) window += src[x + r];
      if (x - r - 1 >= 0) window -= src[x - r - 1];
      dst[x] = window > 0 ? 1 : 0;
    }
  }

  MotionMask out(w, h);
  std::vector<int> column(static_cast<std::size_t>(w), 0);
  auto add_row = [&](int y, int sign) {
    const auto* row = horiz.bits.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) column[static_cast<std::size_t>(x)] += sign * row[x];
  };
  for (int y = 0; y < std::min(r, h); ++y) add_row(y, +1);
  for (int y = 0; y < h; ++y) {
    if (y + r < h) add_row(y + r, +1);
    if (y - r - 1 >= 0) add_row(y - r - 1, -1);
    auto* dst = out.bits.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) dst[x] = column[static_cast<std::size_t>(x)] > 0 ? 1 : 0;
  }
  return out;
}

/// Nearest-neighbour replication: full-resolution (x, y) takes cell (x/s, y/s).
inline MotionMask upscale_mask(const MotionMask& mask, int s, int target_w, int target_h) {
  if (s < 1) throw Error(Errc::InvalidArgument, "upscale factor must be at least 1");
  if (mask.width != ceil_div(target_w, s) || mask.height != ceil_div(target_h, s)) {
    throw Error(Errc::DimensionMismatch, "mask grid does not match target size");
  }
  MotionMask out(target_w, target_h);
  for (int y = 0; y < target_h; ++y) {
    const auto* src = mask.bits.data() + static_cast<std::size_t>(y / s) * mask.width;
    auto* dst = out.bits.data() + static_cast<std::size_t>(y) * target_w;
    for (int x = 0; x < target_w; ++x) dst[x] = src[x / s];
  }
  return out;
}

/// Pointwise product of a frame with a full-resolution binary mask. For
/// 4:2:0 frames a chroma sample survives if any of its four luma samples do.
inline Frame apply_mask(const Frame& frame, const MotionMask& mask) {
  if (mask.width != frame.width || mask.height != frame.height) {
    throw Error(Errc::DimensionMismatch, "mask size differs from frame size");
  }
  Frame out(frame.index, frame.width, frame.height, frame.format);
  const std::size_t n = frame.pixel_count();
  const auto* m = mask.bits.data();
  const auto* in = frame.data.data();
  auto* dst = out.data.data();

  switch (frame.format) {
    case PixelFormat::Gray8:
      for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<std::uint8_t>(in[i] * m[i]);
      break;
    case PixelFormat::Rgb24:
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
          dst[3 * i + c] = static_cast<std::uint8_t>(in[3 * i + c] * m[i]);
        }
      }
      break;
    case PixelFormat::Yuv444:
      for (std::size_t p = 0; p < 3; ++p) {
        for (std::size_t i = 0; i < n; ++i) {
          dst[p * n + i] = static_cast<std::uint8_t>(in[p * n + i] * m[i]);
        }
      }
      break;
    case PixelFormat::Yuv420: {
      for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<std::uint8_t>(in[i] * m[i]);
      const int cw = frame.width / 2;
      const int ch = frame.height / 2;
      const std::size_t cn = static_cast<std::size_t>(cw) * static_cast<std::size_t>(ch);
      std::vector<std::uint8_t> cm(cn);
      for (int cy = 0; cy < ch; ++cy) {
        const auto* r0 = m + static_cast<std::size_t>(2 * cy) * frame.width;
        const auto* r1 = r0 + frame.width;
        auto* crow = cm.data() + static_cast<std::size_t>(cy) * cw;
        for (int cx = 0; cx < cw; ++cx) {
          crow[cx] = r0[2 * cx] | r0[2 * cx + 1] | r1[2 * cx] | r1[2 * cx + 1];
        }
      }
      for (std::size_t p = 0; p < 2; ++p) {
        const std::size_t base = n + p * cn;
        for (std::size_t i = 0; i < cn; ++i) {
          dst[base + i] = static_cast<std::uint8_t>(in[base + i] * cm[i]);
        }
      }
      break;
    }
  }
  return out;
}

struct AnalysisState {
  std::optional<GrayFrame> prev_gray;
  std::uint64_t frames_seen = 0;  // input index of the next frame
  std::uint64_t out_index = 0;
  // Emitted frames since, and including, the most recent keyframe.
  int frames_since_keyframe = 0;
  bool in_motion_sequence = false;
  // Geometry fixed by frame 0.
  int width = 0;
  int height = 0;
  PixelFormat format = PixelFormat::Gray8;

  friend bool operator==(const AnalysisState&, const AnalysisState&) = default;
};

struct AnalysisOutcome {
  enum class Kind { Drop, Masked, FullFrame };

  Kind kind = Kind::Drop;
  std::optional<Frame> frame;
  std::optional<SidecarRecord> record;
  std::size_t motion_pixels = 0;  // thresholded cells before dilation

  bool kept() const { return kind != Kind::Drop; }
};

/// Advances `state` by one input frame.
inline AnalysisOutcome analyse_in_place(AnalysisState& state, const MotionConfig& config,
                                        const Frame& frame) {
  const int s = config.downscale;
  AnalysisOutcome outcome;

  auto emit = [&](AnalysisOutcome::Kind kind, Frame out) {
    outcome.kind = kind;
    out.index = state.frames_seen;
    outcome.frame = std::move(out);
    outcome.record = SidecarRecord{state.frames_seen, state.out_index,
                                   kind == AnalysisOutcome::Kind::FullFrame};
    ++state.out_index;
    if (kind == AnalysisOutcome::Kind::FullFrame) {
      state.frames_since_keyframe = 1;
    } else {
      ++state.frames_since_keyframe;
    }
  };

  if (!state.prev_gray) {
    state.width = frame.width;
    state.height = frame.height;
    state.format = frame.format;
    state.prev_gray = analysis_gray(frame, s);
    state.in_motion_sequence = true;
    emit(AnalysisOutcome::Kind::FullFrame, frame);
    ++state.frames_seen;
    return outcome;
  }

  if (frame.width != state.width || frame.height != state.height ||
      frame.format != state.format) {
    throw Error(Errc::DimensionMismatch,
                "frame " + std::to_string(state.frames_seen) + " changes stream geometry");
  }

  GrayFrame gray = analysis_gray(frame, s);
  const MotionMask raw = threshold_mask(abs_diff(*state.prev_gray, gray), config.threshold);
  state.prev_gray = std::move(gray);
  outcome.motion_pixels = raw.count();

  if (outcome.motion_pixels < static_cast<std::size_t>(config.min_motion_pixels)) {
    state.in_motion_sequence = false;
    outcome.kind = AnalysisOutcome::Kind::Drop;
  } else if (!state.in_motion_sequence ||
             state.frames_since_keyframe >= config.keyframe_interval) {
    state.in_motion_sequence = true;
    emit(AnalysisOutcome::Kind::FullFrame, frame);
  } else {
    const MotionMask grown = dilate(raw, config.buffer_radius);
    emit(AnalysisOutcome::Kind::Masked,
         apply_mask(frame, upscale_mask(grown, s, frame.width, frame.height)));
  }
  ++state.frames_seen;
  return outcome;
}

/// Pure form: the next state is returned alongside the outcome.
inline std::pair<AnalysisOutcome, AnalysisState> analyse(AnalysisState state,
                                                         const MotionConfig& config,
                                                         const Frame& frame) {
  auto outcome = analyse_in_place(state, config, frame);
  return {std::move(outcome), std::move(state)};
}

/// Owns the analysis state for one stream.
class MotionAnalyser {
 public:
  explicit MotionAnalyser(MotionConfig config) : config_(config) { config_.validate(); }

  AnalysisOutcome process(const Frame& frame) { return analyse_in_place(state_, config_, frame); }

  const AnalysisState& state() const { return state_; }
  const MotionConfig& config() const { return config_; }

 private:
  MotionConfig config_;
  AnalysisState state_;
};

}  // namespace motionzip
