#pragma once

// Synthetic videos and brute-force reference computations for tests.
// Nothing here calls into the motion-analysis code it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "motionzip/frame.hpp"
#include "motionzip/y4m.hpp"

namespace motionzip::testing {

inline StreamHeader make_header(int w, int h, PixelFormat fmt, FrameRate rate = {30, 1}) {
  StreamHeader hd;
  hd.width = w;
  hd.height = h;
  hd.format = fmt;
  hd.rate = rate;
  return hd;
}

inline Frame constant_frame(std::uint64_t idx, int w, int h, PixelFormat fmt, std::uint8_t v) {
  Frame f(idx, w, h, fmt);
  std::fill(f.data.begin(), f.data.end(), v);
  return f;
}

inline std::vector<Frame> constant_video(int w, int h, int n, std::uint8_t v,
                                         PixelFormat fmt = PixelFormat::Gray8) {
  std::vector<Frame> out;
  for (int i = 0; i < n; ++i) out.push_back(constant_frame(static_cast<std::uint64_t>(i), w, h, fmt, v));
  return out;
}

/// Gray background with a bright square whose top-left corner moves `step`
/// pixels right per frame (wrapping is never needed for the sizes used).
inline std::vector<Frame> moving_square(int w, int h, int n, int size = 4, int step = 1,
                                        std::uint8_t bg = 40, std::uint8_t fg = 220, int x0 = 2,
                                        int y0 = 6) {
  std::vector<Frame> out;
  for (int i = 0; i < n; ++i) {
    Frame f = constant_frame(static_cast<std::uint64_t>(i), w, h, PixelFormat::Gray8, bg);
    const int sx = x0 + i * step;
    for (int y = y0; y < std::min(h, y0 + size); ++y) {
      for (int x = sx; x < std::min(w, sx + size); ++x) {
        f.data[static_cast<std::size_t>(y) * w + x] = fg;
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

/// Random video: noisy static background plus a few drifting random blobs
/// and occasional still stretches so every outcome kind appears.
inline std::vector<Frame> random_video(std::mt19937& rng, int w, int h, int n, PixelFormat fmt) {
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> coin(0, 3);
  Frame base(0, w, h, fmt);
  for (auto& b : base.data) b = static_cast<std::uint8_t>(byte(rng));
  std::vector<Frame> out;
  Frame cur = base;
  for (int i = 0; i < n; ++i) {
    if (coin(rng) != 0) {
      cur = base;
      const int blobs = 1 + coin(rng);
      for (int b = 0; b < blobs; ++b) {
        std::uniform_int_distribution<int> px(0, w - 1), py(0, h - 1), sz(1, std::max(1, w / 4));
        const int bx = px(rng), by = py(rng), bs = sz(rng);
        const auto v = static_cast<std::uint8_t>(byte(rng));
        for (int y = by; y < std::min(h, by + bs); ++y) {
          for (int x = bx; x < std::min(w, bx + bs); ++x) {
            const auto p = static_cast<std::size_t>(y) * w + x;
            switch (fmt) {
              case PixelFormat::Gray8: cur.data[p] = v; break;
              case PixelFormat::Rgb24:
                for (int c = 0; c < 3; ++c) cur.data[3 * p + c] = static_cast<std::uint8_t>(v + 40 * c);
                break;
              case PixelFormat::Yuv444:
              case PixelFormat::Yuv420: cur.data[p] = v; break;
            }
          }
        }
      }
    }
    cur.index = static_cast<std::uint64_t>(i);
    out.push_back(cur);
  }
  return out;
}

// ---- brute-force references -------------------------------------------

inline int ref_luma(const Frame& f, int x, int y) {
  const auto p = static_cast<std::size_t>(y) * f.width + x;
  if (f.format == PixelFormat::Rgb24) {
    const double v = 0.299 * f.data[3 * p] + 0.587 * f.data[3 * p + 1] + 0.114 * f.data[3 * p + 2];
    return static_cast<int>(std::floor(v + 0.5 + 1e-9));
  }
  return f.data[p];
}

/// Rounded mean of the in-bounds part of the s x s block at cell (cx, cy).
inline int ref_block_mean(const Frame& f, int s, int cx, int cy) {
  long sum = 0;
  long n = 0;
  for (int y = cy * s; y < std::min(f.height, (cy + 1) * s); ++y) {
    for (int x = cx * s; x < std::min(f.width, (cx + 1) * s); ++x) {
      sum += ref_luma(f, x, y);
      ++n;
    }
  }
  return static_cast<int>(std::floor(static_cast<double>(sum) / n + 0.5));
}

struct RefMask {
  int width = 0;
  int height = 0;
  std::vector<int> bits;
  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  long count() const { return std::count(bits.begin(), bits.end(), 1); }
};

/// Thresholded analysis-grid cells between two frames.
inline RefMask ref_motion_cells(const Frame& prev, const Frame& curr, int s, int threshold) {
  RefMask m;
  m.width = (curr.width + s - 1) / s;
  m.height = (curr.height + s - 1) / s;
  m.bits.assign(static_cast<std::size_t>(m.width) * m.height, 0);
  for (int cy = 0; cy < m.height; ++cy) {
    for (int cx = 0; cx < m.width; ++cx) {
      const int d = std::abs(ref_block_mean(curr, s, cx, cy) - ref_block_mean(prev, s, cx, cy));
      m.bits[static_cast<std::size_t>(cy) * m.width + cx] = d > threshold ? 1 : 0;
    }
  }
  return m;
}

/// Full-resolution keep mask: a pixel survives when any motion cell lies
/// within Chebyshev distance r of the pixel's own cell.
inline RefMask ref_keep_mask(const Frame& prev, const Frame& curr, int s, int threshold, int r) {
  const RefMask cells = ref_motion_cells(prev, curr, s, threshold);
  RefMask keep;
  keep.width = curr.width;
  keep.height = curr.height;
  keep.bits.assign(static_cast<std::size_t>(curr.width) * curr.height, 0);
  for (int y = 0; y < curr.height; ++y) {
    for (int x = 0; x < curr.width; ++x) {
      const int cx = x / s, cy = y / s;
      bool any = false;
      for (int dy = -r; dy <= r && !any; ++dy) {
        for (int dx = -r; dx <= r && !any; ++dx) {
          const int nx = cx + dx, ny = cy + dy;
          if (nx >= 0 && ny >= 0 && nx < cells.width && ny < cells.height && cells.at(nx, ny)) {
            any = true;
          }
        }
      }
      keep.bits[static_cast<std::size_t>(y) * curr.width + x] = any ? 1 : 0;
    }
  }
  return keep;
}

/// True when `masked` equals `orig` at kept pixels (every channel) and is
/// zero elsewhere. 4:2:0 chroma follows the any-of-four rule.
inline bool ref_masked_matches(const Frame& orig, const Frame& masked, const RefMask& keep) {
  if (orig.data.size() != masked.data.size()) return false;
  const auto n = static_cast<std::size_t>(orig.width) * orig.height;
  auto check = [&](std::size_t i, bool k) {
    return masked.data[i] == (k ? orig.data[i] : 0);
  };
  for (int y = 0; y < orig.height; ++y) {
    for (int x = 0; x < orig.width; ++x) {
      const auto p = static_cast<std::size_t>(y) * orig.width + x;
      const bool k = keep.at(x, y);
      switch (orig.format) {
        case PixelFormat::Gray8:
          if (!check(p, k)) return false;
          break;
        case PixelFormat::Rgb24:
          for (std::size_t c = 0; c < 3; ++c) {
            if (!check(3 * p + c, k)) return false;
          }
          break;
        case PixelFormat::Yuv444:
          for (std::size_t c = 0; c < 3; ++c) {
            if (!check(c * n + p, k)) return false;
          }
          break;
        case PixelFormat::Yuv420:
          if (!check(p, k)) return false;
          break;
      }
    }
  }
  if (orig.format == PixelFormat::Yuv420) {
    const int cw = orig.width / 2, ch = orig.height / 2;
    for (int cy = 0; cy < ch; ++cy) {
      for (int cx = 0; cx < cw; ++cx) {
        const bool k = keep.at(2 * cx, 2 * cy) || keep.at(2 * cx + 1, 2 * cy) ||
                       keep.at(2 * cx, 2 * cy + 1) || keep.at(2 * cx + 1, 2 * cy + 1);
        const auto c = static_cast<std::size_t>(cy) * cw + cx;
        if (!check(n + c, k) || !check(n + static_cast<std::size_t>(cw) * ch + c, k)) return false;
      }
    }
  }
  return true;
}

// ---- files ----------------------------------------------------------------

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("motionzip-test-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_y4m_file(const std::filesystem::path& p, const StreamHeader& h,
                           const std::vector<Frame>& frames) {
  std::ofstream out(p, std::ios::binary);
  Y4mWriter w(out, h);
  for (const auto& f : frames) w.write(f);
  w.flush();
}

inline std::string y4m_bytes(const StreamHeader& h, const std::vector<Frame>& frames) {
  std::ostringstream out;
  Y4mWriter w(out, h);
  for (const auto& f : frames) w.write(f);
  return out.str();
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Path of an ffmpeg executable, or empty when none is installed.
inline std::string find_ffmpeg() {
  if (const char* env = std::getenv("MOTIONZIP_FFMPEG"); env && *env) return env;
  if (const char* path = std::getenv("PATH")) {
    std::string dirs(path);
    std::size_t start = 0;
    while (start <= dirs.size()) {
      const auto end = std::min(dirs.find(':', start), dirs.size());
      const auto candidate = std::filesystem::path(dirs.substr(start, end - start)) / "ffmpeg";
      std::error_code ec;
      if (std::filesystem::is_regular_file(candidate, ec)) return candidate.string();
      start = end + 1;
    }
  }
  return {};
}

}  // namespace motionzip::testing
