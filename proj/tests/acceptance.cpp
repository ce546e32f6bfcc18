// Acceptance checks. Each criterion prints one line:
//   PASS <name>: <measurements>
//   FAIL <name>: <measurements>
// Usage: acceptance [criterion...]   (no arguments runs all of them)
// Exit status is 0 only when every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "motionzip/commands.hpp"
#include "motionzip/motionzip.hpp"
#include "support/fixtures.hpp"

using namespace motionzip;
namespace t = motionzip::testing;
namespace fs = std::filesystem;

namespace {

// ---- pinned tolerances and limits ------------------------------------------
constexpr double kMetricTolerance = 0.01;        // percentage points
constexpr double kStaticMinReduction = 99.6;     // percent
constexpr double kStaticMaxSeconds = 5.0;
constexpr int kOracleVideos = 60;                // >= 50 required
constexpr int kOracleMaxSide = 64;
constexpr int kOracleMaxFrames = 40;
constexpr double kOracleMaxSeconds = 60.0;
constexpr double kMaskMaxSeconds = 10.0;
constexpr double kReconMaxSeconds = 10.0;
constexpr double kHeadlineMinSizeReduction = 80.0;  // percent
constexpr double kHeadlineMaxSeconds = 180.0;
constexpr double kMinThroughputFps = 20.0;
constexpr int kRoundTripCases = 250;              // >= 200 required
constexpr double kRoundTripMaxSeconds = 30.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string csv_text(const std::vector<SidecarRecord>& rows) {
  std::ostringstream out;
  write_sidecar(rows, out);
  return out.str();
}

MotionConfig random_config(std::mt19937& rng) {
  std::uniform_int_distribution<int> thr(1, 100), fac(1, 4), rad(0, 6), kint(1, 12), minpx(1, 12);
  MotionConfig c;
  c.threshold = thr(rng);
  c.downscale = fac(rng);
  c.buffer_radius = rad(rng);
  c.keyframe_interval = kint(rng);
  c.min_motion_pixels = minpx(rng);
  return c;
}

// ---- metrics -----------------------------------------------------------------

Outcome metrics() {
  struct Row {
    const char* label;
    double computed;
    double published;
  };
  const Row rows[] = {
      {"frames 179912->12423", frame_reduction(179912, 12423), 93.03},
      {"frames 790->775", frame_reduction(790, 775), 1.90},
      {"frames 56664->14331", frame_reduction(56664, 14331), 74.71},
      {"size 10895.05->266.02", size_reduction(10895.05, 266.02), 97.56},
  };
  Outcome o{true, {}};
  for (const auto& r : rows) {
    const bool ok = std::fabs(r.computed - r.published) <= kMetricTolerance + 1e-9;
    o.pass = o.pass && ok;
    o.detail += fmt("%s%s=%.2f (expected %.2f%s)", o.detail.empty() ? "" : "; ", r.label,
                    r.computed, r.published, ok ? "" : ", MISMATCH");
  }
  return o;
}

// ---- static scene -------------------------------------------------------------

Outcome static_scene() {
  Stopwatch clock;
  const auto h = t::make_header(640, 360, PixelFormat::Yuv420);
  MemorySource src(h, t::constant_video(640, 360, 300, 87, PixelFormat::Yuv420));
  MemorySink sink;
  std::ostringstream csv;
  const auto report = run_pipeline(src, MotionConfig{}, sink, csv);
  std::istringstream in(csv.str());
  const auto rows = read_sidecar(in);
  const double reduction = frame_reduction(report.frames_in, report.frames_out);
  const double secs = clock.seconds();
  const bool ok = sink.frames().size() == 1 && rows.size() == 1 && rows[0].full_frame &&
                  rows[0].input_frame == 0 && reduction >= kStaticMinReduction &&
                  secs < kStaticMaxSeconds;
  return {ok, fmt("frames_out=%zu rows=%zu full_frame=%d reduction=%.2f%% time=%.2fs",
                  sink.frames().size(), rows.size(), rows.empty() ? -1 : int(rows[0].full_frame),
                  reduction, secs)};
}

// ---- oracle equivalence ---------------------------------------------------------

/// Serialises frames exactly as the file sinks would: Y4M, or raw for RGB.
class BytesSink final : public FrameSink {
 public:
  void open(const StreamHeader& h) override {
    if (h.format == PixelFormat::Rgb24) {
      raw_.emplace(out_, h);
    } else {
      y4m_.emplace(out_, h);
    }
  }
  void write(const Frame& f) override {
    if (raw_) {
      raw_->write(f);
    } else {
      y4m_->write(f);
    }
  }
  void close() override {
    if (raw_) raw_->flush();
    if (y4m_) y4m_->flush();
  }
  std::string bytes() const { return out_.str(); }

 private:
  std::ostringstream out_;
  std::optional<RawWriter> raw_;
  std::optional<Y4mWriter> y4m_;
};

std::string video_bytes(const StreamHeader& h, const std::vector<Frame>& frames) {
  BytesSink sink;
  sink.open(h);
  for (const auto& f : frames) sink.write(f);
  sink.close();
  return sink.bytes();
}

Outcome oracle_equivalence() {
  Stopwatch clock;
  std::mt19937 rng(20240611);
  const PixelFormat formats[] = {PixelFormat::Gray8, PixelFormat::Rgb24, PixelFormat::Yuv420,
                                 PixelFormat::Yuv444};
  std::uniform_int_distribution<int> side(1, kOracleMaxSide / 2), len(1, kOracleMaxFrames),
      pick(0, 3);
  int mismatches = 0;
  long runs = 0, kept = 0;
  for (int v = 0; v < kOracleVideos; ++v) {
    const auto fmtv = formats[pick(rng)];
    const int w = 2 * side(rng), h = 2 * side(rng);
    const auto cfg = random_config(rng);
    const auto frames = t::random_video(rng, w, h, len(rng), fmtv);
    const auto header = t::make_header(w, h, fmtv);
    const auto expect = reference_compress(frames, cfg);
    const auto expect_video = video_bytes(header, expect.frames);
    const auto expect_csv = csv_text(expect.records);
    kept += static_cast<long>(expect.frames.size());
    for (std::size_t cap : {std::size_t{1}, std::size_t{2}, std::size_t{64}}) {
      MemorySource src(header, frames);
      std::ostringstream csv;
      BytesSink sink;
      run_pipeline(src, cfg, sink, csv, {cap});
      ++runs;
      if (sink.bytes() != expect_video || csv.str() != expect_csv) ++mismatches;
    }
  }
  const double secs = clock.seconds();
  return {mismatches == 0 && secs < kOracleMaxSeconds,
          fmt("videos=%d runs=%ld kept_frames=%ld mismatches=%d time=%.2fs", kOracleVideos, runs,
              kept, mismatches, secs)};
}

// ---- mask correctness ------------------------------------------------------------

Outcome mask_correctness() {
  Stopwatch clock;
  struct Case {
    int w, h, n, size, step, s, r, thr;
  };
  const Case cases[] = {
      {64, 48, 40, 6, 1, 1, 2, 10},  {64, 48, 40, 6, 2, 2, 3, 10}, {96, 64, 50, 9, 3, 3, 1, 20},
      {63, 47, 40, 5, 1, 2, 5, 25},  {80, 40, 30, 8, 4, 4, 0, 5},  {120, 90, 60, 12, 1, 2, 5, 25},
  };
  long masked = 0, checked_pixels = 0, bad = 0;
  for (const auto& c : cases) {
    const auto frames = t::moving_square(c.w, c.h, c.n, c.size, c.step, 40, 220, 2, c.h / 3);
    MotionConfig cfg;
    cfg.threshold = c.thr;
    cfg.downscale = c.s;
    cfg.buffer_radius = c.r;
    cfg.keyframe_interval = 1000;
    cfg.min_motion_pixels = 1;
    MotionAnalyser a(cfg);
    for (std::size_t k = 0; k < frames.size(); ++k) {
      const auto o = a.process(frames[k]);
      if (o.kind != AnalysisOutcome::Kind::Masked) continue;
      ++masked;
      const auto keep = t::ref_keep_mask(frames[k - 1], frames[k], c.s, c.thr, c.r);
      checked_pixels += static_cast<long>(frames[k].pixel_count());
      if (!t::ref_masked_matches(frames[k], *o.frame, keep)) ++bad;
    }
  }
  const double secs = clock.seconds();
  return {masked > 0 && bad == 0 && secs < kMaskMaxSeconds,
          fmt("masked_frames=%ld pixels_checked=%ld mismatching_frames=%ld time=%.2fs", masked,
              checked_pixels, bad, secs)};
}

// ---- reconstruction identities ----------------------------------------------------

Outcome reconstruction() {
  Stopwatch clock;
  std::mt19937 rng(77);
  struct Fixture {
    std::vector<Frame> frames;
    StreamHeader header;
    MotionConfig cfg;
  };
  std::vector<Fixture> fixtures;
  {
    MotionConfig cfg;
    cfg.threshold = 10;
    cfg.downscale = 1;
    cfg.buffer_radius = 3;
    cfg.keyframe_interval = 7;
    cfg.min_motion_pixels = 1;
    fixtures.push_back({t::moving_square(64, 48, 40, 6, 1), t::make_header(64, 48, PixelFormat::Gray8), cfg});
  }
  for (auto fmtv : {PixelFormat::Rgb24, PixelFormat::Yuv420, PixelFormat::Gray8}) {
    for (int i = 0; i < 4; ++i) {
      fixtures.push_back({t::random_video(rng, 48, 32, 30, fmtv), t::make_header(48, 32, fmtv),
                          random_config(rng)});
    }
  }

  long frames_checked = 0, pixels = 0, zero_px = 0, equal_px = 0, violations = 0;
  for (const auto& fx : fixtures) {
    const auto c = reference_compress(fx.frames, fx.cfg);
    MemorySource video(fx.header, c.frames);
    MemorySink dl, fgbg;
    reconstruct_stream(video, c.records, dl, fgbg);
    if (fgbg.frames().size() != c.frames.size()) ++violations;

    std::vector<int> ref;
    for (std::size_t k = 0; k < c.frames.size() && k < fgbg.frames().size(); ++k) {
      const Frame& mot = c.frames[k];
      const Frame& rec = fgbg.frames()[k];
      if (rec.index != c.records[k].input_frame || !(dl.frames()[k].data == mot.data)) ++violations;
      ++frames_checked;
      for (int y = 0; y < mot.height; ++y) {
        for (int x = 0; x < mot.width; ++x) {
          const auto i = static_cast<std::size_t>(y) * mot.width + x;
          const int m = t::ref_luma(mot, x, y);
          const int r = rec.data[i];
          ++pixels;
          if (c.records[k].full_frame) {
            if (ref.size() != mot.pixel_count()) ref.assign(mot.pixel_count(), 0);
            ref[i] = m;
            violations += r != m;
            continue;
          }
          violations += r < m;
          if (m == 0) {
            ++zero_px;
            violations += r != ref[i];
          }
          if (m == ref[i]) {
            ++equal_px;
            violations += r != ref[i];
          }
        }
      }
    }
  }
  const double secs = clock.seconds();
  return {violations == 0 && zero_px > 0 && equal_px > 0 && secs < kReconMaxSeconds,
          fmt("fixtures=%zu frames=%ld pixels=%ld motf_zero=%ld motf_eq_ref=%ld violations=%ld "
              "time=%.2fs",
              fixtures.size(), frames_checked, pixels, zero_px, equal_px, violations, secs)};
}

// ---- headline compression -----------------------------------------------------------

/// Deterministic camera-trap-like clip: a textured static scene with
/// per-frame sensor noise well under the motion threshold, and a textured
/// object that crosses the field of view in a few bursts.
class CameraTrapClip final : public FrameSource {
 public:
  static constexpr int kWidth = 1280;
  static constexpr int kHeight = 720;
  static constexpr int kFrames = 1000;
  static constexpr int kObjectW = 300;
  static constexpr int kObjectH = 160;  // 48000 px, about 5.2% of the frame
  static constexpr int kNoise = 6;  // bounded, so block-mean differences never exceed 12

  CameraTrapClip() {
    header_ = t::make_header(kWidth, kHeight, PixelFormat::Yuv420);
    std::mt19937 rng(4242);
    std::uniform_int_distribution<int> tex(-12, 12);
    background_.resize(bytes_per_frame(kWidth, kHeight, PixelFormat::Yuv420));
    for (int y = 0; y < kHeight; ++y) {
      for (int x = 0; x < kWidth; ++x) {
        const double v = 110 + 35 * std::sin(x * 0.013) * std::cos(y * 0.021) + 20 * std::sin((x + y) * 0.05);
        background_[static_cast<std::size_t>(y) * kWidth + x] = clamp(static_cast<int>(v) + tex(rng));
      }
    }
    const std::size_t luma = static_cast<std::size_t>(kWidth) * kHeight;
    for (std::size_t i = luma; i < background_.size(); ++i) {
      background_[i] = clamp(128 + (i < luma * 5 / 4 ? -10 : 12) + tex(rng) / 4);
    }
    object_.resize(static_cast<std::size_t>(kObjectW) * kObjectH);
    for (int y = 0; y < kObjectH; ++y) {
      for (int x = 0; x < kObjectW; ++x) {
        object_[static_cast<std::size_t>(y) * kObjectW + x] =
            clamp(static_cast<int>(60 + 40 * std::sin(x * 0.2) * std::sin(y * 0.15)) + tex(rng));
      }
    }
  }

  const StreamHeader& header() const override { return header_; }

  std::optional<Frame> next() override {
    if (index_ == kFrames) return std::nullopt;
    Frame f(index_, kWidth, kHeight, PixelFormat::Yuv420, background_);
    // Sensor noise in [-kNoise, kNoise] on luma.
    const std::size_t luma = static_cast<std::size_t>(kWidth) * kHeight;
    for (std::size_t i = 0; i < luma; ++i) {
      noise_ ^= noise_ << 13;
      noise_ ^= noise_ >> 7;
      noise_ ^= noise_ << 17;
      f.data[i] = clamp(f.data[i] + static_cast<int>(noise_ % (2 * kNoise + 1)) - kNoise);
    }
    if (auto x = object_x(static_cast<int>(index_))) paint_object(f, *x);
    ++index_;
    return f;
  }

  /// Frames in which the object is at least partly visible.
  static int visible_frames() {
    int n = 0;
    for (int i = 0; i < kFrames; ++i) n += object_x(i).has_value();
    return n;
  }

 private:
  static std::uint8_t clamp(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

  // Three crossings of 100 frames each: 30% of the clip.
  static std::optional<int> object_x(int frame) {
    for (int start : {120, 450, 760}) {
      if (frame >= start && frame < start + 100) {
        return -kObjectW + 1 + (frame - start) * (kWidth + kObjectW - 2) / 99;
      }
    }
    return std::nullopt;
  }

  void paint_object(Frame& f, int x0) const {
    const int y0 = 330;
    for (int y = 0; y < kObjectH; ++y) {
      for (int x = std::max(0, x0); x < std::min(kWidth, x0 + kObjectW); ++x) {
        f.data[static_cast<std::size_t>(y0 + y) * kWidth + x] =
            object_[static_cast<std::size_t>(y) * kObjectW + (x - x0)];
      }
    }
  }

  StreamHeader header_;
  std::vector<std::uint8_t> background_;
  std::vector<std::uint8_t> object_;
  std::uint64_t index_ = 0;
  std::uint64_t noise_ = 0x9E3779B97F4A7C15ull;
};

struct Encoder {
  std::string name;
  std::string command;  // reads Y4M on stdin, writes {output}
  std::string ext;
};

Encoder pick_encoder() {
  const auto ffmpeg = t::find_ffmpeg();
  if (!ffmpeg.empty()) {
    return {"ffmpeg libx264 crf 23",
            "'" + ffmpeg + "' -v error -y -f yuv4mpegpipe -i - -c:v libx264 -preset veryfast "
                           "-crf 23 -pix_fmt yuv420p {output}",
            ".mp4"};
  }
  return {"gzip -6", "sh -c 'gzip -6 -c > \"$0\"' {output}", ".y4m.gz"};
}

Outcome headline_compression() {
  Stopwatch clock;
  const t::TempDir dir;
  const auto enc = pick_encoder();

  // Raw clip through the encoder: the "input video file".
  const auto raw_path = (dir / ("raw" + enc.ext)).string();
  {
    CameraTrapClip clip;
    EncodeSink sink(enc.command, raw_path);
    sink.open(clip.header());
    while (auto f = clip.next()) sink.write(*f);
    sink.close();
  }
  const auto bytes_in = fs::file_size(raw_path);

  // Compressed clip through the same encoder, plus its sidecar.
  const auto out_path = (dir / ("compressed" + enc.ext)).string();
  const auto csv_path = dir / "compressed.csv";
  PipelineReport report;
  {
    CameraTrapClip clip;
    EncodeSink sink(enc.command, out_path);
    std::ofstream csv(csv_path, std::ios::binary);
    report = run_pipeline(clip, MotionConfig{}, sink, csv);
  }
  const auto bytes_out = fs::file_size(out_path) + fs::file_size(csv_path);

  const double frame_red = frame_reduction(report.frames_in, report.frames_out);
  const double size_red = bytes_out <= bytes_in
                              ? size_reduction(static_cast<double>(bytes_in), static_cast<double>(bytes_out))
                              : -100.0 * (static_cast<double>(bytes_out) - bytes_in) / bytes_in;
  const double secs = clock.seconds();
  const bool ok = size_red >= kHeadlineMinSizeReduction && size_red > frame_red &&
                  secs < kHeadlineMaxSeconds;
  return {ok, fmt("encoder=%s motion_frames=%d/%d frames %llu->%llu (%.2f%%) bytes %llu->%llu "
                  "(%.2f%%) full=%llu time=%.1fs",
                  enc.name.c_str(), CameraTrapClip::visible_frames(), CameraTrapClip::kFrames,
                  static_cast<unsigned long long>(report.frames_in),
                  static_cast<unsigned long long>(report.frames_out), frame_red,
                  static_cast<unsigned long long>(bytes_in),
                  static_cast<unsigned long long>(bytes_out), size_red,
                  static_cast<unsigned long long>(report.full_frames), secs)};
}

// ---- throughput ----------------------------------------------------------------------

Outcome throughput() {
  const t::TempDir dir;
  const auto path = dir / "hd.y4m";
  {
    // 1080p30 with a moving object over half of the clip.
    std::ofstream out(path, std::ios::binary);
    const auto h = t::make_header(1920, 1080, PixelFormat::Yuv420, {30, 1});
    Y4mWriter w(out, h);
    Frame f(0, 1920, 1080, PixelFormat::Yuv420);
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> tex(0, 255);
    std::vector<std::uint8_t> bg(f.data.size());
    for (auto& b : bg) b = static_cast<std::uint8_t>(96 + tex(rng) / 8);
    for (int i = 0; i < 900; ++i) {
      f.data = bg;
      f.index = static_cast<std::uint64_t>(i);
      if ((i / 150) % 2 == 1) {
        const int x0 = (i % 150) * 10;
        for (int y = 400; y < 700; ++y) {
          std::fill_n(f.data.begin() + static_cast<std::ptrdiff_t>(y) * 1920 + x0, 360, std::uint8_t{230});
        }
      }
      w.write(f);
    }
    w.flush();
  }

  cli::BenchOptions opt;
  opt.compress.input.path = path.string();
  opt.compress.stats_json = (dir / "bench.json").string();
  opt.replicates = 3;
  std::ostringstream out, err;
  const int status = cli::cmd_bench(opt, out, err);
  double fps = 0;
  if (status == 0) fps = nlohmann::json::parse(t::read_file(dir / "bench.json"))["mean_fps"].get<double>();
  std::string summary = out.str();
  if (auto pos = summary.find("time (s)"); pos != std::string::npos) summary = summary.substr(pos);
  for (auto& c : summary) c = c == '\n' ? ' ' : c;
  return {status == 0 && fps >= kMinThroughputFps,
          fmt("1920x1080 900 frames, %d replicates: mean %.1f fps; %s%s", opt.replicates, fps,
              summary.c_str(), cli::one_line(err.str()).c_str())};
}

// ---- format round trips -----------------------------------------------------------------

Outcome format_round_trips() {
  Stopwatch clock;
  std::mt19937 rng(31337);
  const PixelFormat formats[] = {PixelFormat::Gray8, PixelFormat::Yuv420, PixelFormat::Yuv444};
  std::uniform_int_distribution<int> side(1, 20), pick(0, 2), len(0, 6), rate(1, 120000),
      coin(0, 3), byte(0, 255);
  const char* extras[] = {"Ip", "A1:1", "XYSCSS=420JPEG", "A0:0", "Ib", "XCOLORRANGE=FULL"};
  int y4m_bad = 0, y4m_cases = 0;
  for (int i = 0; i < kRoundTripCases; ++i) {
    const auto fmtv = formats[pick(rng)];
    int w = side(rng), h = side(rng);
    if (fmtv == PixelFormat::Yuv420) {
      w *= 2;
      h *= 2;
    }
    // Hand-built header text with optional extra tags in random order.
    std::vector<std::string> tags = {"W" + std::to_string(w), "H" + std::to_string(h),
                                     "F" + std::to_string(rate(rng)) + ":" + std::to_string(1 + coin(rng))};
    tags.push_back(fmtv == PixelFormat::Gray8 ? "Cmono" : fmtv == PixelFormat::Yuv420 ? "C420jpeg" : "C444");
    for (const char* e : extras) {
      if (coin(rng) == 0) tags.push_back(e);
    }
    std::shuffle(tags.begin(), tags.end(), rng);
    std::string text = "YUV4MPEG2";
    for (const auto& tag : tags) text += " " + tag;
    text += "\n";
    const int n = len(rng);
    const auto bytes = bytes_per_frame(w, h, fmtv);
    for (int k = 0; k < n; ++k) {
      text += "FRAME\n";
      for (std::size_t b = 0; b < bytes; ++b) text.push_back(static_cast<char>(byte(rng)));
    }

    std::istringstream in(text);
    Y4mReader reader(in);
    std::vector<Frame> frames;
    while (auto f = reader.next()) frames.push_back(std::move(*f));
    const auto again = t::y4m_bytes(reader.header(), frames);
    std::istringstream in2(again);
    Y4mReader reader2(in2);
    std::vector<Frame> frames2;
    while (auto f = reader2.next()) frames2.push_back(std::move(*f));
    ++y4m_cases;
    if (again != text || frames2 != frames || static_cast<int>(frames.size()) != n) ++y4m_bad;
  }

  int csv_bad = 0, csv_cases = 0;
  std::uniform_int_distribution<int> rows(0, 80), gap(1, 5000);
  for (int i = 0; i < kRoundTripCases; ++i) {
    std::vector<SidecarRecord> records;
    std::uint64_t in = static_cast<std::uint64_t>(gap(rng)) - 1;
    const int n = rows(rng);
    for (int k = 0; k < n; ++k) {
      records.push_back({in, static_cast<std::uint64_t>(k), coin(rng) == 0});
      in += static_cast<std::uint64_t>(gap(rng));
    }
    const auto text = csv_text(records);
    std::istringstream is(text);
    const auto back = read_sidecar(is);
    ++csv_cases;
    if (back != records || csv_text(back) != text) ++csv_bad;
  }
  const double secs = clock.seconds();
  return {y4m_bad == 0 && csv_bad == 0 && secs < kRoundTripMaxSeconds,
          fmt("y4m cases=%d failures=%d; sidecar cases=%d failures=%d; time=%.2fs", y4m_cases,
              y4m_bad, csv_cases, csv_bad, secs)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"metrics", metrics},
      {"static_scene", static_scene},
      {"oracle_equivalence", oracle_equivalence},
      {"mask_correctness", mask_correctness},
      {"reconstruction", reconstruction},
      {"headline_compression", headline_compression},
      {"throughput", throughput},
      {"format_round_trips", format_round_trips},
  };

  std::vector<std::string> selected(argv + 1, argv + argc);
  if (selected.empty()) {
    for (const auto& c : criteria) selected.push_back(c.first);
  }

  int failures = 0;
  for (const auto& name : selected) {
    auto it = std::find_if(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == name; });
    if (it == criteria.end()) {
      std::cerr << "unknown criterion '" << name << "'\n";
      return 2;
    }
    Outcome o;
    try {
      o = it->second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
