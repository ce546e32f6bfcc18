#pragma once

// The four command-line workflows as callable functions. Each returns the
// process exit status: 0 success, 1 runtime failure, 2 bad arguments.
// Diagnostics go to `err` as a single line "error: <category>: <detail>".

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "motionzip/codec.hpp"
#include "motionzip/error.hpp"
#include "motionzip/metrics.hpp"
#include "motionzip/pipeline.hpp"
#include "motionzip/reconstruct.hpp"
#include "motionzip/sidecar.hpp"
#include "motionzip/stream.hpp"

namespace motionzip::cli {

namespace fs = std::filesystem;

/// Where frames come from: a Y4M file, "-" for Y4M on stdin, a raw file
/// with explicit geometry, or a compressed file through a decode command.
struct InputSpec {
  std::string path;
  std::optional<std::string> decode_cmd;
  std::optional<PixelFormat> raw_format;
  int raw_width = 0;
  int raw_height = 0;
  FrameRate raw_rate;
};

struct CompressOptions {
  InputSpec input;
  std::string output;  // base path; extensions are appended
  MotionConfig motion;
  std::size_t queue_capacity = 64;
  std::optional<std::string> encode_cmd;
  std::string encoded_ext = ".mp4";
  std::optional<std::string> stats_json;
};

struct ReconstructOptions {
  InputSpec video;
  std::string sidecar;
  std::string output;
};

struct StatsOptions {
  std::optional<std::string> raw;
  std::optional<std::string> processed;
  std::optional<std::string> sidecar;
  std::optional<std::string> decode_cmd;
  std::optional<std::uint64_t> frames_in;
  std::optional<std::uint64_t> frames_out;
  std::optional<std::uint64_t> bytes_in;
  std::optional<std::uint64_t> bytes_out;
  std::optional<std::string> pixel_change;  // video to measure
  int threshold = MotionConfig{}.threshold;
  std::optional<std::string> stats_json;
};

struct BenchOptions {
  CompressOptions compress;  // `output` is ignored; replicates write to a scratch dir
  int replicates = 3;
};

struct CompressOutputs {
  fs::path video;
  fs::path sidecar;
};

struct BenchResult {
  std::uint64_t frames_in = 0;
  std::vector<double> times_s;
  double mean_s = 0;
  double sd_s = 0;

  std::vector<double> fps() const {
    std::vector<double> out;
    for (double t : times_s) out.push_back(t > 0 ? static_cast<double>(frames_in) / t : 0.0);
    return out;
  }
  double mean_fps() const { return mean_s > 0 ? static_cast<double>(frames_in) / mean_s : 0.0; }
};

inline std::unique_ptr<FrameSource> open_source(const InputSpec& in) {
  if (in.decode_cmd) return std::make_unique<DecodeSource>(*in.decode_cmd, in.path);
  if (in.raw_format) {
    StreamHeader h;
    h.width = in.raw_width;
    h.height = in.raw_height;
    h.rate = in.raw_rate;
    h.format = *in.raw_format;
    if (h.width < 1 || h.height < 1) {
      throw Error(Errc::InvalidArgument, "raw input needs --size WxH");
    }
    if (in.path == "-") return std::make_unique<RawStreamSource>(std::cin, h);
    return std::make_unique<RawFileSource>(in.path, h);
  }
  if (in.path == "-") return std::make_unique<Y4mStreamSource>(std::cin);
  return std::make_unique<Y4mFileSource>(in.path);
}

inline std::string video_extension(PixelFormat fmt) {
  return fmt == PixelFormat::Rgb24 ? ".rgb" : ".y4m";
}

inline std::uint64_t file_bytes(const fs::path& p) {
  std::error_code ec;
  const auto size = fs::file_size(p, ec);
  if (ec) throw Error(Errc::SourceUnavailable, "cannot stat " + p.string());
  return size;
}

inline std::optional<std::uint64_t> input_bytes(const InputSpec& in) {
  if (in.path == "-") return std::nullopt;
  std::error_code ec;
  const auto size = fs::file_size(in.path, ec);
  if (ec) return std::nullopt;
  return size;
}

/// Runs one compression. Outputs are written under a ".partial" name and
/// renamed into place only when the pipeline succeeds.
inline PipelineReport compress_to(const CompressOptions& opt, CompressOutputs& outputs) {
  opt.motion.validate();
  if (opt.queue_capacity == 0) throw Error(Errc::InvalidArgument, "queue capacity must be positive");
  auto source = open_source(opt.input);
  const PixelFormat fmt = source->header().format;

  fs::path video_final;
  fs::path video_partial;
  std::unique_ptr<FrameSink> sink;
  if (opt.encode_cmd) {
    video_final = opt.output + opt.encoded_ext;
    // Keep the container extension last so the encoder can infer the format.
    video_partial = opt.output + ".partial" + opt.encoded_ext;
    sink = std::make_unique<EncodeSink>(*opt.encode_cmd, video_partial.string());
  } else {
    video_final = opt.output + video_extension(fmt);
    video_partial = video_final.string() + ".partial";
    if (fmt == PixelFormat::Rgb24) {
      sink = std::make_unique<RawFileSink>(video_partial);
    } else {
      sink = std::make_unique<Y4mFileSink>(video_partial);
    }
  }
  const fs::path csv_final = opt.output + ".csv";
  const fs::path csv_partial = csv_final.string() + ".partial";

  std::ofstream csv(csv_partial, std::ios::binary | std::ios::trunc);
  if (!csv) throw Error(Errc::SinkUnavailable, "cannot create " + csv_partial.string());

  auto report = run_pipeline(*source, opt.motion, *sink, csv, {opt.queue_capacity});
  csv.close();
  if (!csv) throw Error(Errc::SinkUnavailable, "closing " + csv_partial.string() + " failed");

  fs::rename(video_partial, video_final);
  fs::rename(csv_partial, csv_final);
  outputs = {video_final, csv_final};
  return report;
}

inline nlohmann::ordered_json compress_json(const PipelineReport& report,
                                            const CompressOutputs& outputs,
                                            std::optional<std::uint64_t> bytes_in) {
  nlohmann::ordered_json j;
  if (report.frames_in > 0) {
    CompressionStats stats = report.stats();
    if (bytes_in && *bytes_in > 0) {
      stats.bytes_in = bytes_in;
      stats.bytes_out = file_bytes(outputs.video) + file_bytes(outputs.sidecar);
      // Size reduction is undefined when the output grew; report counts only.
      if (*stats.bytes_out > *stats.bytes_in) stats.bytes_in.reset();
    }
    j = stats_to_json(stats);
  } else {
    j["frames_in"] = 0;
    j["frames_out"] = 0;
  }
  j["full_frames"] = report.full_frames;
  j["masked_frames"] = report.masked_frames;
  j["wall_time_s"] = report.wall_time_s;
  j["processing_speed_fps"] = report.processing_speed();
  j["video"] = outputs.video.string();
  j["sidecar"] = outputs.sidecar.string();
  return j;
}

inline void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::trunc);
  out << j.dump(2) << '\n';
  if (!out) throw Error(Errc::SinkUnavailable, "cannot write " + path);
}

inline std::string one_line(std::string text) {
  for (auto& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

/// Maps exceptions onto exit codes and the single-line diagnostic format.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << category_name(e.code()) << ": " << one_line(e.what()) << '\n';
    return e.code() == Errc::InvalidArgument ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: filesystem: " << one_line(e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << one_line(e.what()) << '\n';
    return 1;
  }
}

inline int cmd_compress(const CompressOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    CompressOutputs outputs;
    const auto report = compress_to(opt, outputs);
    const auto j = compress_json(report, outputs, input_bytes(opt.input));
    char line[256];
    std::snprintf(line, sizeof line,
                  "frames_in=%llu frames_out=%llu full=%llu masked=%llu wall_time_s=%.3f fps=%.1f\n",
                  static_cast<unsigned long long>(report.frames_in),
                  static_cast<unsigned long long>(report.frames_out),
                  static_cast<unsigned long long>(report.full_frames),
                  static_cast<unsigned long long>(report.masked_frames), report.wall_time_s,
                  report.processing_speed());
    out << line;
    if (report.frames_in > 0) out << stats_table(stats_from_json(j));
    out << "video: " << outputs.video.string() << "\nsidecar: " << outputs.sidecar.string() << '\n';
    if (opt.stats_json) write_json_file(*opt.stats_json, j);
    return 0;
  });
}

inline int cmd_reconstruct(const ReconstructOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::ifstream csv(opt.sidecar, std::ios::binary);
    if (!csv) throw Error(Errc::SourceUnavailable, "cannot open " + opt.sidecar);
    const auto rows = read_sidecar(csv);
    auto video = open_source(opt.video);

    const auto fmt = video->header().format;
    const fs::path dl_path = opt.output + ".dl" + video_extension(fmt);
    const fs::path fgbg_path = opt.output + ".fgbg.y4m";
    const fs::path align_path = opt.output + ".align.csv";

    std::unique_ptr<FrameSink> dl;
    if (fmt == PixelFormat::Rgb24) {
      dl = std::make_unique<RawFileSink>(dl_path);
    } else {
      dl = std::make_unique<Y4mFileSink>(dl_path);
    }
    Y4mFileSink fgbg(fgbg_path);
    std::ofstream align(align_path, std::ios::binary | std::ios::trunc);
    if (!align) throw Error(Errc::SinkUnavailable, "cannot create " + align_path.string());

    const auto n = reconstruct_stream(*video, rows, *dl, fgbg, &align);
    out << "frames=" << n << "\ndl: " << dl_path.string() << "\nfgbg: " << fgbg_path.string()
        << "\nalignment: " << align_path.string() << '\n';
    return 0;
  });
}

inline std::uint64_t count_frames(const std::string& path,
                                  const std::optional<std::string>& decode_cmd) {
  InputSpec in;
  in.path = path;
  in.decode_cmd = decode_cmd;
  auto source = open_source(in);
  std::uint64_t n = 0;
  while (source->next()) ++n;
  source->close();
  return n;
}

inline int cmd_stats(const StatsOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const bool have_counts = opt.frames_in || opt.raw;
    if (!have_counts && !opt.pixel_change) {
      throw Error(Errc::InvalidArgument,
                  "nothing to report: give --raw/--processed, --frames-in/--frames-out, or "
                  "--pixel-change");
    }
    nlohmann::ordered_json j;
    if (have_counts) {
      if (!opt.frames_out && !opt.processed && !opt.sidecar) {
        throw Error(Errc::InvalidArgument, "need --processed, --sidecar or --frames-out");
      }
      CompressionStats s;
      s.frames_in = opt.frames_in ? *opt.frames_in : count_frames(*opt.raw, opt.decode_cmd);
      if (opt.frames_out) {
        s.frames_out = *opt.frames_out;
      } else if (opt.sidecar) {
        std::ifstream csv(*opt.sidecar, std::ios::binary);
        if (!csv) throw Error(Errc::SourceUnavailable, "cannot open " + *opt.sidecar);
        s.frames_out = read_sidecar(csv).size();
      } else {
        s.frames_out = count_frames(*opt.processed, opt.decode_cmd);
      }
      s.bytes_in = opt.bytes_in;
      if (!s.bytes_in && opt.raw) s.bytes_in = file_bytes(*opt.raw);
      s.bytes_out = opt.bytes_out;
      if (!s.bytes_out && opt.processed) {
        s.bytes_out = file_bytes(*opt.processed) + (opt.sidecar ? file_bytes(*opt.sidecar) : 0);
      }
      j = stats_to_json(s);
      out << stats_table(s);
    }
    if (opt.pixel_change) {
      InputSpec in;
      in.path = *opt.pixel_change;
      in.decode_cmd = opt.decode_cmd;
      auto source = open_source(in);
      const auto pc = pixel_change_series(*source, opt.threshold);
      j["pixel_change"] = pixel_change_to_json(pc);
      char line[160];
      std::snprintf(line, sizeof line, "pixel change > %d: mean %s%%, median %s%% over %zu pairs\n",
                    pc.threshold, format_pct(pc.mean_pct).c_str(),
                    format_pct(pc.median_pct).c_str(), pc.per_frame_pct.size());
      out << line;
    }
    if (opt.stats_json) {
      write_json_file(*opt.stats_json, j);
    } else {
      out << j.dump() << '\n';
    }
    return 0;
  });
}

/// Sample mean and standard deviation (n - 1 denominator; 0 for one sample).
inline std::pair<double, double> mean_sd(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

/// Compresses the input `replicates` times in sequence into a scratch
/// directory and times each full run.
inline BenchResult run_bench(const BenchOptions& opt) {
  if (opt.replicates < 1) throw Error(Errc::InvalidArgument, "replicates must be at least 1");
  if (opt.compress.input.path == "-") {
    throw Error(Errc::InvalidArgument, "bench needs a re-readable input file, not stdin");
  }
  std::random_device rd;
  const fs::path scratch =
      fs::temp_directory_path() / ("motionzip-bench-" + std::to_string(rd()));
  fs::create_directories(scratch);
  struct Cleanup {
    fs::path dir;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(dir, ec);
    }
  } cleanup{scratch};

  BenchResult result;
  for (int r = 0; r < opt.replicates; ++r) {
    CompressOptions c = opt.compress;
    c.output = (scratch / ("replicate" + std::to_string(r))).string();
    c.stats_json.reset();
    CompressOutputs outputs;
    const auto report = compress_to(c, outputs);
    result.frames_in = report.frames_in;
    result.times_s.push_back(report.wall_time_s);
    std::error_code ec;
    fs::remove(outputs.video, ec);
    fs::remove(outputs.sidecar, ec);
  }
  std::tie(result.mean_s, result.sd_s) = mean_sd(result.times_s);
  return result;
}

inline nlohmann::ordered_json bench_json(const BenchResult& b) {
  nlohmann::ordered_json j;
  j["frames_in"] = b.frames_in;
  j["replicates"] = b.times_s.size();
  j["times_s"] = b.times_s;
  j["fps"] = b.fps();
  j["mean_time_s"] = b.mean_s;
  j["sd_time_s"] = b.sd_s;
  j["mean_fps"] = b.mean_fps();
  return j;
}

inline int cmd_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto b = run_bench(opt);
    const auto fps = b.fps();
    char line[160];
    for (std::size_t i = 0; i < b.times_s.size(); ++i) {
      std::snprintf(line, sizeof line, "replicate %zu: %.3f s, %.1f fps\n", i + 1, b.times_s[i],
                    fps[i]);
      out << line;
    }
    std::snprintf(line, sizeof line, "time (s): %.3f \xC2\xB1 %.3f\nspeed (fps): %.1f\n", b.mean_s,
                  b.sd_s, b.mean_fps());
    out << line;
    if (opt.compress.stats_json) write_json_file(*opt.compress.stats_json, bench_json(b));
    return 0;
  });
}

}  // namespace motionzip::cli
