// motionzip: motion-based video compression for camera-trap footage.
//
//   motionzip compress    --input in.y4m --output out
//   motionzip reconstruct --input out.y4m --sidecar out.csv --output rec
//   motionzip stats       --raw in.y4m --processed out.y4m --sidecar out.csv
//   motionzip bench       --input in.y4m --replicates 3

#include <charconv>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "motionzip/commands.hpp"

namespace {

using namespace motionzip;
using motionzip::cli::InputSpec;

struct RawFlags {
  std::string format;
  std::string size;
  std::string fps = "30";
};

void add_motion_flags(CLI::App* sub, MotionConfig& m, std::size_t& queue_capacity) {
  sub->add_option("--threshold", m.threshold, "Luma difference a cell must exceed [1-255]")
      ->capture_default_str();
  sub->add_option("--downscale", m.downscale, "Analysis downscale factor")->capture_default_str();
  sub->add_option("--buffer", m.buffer_radius, "Buffer radius around motion, analysis pixels")
      ->capture_default_str();
  sub->add_option("--keyframe-interval", m.keyframe_interval,
                  "Emitted frames per full frame within a motion sequence")
      ->capture_default_str();
  sub->add_option("--min-motion-pixels", m.min_motion_pixels,
                  "Thresholded analysis pixels needed to keep a frame")
      ->capture_default_str();
  sub->add_option("--queue-capacity", queue_capacity, "Frames buffered between stages")
      ->capture_default_str();
}

void add_input_flags(CLI::App* sub, InputSpec& in, RawFlags& raw, bool required = true) {
  auto* opt = sub->add_option("--input", in.path, "Input video (Y4M, raw, or '-' for stdin)");
  if (required) opt->required();
  sub->add_option("--decode-cmd", in.decode_cmd,
                  "Decoder command writing Y4M to stdout; {input} is replaced by the path");
  sub->add_option("--raw-format", raw.format, "Treat input as headerless frames: gray8 or rgb24")
      ->check(CLI::IsMember({"gray8", "rgb24"}));
  sub->add_option("--size", raw.size, "Raw frame size WxH");
  sub->add_option("--fps", raw.fps, "Raw frame rate N or N/D")->capture_default_str();
}

int parse_int(std::string_view text, const char* what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || v < 1) {
    throw Error(Errc::InvalidArgument, std::string("bad ") + what + " '" + std::string(text) + "'");
  }
  return v;
}

void resolve_raw(InputSpec& in, const RawFlags& raw) {
  if (raw.format.empty()) return;
  in.raw_format = raw.format == "rgb24" ? PixelFormat::Rgb24 : PixelFormat::Gray8;
  const auto x = raw.size.find('x');
  if (x == std::string::npos) throw Error(Errc::InvalidArgument, "--size must be WxH");
  in.raw_width = parse_int(std::string_view(raw.size).substr(0, x), "width");
  in.raw_height = parse_int(std::string_view(raw.size).substr(x + 1), "height");
  const auto slash = raw.fps.find('/');
  if (slash == std::string::npos) {
    in.raw_rate = {parse_int(raw.fps, "fps"), 1};
  } else {
    in.raw_rate = {parse_int(std::string_view(raw.fps).substr(0, slash), "fps"),
                   parse_int(std::string_view(raw.fps).substr(slash + 1), "fps")};
  }
}

/// Fills options not given on the command line from a key=value (INI) file.
/// Keys are flag names without dashes; a [compress] or [bench] section
/// limits its keys to that subcommand.
void apply_config(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::Error& e) {
    throw Error(Errc::InvalidArgument, "config file: " + std::string(e.what()));
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty() && item.parents != std::vector<std::string>{sub->get_name()}) continue;
    auto* opt = sub->get_option_no_throw("--" + item.name);
    if (opt == nullptr || item.name == "config") {
      throw Error(Errc::InvalidArgument, "config file: unknown key '" + item.name + "'");
    }
    if (opt->count() > 0) continue;
    try {
      for (const auto& v : item.inputs) opt->add_result(v);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw Error(Errc::InvalidArgument, "config file: " + item.name + ": " + e.what());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);

  CLI::App app{"Motion-based video compression for camera traps"};
  app.require_subcommand(1);

  cli::CompressOptions compress;
  RawFlags compress_raw;
  auto* c = app.add_subcommand("compress", "Keep only moving regions plus periodic full frames");
  std::string compress_config;
  c->add_option("--config", compress_config, "key=value file with flag defaults");
  add_input_flags(c, compress.input, compress_raw);
  c->add_option("--output", compress.output, "Output base path (.y4m/.csv appended)")->required();
  add_motion_flags(c, compress.motion, compress.queue_capacity);
  c->add_option("--encode-cmd", compress.encode_cmd,
                "Encoder command reading Y4M on stdin; {output} is replaced by the path");
  c->add_option("--encoded-ext", compress.encoded_ext, "Extension of encoded output")
      ->capture_default_str();
  c->add_option("--stats-json", compress.stats_json, "Write run statistics as JSON");

  cli::ReconstructOptions recon;
  RawFlags recon_raw;
  auto* r = app.add_subcommand("reconstruct", "Rebuild tracker inputs from a compressed video");
  add_input_flags(r, recon.video, recon_raw);
  r->add_option("--sidecar", recon.sidecar, "Sidecar CSV of the compressed video")->required();
  r->add_option("--output", recon.output, "Output base path")->required();

  cli::StatsOptions stats;
  auto* s = app.add_subcommand("stats", "Frame/size reductions and pixel-change statistics");
  s->add_option("--raw", stats.raw, "Original video");
  s->add_option("--processed", stats.processed, "Compressed video");
  s->add_option("--sidecar", stats.sidecar, "Sidecar CSV (counted into processed size)");
  s->add_option("--decode-cmd", stats.decode_cmd, "Decoder for counting frames of encoded files");
  s->add_option("--frames-in", stats.frames_in, "Raw frame count");
  s->add_option("--frames-out", stats.frames_out, "Processed frame count");
  s->add_option("--bytes-in", stats.bytes_in, "Raw size in bytes");
  s->add_option("--bytes-out", stats.bytes_out, "Processed size in bytes");
  s->add_option("--pixel-change", stats.pixel_change, "Video to measure per-frame pixel change");
  s->add_option("--threshold", stats.threshold, "Pixel-change threshold [0-255]")
      ->capture_default_str();
  s->add_option("--stats-json", stats.stats_json, "Write JSON here instead of stdout");

  cli::BenchOptions bench;
  RawFlags bench_raw;
  auto* b = app.add_subcommand("bench", "Time repeated compression runs");
  std::string bench_config;
  b->add_option("--config", bench_config, "key=value file with flag defaults");
  add_input_flags(b, bench.compress.input, bench_raw);
  add_motion_flags(b, bench.compress.motion, bench.compress.queue_capacity);
  b->add_option("--replicates", bench.replicates, "Number of timed runs")->capture_default_str();
  b->add_option("--encode-cmd", bench.compress.encode_cmd, "Encoder command, as for compress");
  b->add_option("--encoded-ext", bench.compress.encoded_ext, "Extension of encoded output");
  b->add_option("--stats-json", bench.compress.stats_json, "Write timings as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: invalid_argument: " << cli::one_line(e.what()) << '\n';
    return 2;
  }

  // Argument-level validation happens before any file is touched.
  const int arg_status = cli::guarded(std::cerr, [&] {
    if (*c) {
      apply_config(c, compress_config);
      resolve_raw(compress.input, compress_raw);
      compress.motion.validate();
    } else if (*r) {
      resolve_raw(recon.video, recon_raw);
    } else if (*b) {
      apply_config(b, bench_config);
      resolve_raw(bench.compress.input, bench_raw);
      bench.compress.motion.validate();
      if (bench.replicates < 1) throw Error(Errc::InvalidArgument, "replicates must be >= 1");
    }
    return 0;
  });
  if (arg_status != 0) return arg_status;

  if (*c) return cli::cmd_compress(compress, std::cout, std::cerr);
  if (*r) return cli::cmd_reconstruct(recon, std::cout, std::cerr);
  if (*s) return cli::cmd_stats(stats, std::cout, std::cerr);
  return cli::cmd_bench(bench, std::cout, std::cerr);
}
