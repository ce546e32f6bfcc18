#pragma once

// Three-stage compression pipeline: Reader -> Motion Analysis -> Writer,
// each on its own thread, joined by bounded queues.

#include <chrono>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "motionzip/error.hpp"
#include "motionzip/metrics.hpp"
#include "motionzip/motion.hpp"
#include "motionzip/queue.hpp"
#include "motionzip/sidecar.hpp"
#include "motionzip/stream.hpp"

namespace motionzip {

struct PipelineOptions {
  std::size_t queue_capacity = 64;
};

struct PipelineReport {
  std::uint64_t frames_in = 0;
  std::uint64_t frames_out = 0;
  std::uint64_t full_frames = 0;
  std::uint64_t masked_frames = 0;
  double wall_time_s = 0;
  StreamHeader header;

  /// Input frames per second of wall time.
  double processing_speed() const {
    return wall_time_s > 0 ? static_cast<double>(frames_in) / wall_time_s : 0.0;
  }

  CompressionStats stats() const { return {frames_in, frames_out, {}, {}, {}}; }
};

namespace detail {

class FirstError {
 public:
  void record(const char* stage, std::exception_ptr ep) {
    std::lock_guard lock(mutex_);
    if (error_) return;
    try {
      std::rethrow_exception(ep);
    } catch (const Error& e) {
      error_.emplace(Errc::StageFailure, e.code(),
                     std::string(stage) + ": " + std::string(category_name(e.code())) + ": " +
                         e.what());
    } catch (const std::exception& e) {
      error_.emplace(Errc::StageFailure, std::string(stage) + ": " + e.what());
    }
  }

  std::optional<Error> get() const {
    std::lock_guard lock(mutex_);
    return error_;
  }

 private:
  mutable std::mutex mutex_;
  std::optional<Error> error_;
};

}  // namespace detail

/// Runs the full pipeline over `source`, writing kept frames to `video` and
/// one CSV row per kept frame to `sidecar`. Any stage failure cancels both
/// queues, joins all stages and throws StageFailure carrying the first
/// error. The video sink is closed in both cases.
inline PipelineReport run_pipeline(FrameSource& source, const MotionConfig& config,
                                   FrameSink& video, std::ostream& sidecar,
                                   PipelineOptions options = {}) {
  config.validate();
  BoundedQueue<Frame> frames(options.queue_capacity);
  BoundedQueue<AnalysisOutcome> outcomes(options.queue_capacity);
  detail::FirstError failure;
  const StreamHeader header = source.header();

  auto fail = [&](const char* stage) {
    failure.record(stage, std::current_exception());
    frames.cancel();
    outcomes.cancel();
  };

  PipelineReport report;
  report.header = header;
  bool video_open = false;
  const auto start = std::chrono::steady_clock::now();

  std::thread reader([&] {
    try {
      while (auto f = source.next()) {
        if (!frames.push(std::move(*f))) return;
      }
      source.close();
      frames.close();
    } catch (...) {
      fail("reader");
    }
  });

  std::thread analysis([&] {
    try {
      MotionAnalyser analyser(config);
      while (auto f = frames.pop()) {
        auto outcome = analyser.process(*f);
        ++report.frames_in;
        if (!outcome.kept()) continue;
        if (!outcomes.push(std::move(outcome))) return;
      }
      outcomes.close();
    } catch (...) {
      fail("analysis");
    }
  });

  std::thread writer([&] {
    try {
      SidecarWriter rows(sidecar);
      video.open(header);
      video_open = true;
      while (auto o = outcomes.pop()) {
        video.write(*o->frame);
        rows.append(*o->record);
        ++report.frames_out;
        if (o->kind == AnalysisOutcome::Kind::FullFrame) {
          ++report.full_frames;
        } else {
          ++report.masked_frames;
        }
      }
      if (failure.get()) return;
      video_open = false;
      video.close();
      rows.flush();
    } catch (...) {
      fail("writer");
    }
  });

  reader.join();
  analysis.join();
  writer.join();
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (auto err = failure.get()) {
    if (video_open) {
      try {
        video.close();
      } catch (...) {
      }
    }
    throw *err;
  }
  return report;
}

struct CompressedResult {
  std::vector<Frame> frames;
  std::vector<SidecarRecord> records;
};

/// Single-threaded fold of the analysis over a frame list: the behaviour
/// the concurrent pipeline must reproduce exactly.
inline CompressedResult reference_compress(const std::vector<Frame>& frames,
                                           const MotionConfig& config) {
  MotionAnalyser analyser(config);
  CompressedResult out;
  for (const auto& f : frames) {
    auto outcome = analyser.process(f);
    if (!outcome.kept()) continue;
    out.frames.push_back(std::move(*outcome.frame));
    out.records.push_back(*outcome.record);
  }
  return out;
}

}  // namespace motionzip
