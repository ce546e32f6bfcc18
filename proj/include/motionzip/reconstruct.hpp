#pragma once

// Rebuilds tracker-ready frames from a compressed video and its sidecar.
//
// Full frames become the grayscale reference. For each motion frame:
//   env = |ref - mot|            (background where mot is blacked out)
//   rec = min(env + mot, 255)    (motion pixels plus restored background)
// Two streams come out: the compressed frames unchanged (for appearance
// based detectors) and the grayscale reconstructions (for foreground /
// background segmentation).

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "motionzip/error.hpp"
#include "motionzip/frame.hpp"
#include "motionzip/motion.hpp"
#include "motionzip/sidecar.hpp"
#include "motionzip/stream.hpp"

namespace motionzip {

inline GrayFrame env_frame(const GrayFrame& ref, const GrayFrame& mot) {
  if (ref.width != mot.width || ref.height != mot.height) {
    throw Error(Errc::DimensionMismatch, "reference and motion frame sizes differ");
  }
  return abs_diff(ref, mot);
}

inline GrayFrame rec_frame(const GrayFrame& env, const GrayFrame& mot) {
  if (env.width != mot.width || env.height != mot.height) {
    throw Error(Errc::DimensionMismatch, "environment and motion frame sizes differ");
  }
  GrayFrame out(mot.width, mot.height);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const unsigned sum = static_cast<unsigned>(env.data[i]) + mot.data[i];
    out.data[i] = static_cast<std::uint8_t>(sum > 255u ? 255u : sum);
  }
  return out;
}

struct ReferenceStore {
  std::optional<GrayFrame> ref_gray;
  std::uint64_t ref_input_index = 0;
};

struct ReconstructedFrame {
  std::uint64_t input_frame = 0;
  bool full_frame = false;
  Frame passthrough;      // compressed frame as stored
  GrayFrame reconstructed;
};

class Reconstructor {
 public:
  ReconstructedFrame process(const Frame& frame, const SidecarRecord& row) {
    ReconstructedFrame out;
    out.input_frame = row.input_frame;
    out.full_frame = row.full_frame;
    GrayFrame gray = to_grayscale(frame);
    if (row.full_frame) {
      store_.ref_gray = gray;
      store_.ref_input_index = row.input_frame;
      out.reconstructed = std::move(gray);
    } else {
      if (!store_.ref_gray) {
        throw Error(Errc::MissingReference, "motion frame for input " +
                                                std::to_string(row.input_frame) +
                                                " precedes every full frame");
      }
      out.reconstructed = rec_frame(env_frame(*store_.ref_gray, gray), gray);
    }
    out.passthrough = frame;
    out.passthrough.index = row.input_frame;
    return out;
  }

  const ReferenceStore& store() const { return store_; }

 private:
  ReferenceStore store_;
};

inline constexpr std::string_view kAlignmentHeader = "position,input_frame,full_frame";

/// Header of the reconstructed (grayscale) stream derived from the input's.
inline StreamHeader reconstructed_header(const StreamHeader& in) {
  StreamHeader h;
  h.width = in.width;
  h.height = in.height;
  h.rate = in.rate;
  h.format = PixelFormat::Gray8;
  return h;
}

inline Frame to_frame(const GrayFrame& g, std::uint64_t index) {
  return Frame(index, g.width, g.height, PixelFormat::Gray8, g.data);
}

/// Streams every compressed frame through the reconstructor. Returns the
/// number of frames written to each output.
inline std::uint64_t reconstruct_stream(FrameSource& video,
                                        const std::vector<SidecarRecord>& rows,
                                        FrameSink& passthrough, FrameSink& reconstructed,
                                        std::ostream* alignment = nullptr) {
  passthrough.open(video.header());
  reconstructed.open(reconstructed_header(video.header()));
  if (alignment) *alignment << kAlignmentHeader << '\n';

  Reconstructor rec;
  std::uint64_t position = 0;
  while (auto f = video.next()) {
    if (position >= rows.size()) {
      throw Error(Errc::SidecarMismatch, "video has more frames than the sidecar's " +
                                             std::to_string(rows.size()) + " rows");
    }
    const auto& row = rows[position];
    auto out = rec.process(*f, row);
    passthrough.write(out.passthrough);
    reconstructed.write(to_frame(out.reconstructed, row.input_frame));
    if (alignment) {
      *alignment << position << ',' << row.input_frame << ',' << (row.full_frame ? 1 : 0)
                 << '\n';
    }
    ++position;
  }
  video.close();
  if (position != rows.size()) {
    throw Error(Errc::SidecarMismatch, "sidecar has " + std::to_string(rows.size()) +
                                           " rows but the video has " +
                                           std::to_string(position) + " frames");
  }
  passthrough.close();
  reconstructed.close();
  if (alignment) {
    alignment->flush();
    if (!*alignment) throw Error(Errc::SinkUnavailable, "write to alignment csv failed");
  }
  return position;
}

}  // namespace motionzip
