#pragma once

// YUV4MPEG2 and raw-frame serialization.
//
// Y4M layout: one ASCII header line "YUV4MPEG2 <tags>\n", then per frame a
// "FRAME[ <params>]\n" marker followed by the planar payload.

#include <charconv>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "motionzip/error.hpp"
#include "motionzip/frame.hpp"

namespace motionzip {

inline constexpr std::string_view kY4mSignature = "YUV4MPEG2";

namespace detail {

inline int parse_positive(std::string_view text, std::string_view what) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || value < 1) {
    throw Error(Errc::MalformedHeader, "bad " + std::string(what) + " tag value '" +
                                           std::string(text) + "'");
  }
  return value;
}

inline std::optional<PixelFormat> colorspace_from_tag(std::string_view cs) {
  if (cs == "mono") return PixelFormat::Gray8;
  if (cs == "420" || cs == "420jpeg" || cs == "420paldv" || cs == "420mpeg2") {
    return PixelFormat::Yuv420;
  }
  if (cs == "444") return PixelFormat::Yuv444;
  return std::nullopt;
}

inline std::string canonical_colorspace(PixelFormat fmt) {
  switch (fmt) {
    case PixelFormat::Gray8: return "mono";
    case PixelFormat::Yuv420: return "420jpeg";
    case PixelFormat::Yuv444: return "444";
    case PixelFormat::Rgb24: break;
  }
  throw Error(Errc::UnsupportedColorspace, "rgb24 has no Y4M colorspace tag");
}

// Reads up to and including '\n'. Returns false on EOF before any byte.
inline bool read_line(std::istream& in, std::string& line, std::size_t limit) {
  line.clear();
  std::istream::int_type c;
  while ((c = in.get()) != std::istream::traits_type::eof()) {
    if (c == '\n') return true;
    line.push_back(static_cast<char>(c));
    if (line.size() > limit) return true;
  }
  if (line.empty()) return false;
  // Hit EOF mid-line; report as an unterminated line via the size sentinel.
  line.push_back('\0');
  return true;
}

}  // namespace detail

/// Decodes a Y4M header line (without the trailing newline).
inline StreamHeader parse_y4m_header_line(std::string_view line) {
  if (line.substr(0, kY4mSignature.size()) != kY4mSignature ||
      (line.size() > kY4mSignature.size() && line[kY4mSignature.size()] != ' ')) {
    throw Error(Errc::MalformedHeader, "missing YUV4MPEG2 signature");
  }
  StreamHeader h;
  h.format = PixelFormat::Yuv420;
  bool have_w = false;
  bool have_h = false;

  std::string_view rest = line.substr(kY4mSignature.size());
  while (!rest.empty()) {
    const auto start = rest.find_first_not_of(' ');
    if (start == std::string_view::npos) break;
    rest.remove_prefix(start);
    const auto stop = rest.find(' ');
    const std::string_view tag = rest.substr(0, stop);
    rest.remove_prefix(stop == std::string_view::npos ? rest.size() : stop);

    const std::string_view value = tag.substr(1);
    switch (tag.front()) {
      case 'W':
        h.width = detail::parse_positive(value, "W");
        have_w = true;
        break;
      case 'H':
        h.height = detail::parse_positive(value, "H");
        have_h = true;
        break;
      case 'F': {
        const auto colon = value.find(':');
        if (colon == std::string_view::npos) {
          throw Error(Errc::MalformedHeader, "F tag needs num:den");
        }
        h.rate.num = detail::parse_positive(value.substr(0, colon), "F");
        h.rate.den = detail::parse_positive(value.substr(colon + 1), "F");
        break;
      }
      case 'C': {
        auto fmt = detail::colorspace_from_tag(value);
        if (!fmt) {
          throw Error(Errc::UnsupportedColorspace, "colorspace '" + std::string(value) + "'");
        }
        h.format = *fmt;
        break;
      }
      default:
        break;
    }
    h.tags.emplace_back(tag);
  }
  if (!have_w || !have_h) {
    throw Error(Errc::MalformedHeader, "header lacks W or H tag");
  }
  validate(h);
  return h;
}

/// Reads the header line and leaves the stream at the first FRAME marker.
inline StreamHeader parse_y4m_header(std::istream& in) {
  std::string line;
  if (!detail::read_line(in, line, 4096) || line.empty() || line.back() == '\0' ||
      line.size() > 4096) {
    throw Error(Errc::MalformedHeader, "unterminated or missing Y4M header");
  }
  return parse_y4m_header_line(line);
}

/// Serializes a header, newline included. Tags captured at parse time are
/// emitted in their original order with W/H/F/C refreshed from the fields.
inline std::string format_y4m_header(const StreamHeader& h) {
  validate(h);
  const std::string w = "W" + std::to_string(h.width);
  const std::string ht = "H" + std::to_string(h.height);
  const std::string f = "F" + std::to_string(h.rate.num) + ":" + std::to_string(h.rate.den);

  std::string out(kY4mSignature);
  if (h.tags.empty()) {
    out += " " + w + " " + ht + " " + f + " C" + detail::canonical_colorspace(h.format) + "\n";
    return out;
  }

  bool have_f = false;
  bool have_c = false;
  for (const auto& tag : h.tags) {
    out += ' ';
    switch (tag.front()) {
      case 'W': out += w; break;
      case 'H': out += ht; break;
      case 'F':
        out += f;
        have_f = true;
        break;
      case 'C': {
        have_c = true;
        auto fmt = detail::colorspace_from_tag(std::string_view(tag).substr(1));
        out += (fmt && *fmt == h.format) ? tag : "C" + detail::canonical_colorspace(h.format);
        break;
      }
      default: out += tag;
    }
  }
  if (!have_f) out += " " + f;
  if (!have_c && h.format != PixelFormat::Yuv420) {
    out += " C" + detail::canonical_colorspace(h.format);
  }
  out += '\n';
  return out;
}

/// Sequential frame reader over a Y4M byte stream.
class Y4mReader {
 public:
  explicit Y4mReader(std::istream& in) : in_(&in), header_(parse_y4m_header(in)) {}

  const StreamHeader& header() const { return header_; }

  /// Next frame, or nullopt at a clean end of stream.
  std::optional<Frame> next() {
    std::string marker;
    if (!detail::read_line(*in_, marker, 256)) return std::nullopt;
    const std::string_view m(marker);
    if (m.substr(0, 5) != "FRAME" || (m.size() > 5 && m[5] != ' ') || m.back() == '\0' ||
        m.size() > 256) {
      throw Error(Errc::MalformedFrameMarker,
                  "expected FRAME marker before frame " + std::to_string(next_index_));
    }
    Frame frame(next_index_, header_.width, header_.height, header_.format);
    in_->read(reinterpret_cast<char*>(frame.data.data()),
              static_cast<std::streamsize>(frame.data.size()));
    if (static_cast<std::size_t>(in_->gcount()) != frame.data.size()) {
      throw Error(Errc::TruncatedFrame, "frame " + std::to_string(next_index_) + " has " +
                                            std::to_string(in_->gcount()) + " of " +
                                            std::to_string(frame.data.size()) + " bytes");
    }
    ++next_index_;
    return frame;
  }

 private:
  std::istream* in_;
  StreamHeader header_;
  std::uint64_t next_index_ = 0;
};

/// Y4M serializer; the header is written once, on construction.
class Y4mWriter {
 public:
  Y4mWriter(std::ostream& out, StreamHeader header) : out_(&out), header_(std::move(header)) {
    const auto text = format_y4m_header(header_);
    out_->write(text.data(), static_cast<std::streamsize>(text.size()));
    check();
  }

  const StreamHeader& header() const { return header_; }

  void write(const Frame& frame) {
    if (!frame.matches(header_) || frame.data.size() != header_.frame_bytes()) {
      throw Error(Errc::DimensionMismatch, "frame geometry differs from stream header");
    }
    out_->write("FRAME\n", 6);
    out_->write(reinterpret_cast<const char*>(frame.data.data()),
                static_cast<std::streamsize>(frame.data.size()));
    check();
  }

  void flush() {
    out_->flush();
    check();
  }

 private:
  void check() const {
    if (!*out_) throw Error(Errc::SinkUnavailable, "write to video sink failed");
  }

  std::ostream* out_;
  StreamHeader header_;
};

/// Headerless frames back to back; geometry comes from the caller.
class RawReader {
 public:
  RawReader(std::istream& in, StreamHeader header) : in_(&in), header_(std::move(header)) {
    validate(header_);
  }

  const StreamHeader& header() const { return header_; }

  std::optional<Frame> next() {
    Frame frame(next_index_, header_.width, header_.height, header_.format);
    in_->read(reinterpret_cast<char*>(frame.data.data()),
              static_cast<std::streamsize>(frame.data.size()));
    const auto got = static_cast<std::size_t>(in_->gcount());
    if (got == 0) return std::nullopt;
    if (got != frame.data.size()) {
      throw Error(Errc::TruncatedFrame, "raw frame " + std::to_string(next_index_) + " has " +
                                            std::to_string(got) + " of " +
                                            std::to_string(frame.data.size()) + " bytes");
    }
    ++next_index_;
    return frame;
  }

 private:
  std::istream* in_;
  StreamHeader header_;
  std::uint64_t next_index_ = 0;
};

class RawWriter {
 public:
  RawWriter(std::ostream& out, StreamHeader header) : out_(&out), header_(std::move(header)) {}

  void write(const Frame& frame) {
    if (!frame.matches(header_)) {
      throw Error(Errc::DimensionMismatch, "frame geometry differs from stream header");
    }
    out_->write(reinterpret_cast<const char*>(frame.data.data()),
                static_cast<std::streamsize>(frame.data.size()));
    if (!*out_) throw Error(Errc::SinkUnavailable, "write to raw sink failed");
  }

  void flush() {
    out_->flush();
    if (!*out_) throw Error(Errc::SinkUnavailable, "flush of raw sink failed");
  }

 private:
  std::ostream* out_;
  StreamHeader header_;
};

}  // namespace motionzip
