#pragma once

// CSV sidecar linking compressed-video frames back to the input timeline.
//
//   input_frame,output_frame,full_frame
//   0,0,1
//   17,1,0

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "motionzip/error.hpp"

namespace motionzip {

inline constexpr std::string_view kSidecarHeader = "input_frame,output_frame,full_frame";

struct SidecarRecord {
  std::uint64_t input_frame = 0;
  std::uint64_t output_frame = 0;
  bool full_frame = false;

  friend bool operator==(const SidecarRecord&, const SidecarRecord&) = default;
};

/// Enforces the ordering rules shared by the reader and writer: output
/// frames consecutive from 0, input frames strictly increasing.
class SidecarOrderCheck {
 public:
  void check(const SidecarRecord& r) {
    if (r.output_frame != expected_output_) {
      throw Error(Errc::NonMonotonicIndex, "output_frame " + std::to_string(r.output_frame) +
                                               " where " + std::to_string(expected_output_) +
                                               " was expected");
    }
    if (last_input_ && r.input_frame <= *last_input_) {
      throw Error(Errc::NonMonotonicIndex, "input_frame " + std::to_string(r.input_frame) +
                                               " does not increase");
    }
    last_input_ = r.input_frame;
    ++expected_output_;
  }

 private:
  std::uint64_t expected_output_ = 0;
  std::optional<std::uint64_t> last_input_;
};

inline std::string format_sidecar_row(const SidecarRecord& r) {
  std::string row = std::to_string(r.input_frame);
  row += ',';
  row += std::to_string(r.output_frame);
  row += r.full_frame ? ",1\n" : ",0\n";
  return row;
}

/// Streaming writer: header on construction, one validated row per append.
/// Rows go out in a single write each, so a failure never leaves half a row.
class SidecarWriter {
 public:
  explicit SidecarWriter(std::ostream& out) : out_(&out) {
    *out_ << kSidecarHeader << '\n';
    check_stream();
  }

  void append(const SidecarRecord& r) {
    order_.check(r);
    const auto row = format_sidecar_row(r);
    out_->write(row.data(), static_cast<std::streamsize>(row.size()));
    check_stream();
    ++rows_;
  }

  void flush() {
    out_->flush();
    check_stream();
  }

  std::size_t rows() const { return rows_; }

 private:
  void check_stream() const {
    if (!*out_) throw Error(Errc::SinkUnavailable, "write to sidecar failed");
  }

  std::ostream* out_;
  SidecarOrderCheck order_;
  std::size_t rows_ = 0;
};

inline void write_sidecar(const std::vector<SidecarRecord>& records, std::ostream& out) {
  SidecarWriter writer(out);
  for (const auto& r : records) writer.append(r);
  writer.flush();
}

namespace detail {

inline std::uint64_t parse_field(std::string_view text, std::size_t line_no) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw Error(Errc::MalformedRow, "line " + std::to_string(line_no) + ": '" +
                                        std::string(text) + "' is not a frame number");
  }
  return value;
}

}  // namespace detail

inline SidecarRecord parse_sidecar_row(std::string_view line, std::size_t line_no = 0) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto c1 = line.find(',');
  const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
  if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos) {
    throw Error(Errc::MalformedRow, "line " + std::to_string(line_no) + ": expected 3 fields");
  }
  SidecarRecord r;
  r.input_frame = detail::parse_field(line.substr(0, c1), line_no);
  r.output_frame = detail::parse_field(line.substr(c1 + 1, c2 - c1 - 1), line_no);
  const auto flag = line.substr(c2 + 1);
  if (flag != "0" && flag != "1") {
    throw Error(Errc::MalformedRow,
                "line " + std::to_string(line_no) + ": full_frame must be 0 or 1");
  }
  r.full_frame = flag == "1";
  return r;
}

inline std::vector<SidecarRecord> read_sidecar(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::MalformedRow, "empty sidecar");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSidecarHeader) {
    throw Error(Errc::MalformedRow, "unexpected sidecar header '" + line + "'");
  }
  std::vector<SidecarRecord> records;
  SidecarOrderCheck order;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto r = parse_sidecar_row(line, line_no);
    order.check(r);
    records.push_back(r);
  }
  return records;
}

}  // namespace motionzip
