#pragma once

// Frame sources and sinks consumed by the pipeline: Y4M and raw files,
// in-memory buffers, and arbitrary iostreams.

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "motionzip/frame.hpp"
#include "motionzip/y4m.hpp"

namespace motionzip {

class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual const StreamHeader& header() const = 0;
  virtual std::optional<Frame> next() = 0;
  /// Releases the underlying resource and reports deferred failures.
  virtual void close() {}
};

class FrameSink {
 public:
  virtual ~FrameSink() = default;
  /// Called once, before the first write, with the stream geometry.
  virtual void open(const StreamHeader& header) = 0;
  virtual void write(const Frame& frame) = 0;
  virtual void close() = 0;
};

namespace detail {

inline std::unique_ptr<std::ifstream> open_input(const std::filesystem::path& path) {
  auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*in) throw Error(Errc::SourceUnavailable, "cannot open " + path.string());
  return in;
}

inline std::unique_ptr<std::ofstream> open_output(const std::filesystem::path& path) {
  auto out = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*out) throw Error(Errc::SinkUnavailable, "cannot create " + path.string());
  return out;
}

}  // namespace detail

/// Y4M frames from a borrowed stream (stdin, a pipe, a stringstream).
class Y4mStreamSource final : public FrameSource {
 public:
  explicit Y4mStreamSource(std::istream& in) : reader_(in) {}
  const StreamHeader& header() const override { return reader_.header(); }
  std::optional<Frame> next() override { return reader_.next(); }

 private:
  Y4mReader reader_;
};

class Y4mFileSource final : public FrameSource {
 public:
  explicit Y4mFileSource(const std::filesystem::path& path)
      : in_(detail::open_input(path)), reader_(*in_) {}
  const StreamHeader& header() const override { return reader_.header(); }
  std::optional<Frame> next() override { return reader_.next(); }
  void close() override { in_->close(); }

 private:
  std::unique_ptr<std::ifstream> in_;
  Y4mReader reader_;
};

class RawFileSource final : public FrameSource {
 public:
  RawFileSource(const std::filesystem::path& path, StreamHeader header)
      : in_(detail::open_input(path)), reader_(*in_, std::move(header)) {}
  const StreamHeader& header() const override { return reader_.header(); }
  std::optional<Frame> next() override { return reader_.next(); }
  void close() override { in_->close(); }

 private:
  std::unique_ptr<std::ifstream> in_;
  RawReader reader_;
};

class RawStreamSource final : public FrameSource {
 public:
  RawStreamSource(std::istream& in, StreamHeader header) : reader_(in, std::move(header)) {}
  const StreamHeader& header() const override { return reader_.header(); }
  std::optional<Frame> next() override { return reader_.next(); }

 private:
  RawReader reader_;
};

/// Replays a frame list; indices are reassigned 0..N-1.
class MemorySource final : public FrameSource {
 public:
  MemorySource(StreamHeader header, std::vector<Frame> frames)
      : header_(std::move(header)), frames_(std::move(frames)) {}
  const StreamHeader& header() const override { return header_; }
  std::optional<Frame> next() override {
    if (pos_ == frames_.size()) return std::nullopt;
    Frame f = frames_[pos_];
    f.index = pos_++;
    return f;
  }

 private:
  StreamHeader header_;
  std::vector<Frame> frames_;
  std::size_t pos_ = 0;
};

/// Y4M into a borrowed stream.
class Y4mStreamSink final : public FrameSink {
 public:
  explicit Y4mStreamSink(std::ostream& out) : out_(&out) {}
  void open(const StreamHeader& header) override { writer_.emplace(*out_, header); }
  void write(const Frame& frame) override { writer_.value().write(frame); }
  void close() override {
    if (writer_) writer_->flush();
  }

 private:
  std::ostream* out_;
  std::optional<Y4mWriter> writer_;
};

class Y4mFileSink final : public FrameSink {
 public:
  explicit Y4mFileSink(std::filesystem::path path) : path_(std::move(path)) {}
  void open(const StreamHeader& header) override {
    out_ = detail::open_output(path_);
    writer_.emplace(*out_, header);
  }
  void write(const Frame& frame) override { writer_.value().write(frame); }
  void close() override {
    if (!out_) return;
    writer_->flush();
    out_->close();
    if (!*out_) throw Error(Errc::SinkUnavailable, "closing " + path_.string() + " failed");
  }

 private:
  std::filesystem::path path_;
  std::unique_ptr<std::ofstream> out_;
  std::optional<Y4mWriter> writer_;
};

class RawFileSink final : public FrameSink {
 public:
  explicit RawFileSink(std::filesystem::path path) : path_(std::move(path)) {}
  void open(const StreamHeader& header) override {
    out_ = detail::open_output(path_);
    writer_.emplace(*out_, header);
  }
  void write(const Frame& frame) override { writer_.value().write(frame); }
  void close() override {
    if (!out_) return;
    writer_->flush();
    out_->close();
    if (!*out_) throw Error(Errc::SinkUnavailable, "closing " + path_.string() + " failed");
  }

 private:
  std::filesystem::path path_;
  std::unique_ptr<std::ofstream> out_;
  std::optional<RawWriter> writer_;
};

/// Collects frames in memory (tests, oracles).
class MemorySink final : public FrameSink {
 public:
  void open(const StreamHeader& header) override { header_ = header; }
  void write(const Frame& frame) override {
    if (!header_ || !frame.matches(*header_)) {
      throw Error(Errc::DimensionMismatch, "frame geometry differs from stream header");
    }
    frames_.push_back(frame);
  }
  void close() override { closed_ = true; }

  const std::optional<StreamHeader>& header() const { return header_; }
  const std::vector<Frame>& frames() const { return frames_; }
  bool closed() const { return closed_; }

 private:
  std::optional<StreamHeader> header_;
  std::vector<Frame> frames_;
  bool closed_ = false;
};

/// Drains a source into a vector.
inline std::vector<Frame> read_all(FrameSource& source) {
  std::vector<Frame> frames;
  while (auto f = source.next()) frames.push_back(std::move(*f));
  source.close();
  return frames;
}

}  // namespace motionzip
