#include "cvqkd/bench/frame_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "cvqkd/errors.hpp"

namespace cvqkd::bench {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put(std::ofstream& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError(path, "cannot open frame file");
    in_.seekg(0, std::ios::end);
    remaining_ = static_cast<std::uint64_t>(in_.tellg());
    in_.seekg(0);
  }

  template <class T>
  T get(const char* what) {
    if (remaining_ < sizeof(T)) throw IoError(path_, std::string("truncated ") + what);
    unsigned char b[sizeof(T)];
    in_.read(reinterpret_cast<char*>(b), sizeof(T));
    if (!in_) throw IoError(path_, std::string("read failed at ") + what);
    remaining_ -= sizeof(T);
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
  }

  std::uint64_t remaining() const { return remaining_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::uint64_t remaining_ = 0;
};

}  // namespace

void save_frames(const std::vector<IQFrame>& frames, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out.write(kFrameMagic, 4);
  put<std::uint16_t>(out, kFrameFormatVersion);
  put<std::uint8_t>(out, 'L');
  put<std::uint8_t>(out, 0);
  put<std::uint64_t>(out, frames.size());
  for (const auto& f : frames) {
    const bool pass = f.domain() == Domain::Passband;
    put<std::uint8_t>(out, pass ? 1 : 0);
    put<std::uint8_t>(out, f.units() == Units::Snu ? 1 : 0);
    put<std::uint8_t>(out, f.image_leakage_warning() ? 1 : 0);
    put<std::uint8_t>(out, 0);
    put<double>(out, f.sample_rate());
    put<double>(out, f.scale());
    put<std::uint64_t>(out, f.size());
    for (const auto& v : f.samples()) {
      put<double>(out, v.real());
      if (!pass) put<double>(out, v.imag());
    }
  }
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

std::vector<IQFrame> load_frames(const std::string& path) {
  Reader r(path);
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.get<std::uint8_t>("magic"));
  if (std::memcmp(magic, kFrameMagic, 4) != 0) throw IoError(path, "not a CVQF frame file");
  const auto version = r.get<std::uint16_t>("version");
  if (version != kFrameFormatVersion)
    throw IoError(path, "unsupported format version " + std::to_string(version));
  if (r.get<std::uint8_t>("byte order") != 'L') throw IoError(path, "unsupported byte order");
  r.get<std::uint8_t>("reserved");
  const auto count = r.get<std::uint64_t>("frame count");

  std::vector<IQFrame> frames;
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto domain = r.get<std::uint8_t>("frame header");
    const auto units = r.get<std::uint8_t>("frame header");
    const auto flags = r.get<std::uint8_t>("frame header");
    r.get<std::uint8_t>("frame header");
    const double rate = r.get<double>("frame header");
    const double scale = r.get<double>("frame header");
    const auto n = r.get<std::uint64_t>("frame header");
    if (domain > 1 || units > 1) throw IoError(path, "corrupt frame header " + std::to_string(k));
    const std::uint64_t per = domain == 1 ? 8 : 16;
    if (n == 0 || n > r.remaining() / per)
      throw IoError(path, "frame " + std::to_string(k) + " declares " + std::to_string(n) +
                              " samples but the payload is shorter");
    std::vector<cplx> s(n);
    for (auto& v : s) {
      const double re = r.get<double>("samples");
      const double im = domain == 1 ? 0.0 : r.get<double>("samples");
      v = {re, im};
    }
    try {
      IQFrame f(std::move(s), rate, domain == 1 ? Domain::Passband : Domain::Baseband, scale,
                units == 1 ? Units::Snu : Units::Raw);
      frames.push_back(f.with_image_warning(flags & 1));
    } catch (const DomainError& e) {
      throw IoError(path, "frame " + std::to_string(k) + ": " + e.what());
    }
  }
  if (r.remaining() != 0) throw IoError(path, "trailing bytes after the last frame");
  return frames;
}

}  // namespace cvqkd::bench
