#pragma once

// Raw waveform persistence.
//
// File layout, all fields little-endian:
//   char[4]  magic "CVQF"
//   u16      version (1)
//   u8       byte order marker, 'L'
//   u8       reserved, 0
//   u64      frame count
// then per frame:
//   u8       domain (0 baseband, 1 passband)
//   u8       units (0 raw, 1 SNU)
//   u8       flags (bit 0: image leakage warning)
//   u8       reserved, 0
//   f64      sample rate, Hz
//   f64      scale, raw units per stored unit
//   u64      sample count n
//   f64[n]   real parts (passband), or f64[2n] interleaved re, im (baseband)
// Tags are not stored.

#include <string>
#include <vector>

#include "cvqkd/core.hpp"

namespace cvqkd::bench {

inline constexpr char kFrameMagic[4] = {'C', 'V', 'Q', 'F'};
inline constexpr unsigned kFrameFormatVersion = 1;

// Throws IoError with the path on any write failure.
void save_frames(const std::vector<IQFrame>& frames, const std::string& path);

// Throws IoError on a bad magic, version or byte order marker, on a truncated
// header, or when a header length disagrees with the bytes present.
std::vector<IQFrame> load_frames(const std::string& path);

}  // namespace cvqkd::bench
