#pragma once

#include "lapvard/types.hpp"

#include <map>
#include <string>

namespace lapvard {

// Raw binary format: little-endian IEEE-754 float32 values, row-major, in
// <base>.raw, with a plain-text sidecar <base>.hdr of "key value" lines
// (format, rows, cols, units plus any extra keys).
struct RawHeader {
    Index rows = 0;
    Index cols = 0;
    std::string units;
    std::map<std::string, std::string> extra;
};

void write_raw(const std::string& base_path, const Eigen::Ref<const Vector>& data,
               const RawHeader& header);

Vector read_raw(const std::string& base_path, RawHeader* header = nullptr);

// 8-bit binary PGM preview with min-max windowing.
void write_pgm(const std::string& path, const Eigen::Ref<const Vector>& data, Index rows,
               Index cols);

}  // namespace lapvard
