#include "lapvard/io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace lapvard {

namespace {

static_assert(sizeof(float) == 4, "raw format requires 32-bit float");

std::uint32_t to_le(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
}

}  // namespace

void write_raw(const std::string& base_path, const Eigen::Ref<const Vector>& data,
               const RawHeader& header) {
    if (header.rows * header.cols != data.size())
        throw std::invalid_argument("write_raw: header dimensions do not match data length");
    {
        std::ofstream hdr(base_path + ".hdr");
        if (!hdr) throw std::runtime_error("write_raw: cannot open " + base_path + ".hdr");
        hdr << "format raw_float32_le\n"
            << "layout row_major\n"
            << "rows " << header.rows << "\n"
            << "cols " << header.cols << "\n";
        if (!header.units.empty()) hdr << "units " << header.units << "\n";
        for (const auto& [k, v] : header.extra) hdr << k << ' ' << v << "\n";
    }
    std::ofstream raw(base_path + ".raw", std::ios::binary);
    if (!raw) throw std::runtime_error("write_raw: cannot open " + base_path + ".raw");
    std::vector<std::uint32_t> buf(static_cast<size_t>(data.size()));
    for (Index i = 0; i < data.size(); ++i) {
        const float f = static_cast<float>(data[i]);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        buf[static_cast<size_t>(i)] = to_le(bits);
    }
    raw.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * 4));
}

Vector read_raw(const std::string& base_path, RawHeader* header) {
    RawHeader h;
    {
        std::ifstream hdr(base_path + ".hdr");
        if (!hdr) throw std::runtime_error("read_raw: cannot open " + base_path + ".hdr");
        std::string line;
        while (std::getline(hdr, line)) {
            std::istringstream ss(line);
            std::string key, value;
            ss >> key;
            std::getline(ss, value);
            if (!value.empty() && value.front() == ' ') value.erase(0, 1);
            if (key == "rows")
                h.rows = std::stoll(value);
            else if (key == "cols")
                h.cols = std::stoll(value);
            else if (key == "units")
                h.units = value;
            else if (key == "format") {
                if (value != "raw_float32_le")
                    throw std::runtime_error("read_raw: unsupported format " + value);
            } else if (key != "layout" && !key.empty())
                h.extra[key] = value;
        }
    }
    if (h.rows <= 0 || h.cols <= 0)
        throw std::runtime_error("read_raw: missing dimensions in " + base_path + ".hdr");
    std::ifstream raw(base_path + ".raw", std::ios::binary);
    if (!raw) throw std::runtime_error("read_raw: cannot open " + base_path + ".raw");
    const size_t n = static_cast<size_t>(h.rows * h.cols);
    std::vector<std::uint32_t> buf(n);
    raw.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * 4));
    if (static_cast<size_t>(raw.gcount()) != n * 4)
        throw std::runtime_error("read_raw: truncated file " + base_path + ".raw");
    Vector out(static_cast<Index>(n));
    for (size_t i = 0; i < n; ++i) {
        const std::uint32_t bits = to_le(buf[i]);
        float f;
        std::memcpy(&f, &bits, 4);
        out[static_cast<Index>(i)] = f;
    }
    if (header) *header = std::move(h);
    return out;
}

void write_pgm(const std::string& path, const Eigen::Ref<const Vector>& data, Index rows,
               Index cols) {
    if (rows * cols != data.size())
        throw std::invalid_argument("write_pgm: dimensions do not match data length");
    const Real lo = data.minCoeff();
    const Real hi = data.maxCoeff();
    const Real span = hi > lo ? hi - lo : Real(1);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
    out << "P5\n" << cols << ' ' << rows << "\n255\n";
    std::vector<unsigned char> buf(static_cast<size_t>(data.size()));
    for (Index i = 0; i < data.size(); ++i) {
        const Real t = (data[i] - lo) / span;
        buf[static_cast<size_t>(i)] =
            static_cast<unsigned char>(std::clamp<Real>(std::round(t * 255), 0, 255));
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
}

}  // namespace lapvard
