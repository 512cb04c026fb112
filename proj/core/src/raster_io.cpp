#include "routepilot/raster_io.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include <fmt/format.h>

namespace routepilot {
namespace {

constexpr std::array<char, 4> kDepthMagic{'D', 'P', 'F', '1'};
// Guards against absurd headers before allocating.
constexpr std::uint32_t kMaxDim = 1u << 15;

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                              static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b.data(), b.size());
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), b.size());
  if (!in) throw FormatError("truncated depth header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

// Next whitespace-delimited header token of a PGM, skipping comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!tok.empty()) break;
    } else {
      tok.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  if (tok.empty()) throw FormatError("truncated PGM header");
  return tok;
}

std::uint32_t parse_dim(const std::string& tok) {
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(tok, &pos);
  } catch (const std::exception&) {
    throw FormatError(fmt::format("bad PGM header field '{}'", tok));
  }
  if (pos != tok.size()) throw FormatError(fmt::format("bad PGM header field '{}'", tok));
  return static_cast<std::uint32_t>(v);
}

}  // namespace

void write_depth(std::ostream& out, const DepthMap& depth) {
  out.write(kDepthMagic.data(), kDepthMagic.size());
  put_u32(out, static_cast<std::uint32_t>(depth.rows()));
  put_u32(out, static_cast<std::uint32_t>(depth.cols()));
  put_u32(out, 0);
  for (float v : depth.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  if (!out) throw FormatError("failed writing depth raster");
}

DepthMap read_depth(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kDepthMagic) throw FormatError("depth raster has wrong magic (expected DPF1)");
  const std::uint32_t rows = get_u32(in);
  const std::uint32_t cols = get_u32(in);
  (void)get_u32(in);
  if (rows == 0 || cols == 0 || rows > kMaxDim || cols > kMaxDim) {
    throw FormatError(fmt::format("depth raster has invalid shape {}x{}", rows, cols));
  }
  std::vector<float> data(static_cast<std::size_t>(rows) * cols);
  for (auto& v : data) v = std::bit_cast<float>(get_u32(in));
  return DepthMap(rows, cols, std::move(data));
}

void save_depth(const DepthMap& depth, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(fmt::format("cannot write {}", path.string()));
  write_depth(out, depth);
}

DepthMap load_depth(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open {}", path.string()));
  return read_depth(in);
}

void write_pgm(std::ostream& out, const Raster<std::uint8_t>& raster) {
  out << "P5\n" << raster.cols() << ' ' << raster.rows() << "\n255\n";
  out.write(reinterpret_cast<const char*>(raster.data().data()),
            static_cast<std::streamsize>(raster.size()));
  if (!out) throw FormatError("failed writing PGM");
}

Raster<std::uint8_t> read_pgm(std::istream& in) {
  if (pgm_token(in) != "P5") throw FormatError("not a binary PGM (P5)");
  const std::uint32_t cols = parse_dim(pgm_token(in));
  const std::uint32_t rows = parse_dim(pgm_token(in));
  const std::uint32_t maxval = parse_dim(pgm_token(in));
  if (maxval != 255) throw FormatError("PGM maxval must be 255");
  if (rows == 0 || cols == 0 || rows > kMaxDim || cols > kMaxDim) {
    throw FormatError(fmt::format("PGM has invalid shape {}x{}", rows, cols));
  }
  std::vector<std::uint8_t> data(static_cast<std::size_t>(rows) * cols);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size())) throw FormatError("truncated PGM data");
  return Raster<std::uint8_t>(rows, cols, std::move(data));
}

void save_pgm(const Raster<std::uint8_t>& raster, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(fmt::format("cannot write {}", path.string()));
  write_pgm(out, raster);
}

Raster<std::uint8_t> load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open {}", path.string()));
  return read_pgm(in);
}

}  // namespace routepilot
