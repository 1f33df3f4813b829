#include "thickstab/io.hpp"

#include "thickstab/errors.hpp"

#include <openssl/evp.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace thickstab {

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(std::string_view bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw InvalidArgument("binary file truncated");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

void put_header(std::string& out, const char* magic, const Grid& g) {
  out.append(magic, 4);
  put<std::uint32_t>(out, std::uint32_t(g.dim()));
  put<std::uint32_t>(out, std::uint32_t(g.points()));
  put<double>(out, g.extent());
}

Grid take_header(std::string_view bytes, const char* magic, std::size_t& pos) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != std::string_view(magic, 4))
    throw InvalidArgument(std::string("missing ") + magic + " magic");
  pos = 4;
  const auto dim = take<std::uint32_t>(bytes, pos);
  const auto n = take<std::uint32_t>(bytes, pos);
  const auto extent = take<double>(bytes, pos);
  return Grid(int(dim), extent, int(n));
}

}  // namespace

std::string encode_field(const SpectralField& f) {
  std::string out;
  put_header(out, "TSF1", f.grid());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    put<double>(out, f[i].real());
    put<double>(out, f[i].imag());
  }
  return out;
}

SpectralField decode_field(std::string_view bytes) {
  std::size_t pos = 0;
  const Grid g = take_header(bytes, "TSF1", pos);
  ComplexArray v(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double re = take<double>(bytes, pos);
    const double im = take<double>(bytes, pos);
    v(i) = Complex(re, im);
  }
  if (pos != bytes.size()) throw InvalidArgument("TSF1 file has trailing bytes");
  return SpectralField(g, std::move(v));
}

std::string encode_mask(const SupportMask& m) {
  std::string out;
  put_header(out, "TSM1", m.grid());
  for (Eigen::Index i = 0; i < m.fraction().size(); ++i) put<double>(out, m.fraction()(i));
  return out;
}

SupportMask decode_mask(std::string_view bytes) {
  std::size_t pos = 0;
  const Grid g = take_header(bytes, "TSM1", pos);
  RealArray v(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) v(i) = take<double>(bytes, pos);
  if (pos != bytes.size()) throw InvalidArgument("TSM1 file has trailing bytes");
  return SupportMask(g, std::move(v));
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw InvalidArgument("failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string git_blob_hash(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw NumericalFailure("SHA-1 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  if (header.empty()) throw InvalidArgument("CSV needs at least one column");
  for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
  text_ += '\n';
}

CsvWriter& CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw InvalidArgument("CSV row width does not match header");
  for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
  text_ += '\n';
  ++rows_;
  return *this;
}

CsvWriter& CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  return row(cells);
}

}  // namespace thickstab
