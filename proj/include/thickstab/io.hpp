#pragma once

#include "thickstab/grid.hpp"
#include "thickstab/support_mask.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace thickstab {

// "TSF1", u32 dim, u32 N, f64 extent, N^dim interleaved (re, im) f64, little-endian.
std::string encode_field(const SpectralField& f);
SpectralField decode_field(std::string_view bytes);
// "TSM1", u32 dim, u32 N, f64 extent, N^dim f64 fractions, little-endian.
std::string encode_mask(const SupportMask& m);
SupportMask decode_mask(std::string_view bytes);

void write_file(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

// Git blob id: SHA-1 over "blob <size>\0" followed by the content.
std::string git_blob_hash(std::string_view content);

// Shortest decimal that round-trips; "inf", "-inf", "nan" for non-finite values.
std::string format_double(double v);

// CSV text with a header row, '.' decimals and LF line endings.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  CsvWriter& row(const std::vector<std::string>& cells);
  CsvWriter& row(const std::vector<double>& values);
  std::size_t rows() const noexcept { return rows_; }
  const std::string& text() const noexcept { return text_; }

 private:
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string text_;
};

}  // namespace thickstab
