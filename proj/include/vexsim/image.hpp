#pragma once

// Flat program images and their on-disk form:
//   "VXS1" | base address (u32 LE) | entry point (u32 LE) | contents to EOF
// plus an optional text symbol file with one "0xADDRESS name" line per symbol.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace vexsim {

struct Image {
  uint32_t base = 0;
  uint32_t entry = 0;
  std::vector<uint8_t> bytes;
  std::map<std::string, uint32_t> symbols;

  uint32_t end() const { return base + static_cast<uint32_t>(bytes.size()); }
  bool operator==(const Image&) const = default;
};

class ImageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<uint8_t> serialize_image(const Image& image);
/// Throws ImageError on a bad magic or truncated header.
Image deserialize_image(const std::vector<uint8_t>& raw);

void write_image_file(const std::filesystem::path& path, const Image& image);
Image read_image_file(const std::filesystem::path& path);

std::string format_symbols(const Image& image);
/// Merges "0xADDR name" lines into image.symbols.
void parse_symbols(const std::string& text, Image& image);

}  // namespace vexsim
