#include "vexsim/image.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

namespace vexsim {

namespace {

constexpr char kMagic[4] = {'V', 'X', 'S', '1'};

void put32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t get32(const uint8_t* p) {
  return uint32_t{p[0]} | uint32_t{p[1]} << 8 | uint32_t{p[2]} << 16 | uint32_t{p[3]} << 24;
}

}  // namespace

std::vector<uint8_t> serialize_image(const Image& image) {
  std::vector<uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put32(out, image.base);
  put32(out, image.entry);
  out.insert(out.end(), image.bytes.begin(), image.bytes.end());
  return out;
}

Image deserialize_image(const std::vector<uint8_t>& raw) {
  if (raw.size() < 12 || !std::equal(std::begin(kMagic), std::end(kMagic), raw.begin()))
    throw ImageError("not a VXS1 image");
  Image image;
  image.base = get32(raw.data() + 4);
  image.entry = get32(raw.data() + 8);
  image.bytes.assign(raw.begin() + 12, raw.end());
  return image;
}

void write_image_file(const std::filesystem::path& path, const Image& image) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ImageError("cannot write " + path.string());
  const auto raw = serialize_image(image);
  f.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

Image read_image_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ImageError("cannot read " + path.string());
  std::vector<uint8_t> raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_image(raw);
}

std::string format_symbols(const Image& image) {
  std::vector<std::pair<uint32_t, std::string>> rows;
  for (const auto& [name, addr] : image.symbols) rows.emplace_back(addr, name);
  std::sort(rows.begin(), rows.end());
  std::string out;
  char buf[16];
  for (const auto& [addr, name] : rows) {
    std::snprintf(buf, sizeof buf, "0x%08x ", addr);
    out += buf + name + "\n";
  }
  return out;
}

void parse_symbols(const std::string& text, Image& image) {
  std::istringstream in(text);
  std::string addr, name;
  while (in >> addr >> name) image.symbols[name] = static_cast<uint32_t>(std::stoul(addr, nullptr, 0));
}

}  // namespace vexsim
