#include "gle/report.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gle {

namespace {

uint32_t rotl(uint32_t x, int s) { return (x << s) | (x >> (32 - s)); }

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

}  // namespace

std::string sha1_hex(std::string_view data) {
  std::array<uint32_t, 5> h = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu,
                               0x10325476u, 0xC3D2E1F0u};
  std::string msg(data);
  const uint64_t bit_len = static_cast<uint64_t>(msg.size()) * 8;
  msg.push_back(static_cast<char>(0x80));
  while (msg.size() % 64 != 56) msg.push_back('\0');
  for (int i = 7; i >= 0; --i)
    msg.push_back(static_cast<char>((bit_len >> (8 * i)) & 0xFF));

  for (size_t chunk = 0; chunk < msg.size(); chunk += 64) {
    uint32_t w[80];
    for (int i = 0; i < 16; ++i) {
      w[i] = 0;
      for (int b = 0; b < 4; ++b)
        w[i] = (w[i] << 8) |
               static_cast<uint8_t>(msg[chunk + 4 * static_cast<size_t>(i) +
                                        static_cast<size_t>(b)]);
    }
    for (int i = 16; i < 80; ++i)
      w[i] = rotl(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int i = 0; i < 80; ++i) {
      uint32_t f, k;
      if (i < 20) {
        f = (b & c) | (~b & d);
        k = 0x5A827999u;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1u;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDCu;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6u;
      }
      const uint32_t tmp = rotl(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rotl(b, 30);
      b = a;
      a = tmp;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
  }

  std::ostringstream out;
  out << std::hex;
  for (uint32_t word : h)
    for (int i = 7; i >= 0; --i) out << ((word >> (4 * i)) & 0xF);
  return out.str();
}

void write_csv(const std::string& path,
               const std::map<std::string, std::string>& config,
               const std::string& header, const std::string& rows) {
  std::ofstream out = open_or_throw(path);
  for (const auto& [k, v] : config) out << "# " << k << "=" << v << "\n";
  out << "# content_sha1=" << sha1_hex(header + "\n" + rows) << "\n";
  out << header << "\n" << rows;
}

void write_json(const std::string& path,
                const std::map<std::string, std::string>& config,
                const nlohmann::json& result) {
  nlohmann::json doc;
  doc["config"] = config;
  doc["result"] = result;
  doc["content_sha1"] = sha1_hex(result.dump());
  std::ofstream out = open_or_throw(path);
  out << doc.dump(2) << "\n";
}

}  // namespace gle
