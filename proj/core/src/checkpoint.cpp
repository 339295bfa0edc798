#include "yoloo/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "yoloo/errors.hpp"

namespace yoloo {

namespace {

constexpr std::array<char, 8> kMagic{'L', 'G', 'P', 'E', 'N', 'C', '0', '1'};

void put_u32(std::vector<char>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  return v;
}

std::vector<std::int64_t> shape_of(const ConstTensorView& t) {
  if (t.cols == 1 && t.name.find(".weight") == std::string::npos) return {t.rows};
  return {t.rows, t.cols};
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  nlohmann::json header;
  header["format"] = "lgpenc";
  header["version"] = 1;
  header["dtype"] = "float32";
  header["layout"] = "row-major";
  header["tau"] = ckpt.tau ? nlohmann::json(*ckpt.tau) : nlohmann::json(nullptr);
  header["tensors"] = nlohmann::json::array();

  std::vector<char> payload;
  for (const auto& t : ckpt.params.tensors()) {
    const std::size_t offset = payload.size();
    // Column-major in memory, row-major on disk.
    for (Eigen::Index r = 0; r < t.rows; ++r) {
      for (Eigen::Index c = 0; c < t.cols; ++c) {
        const float f = static_cast<float>(t.data[c * t.rows + r]);
        put_u32(payload, std::bit_cast<std::uint32_t>(f));
      }
    }
    header["tensors"].push_back({{"name", t.name},
                                 {"shape", shape_of(t)},
                                 {"offset", offset},
                                 {"nbytes", payload.size() - offset}});
  }

  const std::string text = header.dump();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open checkpoint for writing: " + path.string());
  os.write(kMagic.data(), kMagic.size());
  const auto len = static_cast<std::uint64_t>(text.size());
  for (int b = 0; b < 8; ++b) os.put(static_cast<char>((len >> (8 * b)) & 0xFFu));
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!os) throw Error("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open checkpoint: " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw Error("not an lgpenc checkpoint: " + path.string());
  }
  std::uint64_t len = 0;
  for (int b = 0; b < 8; ++b) len |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[8 + static_cast<std::size_t>(b)])) << (8 * b);
  if (16 + len > bytes.size()) throw Error("truncated checkpoint header: " + path.string());
  const nlohmann::json header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(len));
  if (header.value("format", "") != "lgpenc" || header.value("dtype", "") != "float32") {
    throw Error("unsupported checkpoint format: " + path.string());
  }
  const char* payload = bytes.data() + 16 + len;
  const std::size_t payload_size = bytes.size() - 16 - len;

  Checkpoint ckpt{EncoderParams::zeros(), std::nullopt};
  if (header.contains("tau") && !header["tau"].is_null()) ckpt.tau = header["tau"].get<double>();

  auto views = ckpt.params.tensors();
  const auto& entries = header.at("tensors");
  if (entries.size() != views.size()) throw Error("checkpoint tensor count mismatch");
  for (std::size_t k = 0; k < views.size(); ++k) {
    const auto& e = entries[k];
    auto& t = views[k];
    if (e.at("name").get<std::string>() != t.name) {
      throw Error("checkpoint tensor " + std::to_string(k) + " is '" +
                  e.at("name").get<std::string>() + "', expected '" + t.name + "'");
    }
    const auto shape = e.at("shape").get<std::vector<std::int64_t>>();
    std::int64_t count = 1;
    for (auto d : shape) count *= d;
    if (count != t.size()) throw Error("checkpoint tensor '" + t.name + "' has wrong shape");
    const auto offset = e.at("offset").get<std::size_t>();
    if (offset + static_cast<std::size_t>(count) * 4 > payload_size) {
      throw Error("checkpoint tensor '" + t.name + "' exceeds payload");
    }
    const char* p = payload + offset;
    for (Eigen::Index r = 0; r < t.rows; ++r) {
      for (Eigen::Index c = 0; c < t.cols; ++c) {
        t.data[c * t.rows + r] = std::bit_cast<float>(get_u32(p));
        p += 4;
      }
    }
  }
  return ckpt;
}

}  // namespace yoloo
