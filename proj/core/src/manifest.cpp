#include "debtav/manifest.hpp"

#include <fstream>

#include "debtav/errors.hpp"

namespace debtav {

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

Manifest::Manifest(std::string command)
    : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

void Manifest::input(const std::filesystem::path& path) { inputs_.push_back(path); }
void Manifest::output(const std::filesystem::path& path) { outputs_.push_back(path); }

nlohmann::json Manifest::to_json() const {
  auto describe = [](const std::filesystem::path& p) {
    nlohmann::json j{{"path", p.string()}};
    std::error_code ec;
    if (std::filesystem::is_regular_file(p, ec)) {
      j["bytes"] = std::filesystem::file_size(p, ec);
      j["fnv1a64"] = file_digest(p);
    }
    return j;
  };
  nlohmann::json j;
  j["schema_version"] = 1;
  j["tool"] = "debtav";
  j["version"] = DEBTAV_VERSION;
  j["command"] = command_;
  j["seed"] = seed_ ? nlohmann::json(*seed_) : nlohmann::json(nullptr);
  j["settings"] = settings_;
  j["inputs"] = nlohmann::json::array();
  for (const auto& p : inputs_) j["inputs"].push_back(describe(p));
  j["outputs"] = nlohmann::json::array();
  for (const auto& p : outputs_) j["outputs"].push_back(describe(p));
  j["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  return j;
}

void Manifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  out << to_json().dump(2) << '\n';
}

}  // namespace debtav
