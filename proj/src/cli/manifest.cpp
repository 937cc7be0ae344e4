#include "safe/cli/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "safe/error.hpp"

namespace safe::cli {

namespace {

using Json = nlohmann::ordered_json;

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      fail(Errc::IoError, "cannot initialise SHA-256");
    }
  }

  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md.data(), &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(kHex[md[i] >> 4]);
      out.push_back(kHex[md[i] & 0xF]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

Json files_to_json(const std::map<std::string, FileRecord>& files) {
  Json j = Json::object();
  for (const auto& [role, f] : files) j[role] = {{"path", f.path}, {"sha256", f.sha256}};
  return j;
}

std::map<std::string, FileRecord> files_from_json(const Json& j) {
  std::map<std::string, FileRecord> out;
  for (const auto& [role, f] : j.items()) out[role] = {f.at("path").get<std::string>(), f.at("sha256").get<std::string>()};
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(Errc::FileMissing, "no such file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

std::string Manifest::to_json() const {
  Json j;
  j["tool_version"] = tool_version;
  j["command"] = command;
  j["arguments"] = arguments;
  j["settings"] = Json(settings);
  j["inputs"] = files_to_json(inputs);
  j["outputs"] = files_to_json(outputs);
  return j.dump(2) + "\n";
}

Manifest Manifest::from_json(std::string_view text) {
  try {
    const Json j = Json::parse(text);
    Manifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.arguments = j.at("arguments").get<std::vector<std::string>>();
    m.settings = j.at("settings").get<std::map<std::string, std::string>>();
    m.inputs = files_from_json(j.at("inputs"));
    m.outputs = files_from_json(j.at("outputs"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ParseError, std::string("malformed manifest: ") + e.what());
  }
}

Manifest Manifest::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(Errc::FileMissing, "no such file: " + path.string());
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void Manifest::verify_inputs() const {
  for (const auto& [role, f] : inputs) {
    if (sha256_file(f.path) != f.sha256) {
      fail(Errc::ChecksumMismatch, "input '" + role + "' (" + f.path + ") changed since the manifest was written");
    }
  }
}

}  // namespace safe::cli
