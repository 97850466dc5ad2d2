// Copyright 2026 The emgspeech Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "provenance.hpp"

#include "emgspeech/error.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iterator>
#include <memory>

namespace emgspeech::cli {

std::string Sha256Hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error(ErrorCode::kIo, "SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xf];
  }
  return hex;
}

std::string Sha256File(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return Sha256Hex(std::string(std::istreambuf_iterator<char>(in), {}));
}

Provenance::Provenance(std::string subcommand, const nlohmann::json& effective_config, std::uint64_t seed)
    : subcommand_(std::move(subcommand)), config_(effective_config), seed_(seed) {}

void Provenance::AddInput(const std::string& label, const std::filesystem::path& path) {
  inputs_[label] = Sha256File(path);
}

void Provenance::Write(const std::filesystem::path& out_dir) const {
  std::filesystem::create_directories(out_dir);
  const std::string config_text = config_.dump(2) + "\n";
  std::ofstream(out_dir / "config.json", std::ios::binary) << config_text;
  nlohmann::json record;
  record["subcommand"] = subcommand_;
  record["config_sha256"] = Sha256Hex(config_text);
  record["seed"] = seed_;
  record["inputs"] = inputs_;
  std::ofstream(out_dir / "provenance.json", std::ios::binary) << record.dump(2) << "\n";
}

}  // namespace emgspeech::cli
