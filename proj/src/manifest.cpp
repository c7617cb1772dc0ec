#include "xpra/manifest.hpp"

#include <array>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "xpra/error.hpp"

namespace xpra {

std::string file_sha256(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::io, "cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

RunManifest::RunManifest(std::string subcommand)
    : subcommand_(std::move(subcommand)), started_(std::chrono::system_clock::now()),
      started_mono_(std::chrono::steady_clock::now()) {}

void RunManifest::add_input(const std::filesystem::path &path) {
  inputs_.emplace_back(path.string(), file_sha256(path));
}

void RunManifest::add_output(const std::filesystem::path &path) {
  outputs_.push_back(path.string());
}

nlohmann::json RunManifest::to_json() const {
  const std::time_t t = std::chrono::system_clock::to_time_t(started_);
  std::tm utc{};
  gmtime_r(&t, &utc);
  std::ostringstream stamp;
  stamp << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started_mono_).count();

  nlohmann::json inputs = nlohmann::json::array();
  for (const auto &[p, digest] : inputs_)
    inputs.push_back({{"path", p}, {"sha256", digest}});
  return {{"subcommand", subcommand_},
          {"flags", flags_},
          {"inputs", inputs},
          {"seed", seed_ ? nlohmann::json(*seed_) : nlohmann::json(nullptr)},
          {"tool_version", kToolVersion},
          {"started_at", stamp.str()},
          {"wall_clock_seconds", wall},
          {"outputs", outputs_}};
}

void RunManifest::write(const std::filesystem::path &path) const {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorKind::io, "cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

} // namespace xpra
