#include <filesystem>
#include <fstream>
#include <iterator>
#include <system_error>

#include <unistd.h>

#include "phylokit/error.hpp"
#include "phylokit/fileutil.hpp"

namespace phylokit {
namespace fs = std::filesystem;
namespace {

template <typename Container>
Container read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  Container out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::kIo, "read error on " + path);
  return out;
}

void write_atomic(const std::string& path, const char* data, std::size_t size) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot open " + tmp.string() + " for writing");
    out.write(data, static_cast<std::streamsize>(size));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      fail(ErrorCode::kIo, "write error on " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::kIo, "cannot rename onto " + path);
  }
}

}  // namespace

std::string read_text_file(const std::string& path) { return read_all<std::string>(path); }

std::vector<std::uint8_t> read_binary_file(const std::string& path) {
  const auto s = read_all<std::string>(path);
  return {s.begin(), s.end()};
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  write_atomic(path, contents.data(), contents.size());
}

void write_file_atomic(const std::string& path, const std::vector<std::uint8_t>& contents) {
  write_atomic(path, reinterpret_cast<const char*>(contents.data()), contents.size());
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec || !fs::is_directory(path)) fail(ErrorCode::kIo, "cannot create directory " + path);
}

}  // namespace phylokit
