#include "pbrnn/binary_io.hpp"

#include "pbrnn/errors.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

namespace pbrnn {

void ByteReader::require(std::size_t n) const {
  if (bytes_.size() - pos_ < n) {
    throw FormatError((context_.empty() ? std::string("binary data") : context_) +
                      ": truncated (needed " + std::to_string(n) + " more bytes at offset " +
                      std::to_string(pos_) + ")");
  }
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path &path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

} // namespace pbrnn
