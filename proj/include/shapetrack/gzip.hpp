#pragma once

#include <string>

namespace shapetrack::io {

/// Gzip with a fixed header (zero mtime, unix OS byte) so identical input
/// always yields identical bytes.
std::string gzip_compress(const std::string& data);
std::string gzip_decompress(const std::string& data);

void write_file(const std::string& path, const std::string& data);
std::string read_file(const std::string& path);
bool file_exists(const std::string& path);

}  // namespace shapetrack::io
