#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace gnf {

// Whole-file read; throws gnf::Error on I/O failure.
std::string read_file(const std::filesystem::path& path);

// Atomic write: content goes to "<path>.tmp" first, then renames over
// the destination, so readers never observe a half-written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace gnf
