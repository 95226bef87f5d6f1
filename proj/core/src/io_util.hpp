#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace depthtrack {

// Whole-file helpers. Writers go through a sibling temp file and rename, so a
// failed run never leaves a partial file at the destination.
std::vector<char> read_file_bytes(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path,
                       const char* data, size_t size);
void write_text_atomic(const std::filesystem::path& path,
                       const std::string& text);

}  // namespace depthtrack
