#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mitodet {

std::string read_text_file(const std::filesystem::path& path);

// All output files go through here: write to a sibling temp file, then
// rename into place, so readers never observe a partial file.
void atomic_write_file(const std::filesystem::path& path, const void* data, std::size_t size);
void atomic_write_file(const std::filesystem::path& path, const std::string& text);
void atomic_write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

// Sorted list of regular files in `dir` with one of the given extensions
// (lowercase, with dot). Directory iteration order is unspecified, so every
// caller that cares about determinism goes through this.
std::vector<std::filesystem::path> list_files(const std::filesystem::path& dir,
                                              const std::vector<std::string>& extensions);

}  // namespace mitodet
