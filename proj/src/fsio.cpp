#include "mitodet/fsio.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "mitodet/common.hpp"
#include "mitodet/rng.hpp"

namespace fs = std::filesystem;

namespace mitodet {

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BadInput("cannot open file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void atomic_write_file(const fs::path& path, const void* data, std::size_t size) {
    const fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
    std::error_code ec;
    fs::create_directories(dir, ec);

    // unique-ish temp name in the same directory so rename() stays atomic
    static std::atomic<std::uint64_t> counter{0};
    std::uint64_t state = fnv1a(path.string()) ^ counter.fetch_add(1);
    const fs::path tmp = dir / (path.filename().string() + ".tmp" + std::to_string(splitmix64(state) & 0xffffff));

    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw BadInput("cannot create file '" + tmp.string() + "'");
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
        if (!out) {
            out.close();
            fs::remove(tmp, ec);
            throw InternalError("short write to '" + tmp.string() + "'");
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw InternalError("cannot rename temp file into '" + path.string() + "'");
    }
}

void atomic_write_file(const fs::path& path, const std::string& text) {
    atomic_write_file(path, text.data(), text.size());
}

void atomic_write_file(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    atomic_write_file(path, bytes.data(), bytes.size());
}

std::vector<fs::path> list_files(const fs::path& dir, const std::vector<std::string>& extensions) {
    if (!fs::is_directory(dir)) throw BadInput("'" + dir.string() + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (std::find(extensions.begin(), extensions.end(), ext) != extensions.end())
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace mitodet
