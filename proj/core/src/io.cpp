#include "codeshift/io.hpp"

#include <cstdio>
#include <fstream>
#include <system_error>

#include "codeshift/error.hpp"

namespace fs = std::filesystem;

namespace codeshift {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(Errc::io_error, "read failed for " + path.string());
    return content;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::io_error, "cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error(Errc::io_error, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error(Errc::io_error, "rename to " + path.string() + " failed: " + ec.message());
    }
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        std::size_t len = end - start;
        if (len > 0 && text[start + len - 1] == '\r') --len;
        lines.push_back(text.substr(start, len));
        start = end + 1;
    }
    return lines;
}

bool is_valid_utf8(const std::string& bytes) {
    std::size_t i = 0;
    const std::size_t n = bytes.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(bytes[i]);
        std::size_t extra;
        unsigned cp_min;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xe0) == 0xc0) {
            extra = 1;
            cp_min = 0x80;
        } else if ((c & 0xf0) == 0xe0) {
            extra = 2;
            cp_min = 0x800;
        } else if ((c & 0xf8) == 0xf0) {
            extra = 3;
            cp_min = 0x10000;
        } else {
            return false;
        }
        if (i + extra >= n) return false;
        unsigned cp = c & (0x3f >> extra);
        for (std::size_t k = 1; k <= extra; ++k) {
            unsigned char cc = static_cast<unsigned char>(bytes[i + k]);
            if ((cc & 0xc0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3f);
        }
        if (cp < cp_min) return false;                  // overlong
        if (cp > 0x10ffff) return false;                // out of range
        if (cp >= 0xd800 && cp <= 0xdfff) return false; // surrogate
        i += extra + 1;
    }
    return true;
}

} // namespace codeshift
