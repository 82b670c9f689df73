#include "ofnav/image.hpp"

#include <cctype>
#include <fstream>

namespace ofnav {

FloatImage FloatImage::from_gray(const GrayImage& img) {
    FloatImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        out.pixels[i] = static_cast<float>(img.pixels[i]);
    }
    return out;
}

namespace {

int next_pnm_int(std::istream& in, const std::filesystem::path& path) {
    // Skip whitespace and '#' comment lines between header tokens.
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    if (c == EOF || !std::isdigit(c)) {
        throw IoError("malformed PGM header: " + path.string());
    }
    int value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        c = in.get();
    }
    return value;
}

}  // namespace

GrayImage load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5') {
        throw IoError("not a binary PGM (P5) file: " + path.string());
    }
    const int width = next_pnm_int(in, path);
    const int height = next_pnm_int(in, path);
    const int maxval = next_pnm_int(in, path);
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
        throw IoError("unsupported PGM geometry or depth: " + path.string());
    }
    GrayImage img(width, height);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
        throw IoError("truncated PGM payload: " + path.string());
    }
    return img;
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

}  // namespace ofnav
