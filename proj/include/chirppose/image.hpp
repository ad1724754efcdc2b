#pragma once

// Small RGB raster: Bresenham lines, filled disks, and deterministic PNG
// (fixed zlib settings) plus PPM output.

#include <zlib.h>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace chirppose {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    bool operator==(const Rgb&) const = default;
};

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major RGB

    Image() = default;
    Image(int w, int h, Rgb fill = {0, 0, 0}) : width(w), height(h) {
        if (w <= 0 || h <= 0) throw std::invalid_argument("image: canvas must be positive");
        pixels.resize(static_cast<std::size_t>(w) * h * 3);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) set(x, y, fill);
    }

    bool inside(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    void set(int x, int y, Rgb c) {
        if (!inside(x, y)) return;  // drawing clips at the canvas edge
        const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
        pixels[i] = c.r;
        pixels[i + 1] = c.g;
        pixels[i + 2] = c.b;
    }

    Rgb get(int x, int y) const {
        if (!inside(x, y)) throw std::out_of_range("image: pixel outside canvas");
        const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
        return {pixels[i], pixels[i + 1], pixels[i + 2]};
    }
};

inline void draw_line(Image& img, int x0, int y0, int x1, int y1, Rgb c) {
    int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        img.set(x0, y0, c);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

inline void draw_disk(Image& img, int cx, int cy, int radius, Rgb c) {
    for (int y = -radius; y <= radius; ++y)
        for (int x = -radius; x <= radius; ++x)
            if (x * x + y * y <= radius * radius) img.set(cx + x, cy + y, c);
}

namespace image_detail {

inline void put_be32(std::string& s, std::uint32_t v) {
    s.push_back(static_cast<char>((v >> 24) & 0xff));
    s.push_back(static_cast<char>((v >> 16) & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
    s.push_back(static_cast<char>(v & 0xff));
}

inline void put_chunk(std::string& out, const char type[4], const std::string& data) {
    put_be32(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t crc_from = out.size();
    out.append(type, 4);
    out += data;
    const auto crc =
        static_cast<std::uint32_t>(crc32(0, reinterpret_cast<const Bytef*>(out.data() + crc_from),
                                         static_cast<uInt>(out.size() - crc_from)));
    put_be32(out, crc);
}

}  // namespace image_detail

inline std::string encode_png(const Image& img) {
    if (img.width <= 0 || img.height <= 0) throw std::invalid_argument("png: empty image");

    std::string raw;  // filter byte 0 + RGB per scanline
    raw.reserve(static_cast<std::size_t>(img.height) * (1 + 3 * img.width));
    for (int y = 0; y < img.height; ++y) {
        raw.push_back('\0');
        const std::size_t off = 3 * static_cast<std::size_t>(y) * img.width;
        raw.append(reinterpret_cast<const char*>(img.pixels.data() + off),
                   3 * static_cast<std::size_t>(img.width));
    }

    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::string deflated(bound, '\0');
    if (compress2(reinterpret_cast<Bytef*>(deflated.data()), &bound,
                  reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                  6) != Z_OK)
        throw std::runtime_error("png: deflate failed");
    deflated.resize(bound);

    std::string out("\x89PNG\r\n\x1a\n", 8);
    std::string ihdr;
    image_detail::put_be32(ihdr, static_cast<std::uint32_t>(img.width));
    image_detail::put_be32(ihdr, static_cast<std::uint32_t>(img.height));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(2);   // truecolor
    ihdr.push_back(0);   // deflate
    ihdr.push_back(0);   // filter method
    ihdr.push_back(0);   // no interlace
    image_detail::put_chunk(out, "IHDR", ihdr);
    image_detail::put_chunk(out, "IDAT", deflated);
    image_detail::put_chunk(out, "IEND", "");
    return out;
}

inline void write_png(const std::string& path, const Image& img) {
    const auto bytes = encode_png(img);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_png: cannot open " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out.good()) throw std::runtime_error("write_png: write failed for " + path);
}

inline void write_ppm(const std::string& path, const Image& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_ppm: cannot open " + path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out.good()) throw std::runtime_error("write_ppm: write failed for " + path);
}

}  // namespace chirppose
