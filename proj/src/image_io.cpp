// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#include "flowsiren/image_io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>

#include <png.h>

#include "flowsiren/common.hpp"

namespace fsiren {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const
    {
        if (f)
            std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool has_suffix(const std::string& s, const std::string& suffix)
{
    if (s.size() < suffix.size())
        return false;
    std::string tail = s.substr(s.size() - suffix.size());
    for (auto& ch : tail)
        ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return tail == suffix;
}

Image8 read_png_file(const std::string& path)
{
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    FSN_CHECK_IO(fp, "cannot open image: ", path);

    png_byte header[8] = {};
    FSN_CHECK_IO(std::fread(header, 1, 8, fp.get()) == 8 &&
                     png_sig_cmp(header, 0, 8) == 0,
                 "not a PNG file: ", path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                             nullptr);
    FSN_CHECK_IO(png, "libpng allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail<IoError>("libpng allocation failure");
    }

    Image8 img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail<IoError>("failed to decode PNG: ", path);
    }

    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    const png_byte color_type = png_get_color_type(png, info);
    const png_byte bit_depth = png_get_bit_depth(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(png);
    if (bit_depth == 16)
        png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    FSN_CHECK_IO(png_get_rowbytes(png, info) ==
                     static_cast<std::size_t>(img.width) * 3,
                 "unsupported PNG layout in ", path);

    img.rgb.resize(3 * static_cast<std::size_t>(img.width) * img.height);
    rows.resize(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<std::size_t>(y)] =
            img.rgb.data() + 3 * static_cast<std::size_t>(y) * img.width;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_png_file(const Image8& img, const std::string& path)
{
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    FSN_CHECK_IO(fp, "cannot open image for writing: ", path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                              nullptr);
    FSN_CHECK_IO(png, "libpng allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail<IoError>("libpng allocation failure");
    }
    std::vector<png_const_bytep> rows(static_cast<std::size_t>(img.height));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail<IoError>("failed to encode PNG: ", path);
    }

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<std::size_t>(y)] =
            img.rgb.data() + 3 * static_cast<std::size_t>(y) * img.width;
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

int read_ppm_token(std::istream& is, const std::string& path)
{
    // Skips whitespace and '#' comments between header fields.
    while (true) {
        const int c = is.peek();
        FSN_CHECK_IO(c != EOF, "truncated PPM header: ", path);
        if (std::isspace(c)) {
            is.get();
        } else if (c == '#') {
            std::string line;
            std::getline(is, line);
        } else {
            break;
        }
    }
    int value = 0;
    is >> value;
    FSN_CHECK_IO(is.good(), "malformed PPM header: ", path);
    return value;
}

Image8 read_ppm_file(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    FSN_CHECK_IO(is.good(), "cannot open image: ", path);
    char p = 0, six = 0;
    is.get(p);
    is.get(six);
    FSN_CHECK_IO(p == 'P' && six == '6', "not a binary PPM (P6) file: ", path);

    Image8 img;
    img.width = read_ppm_token(is, path);
    img.height = read_ppm_token(is, path);
    const int maxval = read_ppm_token(is, path);
    FSN_CHECK_IO(img.width > 0 && img.height > 0, "non-positive PPM dimensions in ",
                 path);
    FSN_CHECK_IO(maxval == 255, "unsupported PPM maxval ", maxval, " in ", path);
    is.get(); // single whitespace after maxval

    img.rgb.resize(3 * static_cast<std::size_t>(img.width) * img.height);
    is.read(reinterpret_cast<char*>(img.rgb.data()),
            static_cast<std::streamsize>(img.rgb.size()));
    FSN_CHECK_IO(is.gcount() == static_cast<std::streamsize>(img.rgb.size()),
                 "truncated PPM payload: ", path);
    return img;
}

void write_ppm_file(const Image8& img, const std::string& path)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    FSN_CHECK_IO(os.good(), "cannot open image for writing: ", path);
    os << "P6\n" << img.width << " " << img.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.rgb.data()),
             static_cast<std::streamsize>(img.rgb.size()));
    os.flush();
    FSN_CHECK_IO(os.good(), "failed writing PPM: ", path);
}

} // namespace

Image8 read_image(const std::string& path)
{
    if (has_suffix(path, ".png"))
        return read_png_file(path);
    if (has_suffix(path, ".ppm"))
        return read_ppm_file(path);
    fail<IoError>("unsupported image extension (expected .png or .ppm): ", path);
}

void write_image(const Image8& img, const std::string& path)
{
    FSN_CHECK(img.width > 0 && img.height > 0 &&
                  img.rgb.size() == 3 * static_cast<std::size_t>(img.width) * img.height,
              "write_image: inconsistent image buffer");
    if (has_suffix(path, ".png"))
        return write_png_file(img, path);
    if (has_suffix(path, ".ppm"))
        return write_ppm_file(img, path);
    fail<IoError>("unsupported image extension (expected .png or .ppm): ", path);
}

} // namespace fsiren
