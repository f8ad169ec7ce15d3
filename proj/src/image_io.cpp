#include "smsfp/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace smsfp {

namespace {

std::string temp_name(const std::string& path) { return path + ".tmp"; }

void rename_into_place(const std::string& tmp, const std::string& path) {
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw std::runtime_error("rename failed for " + path);
    }
}

void write_pfm_impl(const std::string& path, int channels, const RasterF* const* planes) {
    const int w = planes[0]->width(), h = planes[0]->height();
    const std::string tmp = temp_name(path);
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp);
    out << (channels == 1 ? "Pf" : "PF") << "\n" << w << " " << h << "\n" << "-1.0" << "\n";
    std::vector<float> row(static_cast<std::size_t>(w) * static_cast<std::size_t>(channels));
    for (int y = h - 1; y >= 0; --y) {  // PFM is bottom-up
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < channels; ++c)
                row[static_cast<std::size_t>(x) * channels + c] =
                    static_cast<float>(planes[c]->at(x, y));
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    out.close();
    if (!out) throw std::runtime_error("write failed for " + tmp);
    rename_into_place(tmp, path);
}

void read_pfm_impl(const std::string& path, int expect_channels, RasterF* planes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open " + path);
    std::string magic;
    int w = 0, h = 0;
    double scale = 0.0;
    in >> magic >> w >> h >> scale;
    in.get();  // single whitespace after the header
    const int channels = magic == "Pf" ? 1 : magic == "PF" ? 3 : 0;
    if (channels == 0) throw std::invalid_argument(path + ": not a PFM file");
    if (channels != expect_channels)
        throw std::invalid_argument(path + ": expected " + std::to_string(expect_channels) +
                                    "-channel PFM");
    if (w <= 0 || h <= 0) throw std::invalid_argument(path + ": bad PFM dimensions");
    if (scale > 0.0) throw std::invalid_argument(path + ": big-endian PFM not supported");
    for (int c = 0; c < channels; ++c) planes[c] = RasterF(w, h);
    std::vector<float> row(static_cast<std::size_t>(w) * static_cast<std::size_t>(channels));
    for (int y = h - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
        if (!in) throw std::invalid_argument(path + ": truncated PFM data");
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < channels; ++c)
                planes[c].at(x, y) = row[static_cast<std::size_t>(x) * channels + c];
    }
}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        if (fp) std::fclose(fp);
    }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, &info);
        if (fp) std::fclose(fp);
    }
};

void read_png_gray16_impl(const std::string& path, Raster<std::uint16_t>& out, int& bit_depth) {
    PngReader r;
    r.fp = std::fopen(path.c_str(), "rb");
    if (!r.fp) throw std::invalid_argument("cannot open " + path);
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    r.info = png_create_info_struct(r.png);
    if (!r.png || !r.info) throw std::runtime_error("libpng init failed");
    if (setjmp(png_jmpbuf(r.png))) throw std::invalid_argument(path + ": PNG decode error");
    png_init_io(r.png, r.fp);
    png_read_info(r.png, r.info);

    const png_uint_32 w = png_get_image_width(r.png, r.info);
    const png_uint_32 h = png_get_image_height(r.png, r.info);
    const int color = png_get_color_type(r.png, r.info);
    bit_depth = png_get_bit_depth(r.png, r.info);
    if (color != PNG_COLOR_TYPE_GRAY)
        throw std::invalid_argument(path + ": only grayscale PNG input is supported");
    if (bit_depth < 8) {
        png_set_expand_gray_1_2_4_to_8(r.png);
        bit_depth = 8;
    }
    if (bit_depth == 16) png_set_swap(r.png);  // stored big-endian
    png_read_update_info(r.png, r.info);

    out = Raster<std::uint16_t>(static_cast<int>(w), static_cast<int>(h));
    std::vector<png_bytep> rows(h);
    std::vector<std::uint8_t> buf8;
    if (bit_depth == 16) {
        for (png_uint_32 y = 0; y < h; ++y)
            rows[y] = reinterpret_cast<png_bytep>(out.data() + static_cast<std::size_t>(y) * w);
        png_read_image(r.png, rows.data());
    } else {
        buf8.resize(static_cast<std::size_t>(w) * h);
        for (png_uint_32 y = 0; y < h; ++y) rows[y] = buf8.data() + static_cast<std::size_t>(y) * w;
        png_read_image(r.png, rows.data());
        for (std::size_t i = 0; i < buf8.size(); ++i) out[i] = buf8[i];
    }
    png_read_end(r.png, nullptr);
}

void write_png_impl(const std::string& path, int w, int h, int bit_depth, int color_type,
                    const std::vector<png_bytep>& rows) {
    const std::string tmp = temp_name(path);
    PngWriter wr;
    wr.fp = std::fopen(tmp.c_str(), "wb");
    if (!wr.fp) throw std::runtime_error("cannot open " + tmp);
    wr.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    wr.info = png_create_info_struct(wr.png);
    if (!wr.png || !wr.info) throw std::runtime_error("libpng init failed");
    if (setjmp(png_jmpbuf(wr.png))) throw std::runtime_error(tmp + ": PNG encode error");
    png_init_io(wr.png, wr.fp);
    png_set_IHDR(wr.png, wr.info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h),
                 bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(wr.png, wr.info);
    if (bit_depth == 16) png_set_swap(wr.png);
    png_write_image(wr.png, const_cast<png_bytepp>(rows.data()));
    png_write_end(wr.png, nullptr);
    std::fclose(wr.fp);
    wr.fp = nullptr;
    rename_into_place(tmp, path);
}

}  // namespace

void write_pfm(const std::string& path, const RasterF& raster) {
    const RasterF* planes[1] = {&raster};
    write_pfm_impl(path, 1, planes);
}

void write_pfm_rgb(const std::string& path, const RasterF& r, const RasterF& g, const RasterF& b) {
    require_same_size(r, g, "write_pfm_rgb");
    require_same_size(r, b, "write_pfm_rgb");
    const RasterF* planes[3] = {&r, &g, &b};
    write_pfm_impl(path, 3, planes);
}

RasterF read_pfm(const std::string& path) {
    RasterF plane;
    read_pfm_impl(path, 1, &plane);
    return plane;
}

std::array<RasterF, 3> read_pfm_rgb(const std::string& path) {
    std::array<RasterF, 3> planes;
    read_pfm_impl(path, 3, planes.data());
    return planes;
}

RasterF read_png_gray(const std::string& path) {
    Raster<std::uint16_t> raw;
    int bit_depth = 0;
    read_png_gray16_impl(path, raw, bit_depth);
    const double denom = bit_depth == 16 ? 65535.0 : 255.0;
    RasterF out(raw.width(), raw.height());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / denom;
    return out;
}

MaskRaster read_png_mask(const std::string& path) {
    Raster<std::uint16_t> raw;
    int bit_depth = 0;
    read_png_gray16_impl(path, raw, bit_depth);
    MaskRaster out(raw.width(), raw.height());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] ? 1 : 0;
    return out;
}

void write_png_gray8(const std::string& path, const RasterF& raster) {
    const int w = raster.width(), h = raster.height();
    std::vector<std::uint8_t> buf(raster.size());
    for (std::size_t i = 0; i < raster.size(); ++i) {
        const double v = std::clamp(raster[i], 0.0, 1.0);
        buf[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = buf.data() + static_cast<std::size_t>(y) * w;
    write_png_impl(path, w, h, 8, PNG_COLOR_TYPE_GRAY, rows);
}

void write_png_gray16(const std::string& path, const Raster<std::uint16_t>& raster) {
    const int w = raster.width(), h = raster.height();
    std::vector<png_bytep> rows(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y)
        rows[static_cast<std::size_t>(y)] = reinterpret_cast<png_bytep>(
            const_cast<std::uint16_t*>(raster.data()) + static_cast<std::size_t>(y) * w);
    write_png_impl(path, w, h, 16, PNG_COLOR_TYPE_GRAY, rows);
}

void write_png_mask(const std::string& path, const MaskRaster& mask) {
    const int w = mask.width(), h = mask.height();
    std::vector<std::uint8_t> buf(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) buf[i] = mask[i] ? 255 : 0;
    std::vector<png_bytep> rows(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = buf.data() + static_cast<std::size_t>(y) * w;
    write_png_impl(path, w, h, 8, PNG_COLOR_TYPE_GRAY, rows);
}

void write_png_rgb8(const std::string& path, const Raster<std::uint8_t>& r,
                    const Raster<std::uint8_t>& g, const Raster<std::uint8_t>& b) {
    require_same_size(r, g, "write_png_rgb8");
    require_same_size(r, b, "write_png_rgb8");
    const int w = r.width(), h = r.height();
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(w) * h * 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t o = (static_cast<std::size_t>(y) * w + x) * 3;
            buf[o] = r.at(x, y);
            buf[o + 1] = g.at(x, y);
            buf[o + 2] = b.at(x, y);
        }
    std::vector<png_bytep> rows(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y)
        rows[static_cast<std::size_t>(y)] = buf.data() + static_cast<std::size_t>(y) * w * 3;
    write_png_impl(path, w, h, 8, PNG_COLOR_TYPE_RGB, rows);
}

void write_normal_png(const std::string& path, const NormalMap& normals, const MaskRaster& mask) {
    const int w = normals.width(), h = normals.height();
    Raster<std::uint8_t> r(w, h, 0), g(w, h, 0), b(w, h, 0);
    auto encode = [](double v) {
        return static_cast<std::uint8_t>(std::lround(std::clamp((v + 1.0) * 0.5, 0.0, 1.0) * 255.0));
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            r.at(x, y) = encode(normals.nx.at(x, y));
            g.at(x, y) = encode(normals.ny.at(x, y));
            b.at(x, y) = encode(normals.nz.at(x, y));
        }
    write_png_rgb8(path, r, g, b);
}

void write_normal_pfm(const std::string& path, const NormalMap& normals) {
    write_pfm_rgb(path, normals.nx, normals.ny, normals.nz);
}

NormalMap read_normal_pfm(const std::string& path) {
    auto planes = read_pfm_rgb(path);
    NormalMap n;
    n.nx = std::move(planes[0]);
    n.ny = std::move(planes[1]);
    n.nz = std::move(planes[2]);
    return n;
}

void write_error_map_png(const std::string& path, const RasterF& error_deg,
                         const MaskRaster& mask) {
    require_same_size(error_deg, mask, "write_error_map_png");
    const int w = error_deg.width(), h = error_deg.height();
    Raster<std::uint8_t> r(w, h, 0), g(w, h, 0), b(w, h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            const double t = std::clamp(error_deg.at(x, y) / 90.0, 0.0, 1.0);
            r.at(x, y) = static_cast<std::uint8_t>(std::lround(t * 255.0));
            g.at(x, y) = 0;
            b.at(x, y) = static_cast<std::uint8_t>(std::lround((1.0 - t) * 255.0));
        }
    write_png_rgb8(path, r, g, b);
}

void write_text_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = temp_name(path);
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + tmp);
        out << contents;
        if (!out) throw std::runtime_error("write failed for " + tmp);
    }
    rename_into_place(tmp, path);
}

}  // namespace smsfp
