#include "fusecat/image.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <jpeglib.h>
#include <png.h>

namespace fusecat {

namespace {

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    JpegErrorMgr* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    longjmp(err->jump, 1);
}

Raster load_jpeg_bytes(const std::vector<uint8_t>& bytes, const std::string& path) {
    jpeg_decompress_struct cinfo;
    JpegErrorMgr jerr;
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;

    Raster img;
    std::vector<uint8_t> rowbuf;
    if (setjmp(jerr.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw decode_error("jpeg decode failed for '" + path + "': " + jerr.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), bytes.size());
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    img.width = static_cast<int>(cinfo.output_width);
    img.height = static_cast<int>(cinfo.output_height);
    img.rgb.resize(static_cast<size_t>(img.width) * img.height * 3);
    rowbuf.resize(static_cast<size_t>(img.width) * cinfo.output_components);
    while (cinfo.output_scanline < cinfo.output_height) {
        const int y = static_cast<int>(cinfo.output_scanline);
        uint8_t* row = rowbuf.data();
        jpeg_read_scanlines(&cinfo, &row, 1);
        std::memcpy(img.pixel(0, y), rowbuf.data(), static_cast<size_t>(img.width) * 3);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return img;
}

struct PngReadCtx {
    const uint8_t* data;
    size_t size;
    size_t pos;
};

void png_mem_read(png_structp png, png_bytep out, png_size_t n) {
    PngReadCtx* ctx = static_cast<PngReadCtx*>(png_get_io_ptr(png));
    if (ctx->pos + n > ctx->size) {
        png_error(png, "read past end of buffer");
        return;
    }
    std::memcpy(out, ctx->data + ctx->pos, n);
    ctx->pos += n;
}

Raster load_png_bytes(const std::vector<uint8_t>& bytes, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png)
        throw decode_error("png decoder init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw decode_error("png decoder init failed");
    }

    Raster img;
    std::vector<png_bytep> rows;
    PngReadCtx ctx{bytes.data(), bytes.size(), 0};
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw decode_error("png decode failed for '" + path + "'");
    }
    png_set_read_fn(png, &ctx, png_mem_read);
    png_read_info(png, info);

    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    if (png_get_channels(png, info) != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw decode_error("png decode failed for '" + path + "': unexpected channel count");
    }
    img.rgb.resize(static_cast<size_t>(img.width) * img.height * 3);
    rows.resize(static_cast<size_t>(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<size_t>(y)] = img.pixel(0, y);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

} // namespace

Raster load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw decode_error("cannot open image '" + path + "'");
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' &&
        bytes[3] == 'G')
        return load_png_bytes(bytes, path);
    if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF)
        return load_jpeg_bytes(bytes, path);
    throw decode_error("'" + path + "' is neither PNG nor JPEG");
}

void write_png(const std::string& path, const Raster& img) {
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp)
        throw error("cannot open '" + path + "' for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    std::vector<png_bytep> rows(static_cast<size_t>(img.height));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw error("png encode failed for '" + path + "'");
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<size_t>(y)] = const_cast<png_bytep>(img.pixel(0, y));
    png_set_rows(png, info, rows.data());
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

void write_jpeg(const std::string& path, const Raster& img, int quality) {
    jpeg_compress_struct cinfo;
    JpegErrorMgr jerr;
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;

    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp)
        throw error("cannot open '" + path + "' for writing");
    if (setjmp(jerr.jump)) {
        jpeg_destroy_compress(&cinfo);
        std::fclose(fp);
        throw error("jpeg encode failed for '" + path + "': " + jerr.message);
    }
    jpeg_create_compress(&cinfo);
    jpeg_stdio_dest(&cinfo, fp);
    cinfo.image_width = static_cast<JDIMENSION>(img.width);
    cinfo.image_height = static_cast<JDIMENSION>(img.height);
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row =
            const_cast<JSAMPROW>(img.pixel(0, static_cast<int>(cinfo.next_scanline)));
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    std::fclose(fp);
}

namespace {

// Bilinear sample with pixel-center alignment: src = (dst + 0.5) * scale - 0.5.
void bilinear_resize(const Raster& src, int out_w, int out_h, int crop_x, int crop_y,
                     double scale_x, double scale_y, Tensor& out,
                     const std::array<float, 3>& means) {
    for (int oy = 0; oy < out_h; ++oy) {
        const double sy = (oy + crop_y + 0.5) * scale_y - 0.5;
        const int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, src.height - 1);
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double fy = std::clamp(sy - y0, 0.0, 1.0);
        for (int ox = 0; ox < out_w; ++ox) {
            const double sx = (ox + crop_x + 0.5) * scale_x - 0.5;
            const int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, src.width - 1);
            const int x1 = std::min(x0 + 1, src.width - 1);
            const double fx = std::clamp(sx - x0, 0.0, 1.0);
            for (int c = 0; c < 3; ++c) {
                const double v00 = src.pixel(x0, y0)[c];
                const double v01 = src.pixel(x1, y0)[c];
                const double v10 = src.pixel(x0, y1)[c];
                const double v11 = src.pixel(x1, y1)[c];
                const double top = v00 + (v01 - v00) * fx;
                const double bot = v10 + (v11 - v10) * fx;
                const double v = top + (bot - top) * fy;
                out.at(c, oy, ox) = static_cast<float>(v - means[static_cast<size_t>(c)]);
            }
        }
    }
}

} // namespace

Tensor preprocess(const Raster& image, const PreprocessSpec& spec) {
    if (image.width < 1 || image.height < 1)
        throw decode_error("preprocess: empty image");
    if (spec.target_scale < 1)
        throw geometry_error("preprocess: target scale must be >= 1");

    const int s = spec.target_scale;
    Tensor out(3, s, s);
    if (spec.resize == ResizeMode::warp) {
        bilinear_resize(image, s, s, 0, 0, static_cast<double>(image.width) / s,
                        static_cast<double>(image.height) / s, out, spec.channel_means);
    } else {
        // Resize so the shorter side equals s, then crop the center s x s.
        const double scale = static_cast<double>(std::min(image.width, image.height)) / s;
        const int rw = static_cast<int>(std::round(image.width / scale));
        const int rh = static_cast<int>(std::round(image.height / scale));
        const int cx = (rw - s) / 2;
        const int cy = (rh - s) / 2;
        bilinear_resize(image, s, s, cx, cy, static_cast<double>(image.width) / rw,
                        static_cast<double>(image.height) / rh, out, spec.channel_means);
    }
    return out;
}

} // namespace fusecat
