#pragma once
/// Grayscale image I/O.  PGM is always available (P2 ASCII and P5 binary,
/// 8- and 16-bit; 16-bit rasters are big-endian per the netpbm format);
/// grayscale PNG read/write is compiled in when DPIR_WITH_PNG is defined.
///
/// Fields hold intensities in [0,1]; quantization to the stored bit depth
/// happens only at write time (q = round(clamp(v)*maxval)) and reading maps
/// back to q/maxval.  Re-encoding a decoded file therefore reproduces it
/// byte for byte at the same depth.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpir/field.hpp"

#ifdef DPIR_WITH_PNG
#include <png.h>
#endif

namespace dpir {

/// Quantize an intensity to an integer level in [0, maxval].
inline int quantize_level(double v, int maxval) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<int>(std::lround(c * maxval));
}

namespace detail {

constexpr std::size_t kMaxImagePixels = std::size_t(1) << 26;  // refuse absurd headers

inline double default_image_spacing(int w, int h, double spacing) {
    if (spacing == 0.0) return 1.0 / std::max(w, h);
    if (!(spacing > 0.0)) throw std::invalid_argument("image io: spacing must be positive");
    return spacing;
}

// Next non-negative integer token in a PNM header; skips whitespace and
// '#'-to-end-of-line comments.
inline long pnm_token(std::istream& in, const std::string& path) {
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    if (c == EOF || !std::isdigit(c))
        throw std::runtime_error("read_pgm: malformed header in '" + path + "'");
    long value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        if (value > 1000000000L)
            throw std::runtime_error("read_pgm: header number out of range in '" + path + "'");
        c = in.get();
    }
    if (c != EOF) in.unget();
    return value;
}

inline void check_pgm_dims(long w, long h, long maxval, const std::string& path) {
    if (w < 1 || h < 1)
        throw std::runtime_error("read_pgm: non-positive dimensions in '" + path + "'");
    if (static_cast<std::size_t>(w) * static_cast<std::size_t>(h) > kMaxImagePixels)
        throw std::runtime_error("read_pgm: image too large in '" + path + "'");
    if (maxval < 1 || maxval > 65535)
        throw std::runtime_error("read_pgm: maxval out of range in '" + path + "'");
}

}  // namespace detail

/// Read an 8- or 16-bit PGM (P2 or P5).  Color netpbm files are rejected.
/// With spacing 0 the pixel spacing defaults to 1/max(width, height).
inline ScalarField read_pgm(const std::string& path, double spacing = 0.0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_pgm: cannot open '" + path + "'");
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || (m1 != '2' && m1 != '5')) {
        if (m0 == 'P' && (m1 == '3' || m1 == '6'))
            throw std::runtime_error("read_pgm: '" + path + "' is a color PPM; only grayscale is supported");
        throw std::runtime_error("read_pgm: '" + path + "' is not a PGM file");
    }
    const bool binary = (m1 == '5');
    const long w = detail::pnm_token(in, path);
    const long h = detail::pnm_token(in, path);
    const long maxval = detail::pnm_token(in, path);
    detail::check_pgm_dims(w, h, maxval, path);

    ScalarField u(static_cast<int>(w), static_cast<int>(h),
                  detail::default_image_spacing(static_cast<int>(w), static_cast<int>(h), spacing));
    const std::size_t count = u.pixels();
    if (binary) {
        int sep = in.get();  // single whitespace byte after maxval
        if (sep == EOF || !std::isspace(sep))
            throw std::runtime_error("read_pgm: malformed raster separator in '" + path + "'");
        const int bytes = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> raw(count * bytes);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<std::size_t>(in.gcount()) != raw.size())
            throw std::runtime_error("read_pgm: truncated raster in '" + path + "'");
        for (std::size_t i = 0; i < count; ++i) {
            const long q = bytes == 2 ? (long(raw[2 * i]) << 8) | long(raw[2 * i + 1]) : long(raw[i]);
            if (q > maxval)
                throw std::runtime_error("read_pgm: sample above maxval in '" + path + "'");
            u.v[i] = static_cast<double>(q) / static_cast<double>(maxval);
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const long q = detail::pnm_token(in, path);
            if (q > maxval)
                throw std::runtime_error("read_pgm: sample above maxval in '" + path + "'");
            u.v[i] = static_cast<double>(q) / static_cast<double>(maxval);
        }
    }
    return u;
}

/// Write a PGM; maxval 255 or 65535 selects the bit depth, binary selects
/// P5 versus P2.  16-bit binary samples are written big-endian.
inline void write_pgm(const std::string& path, const ScalarField& u, int maxval = 255,
                      bool binary = true) {
    if (maxval != 255 && maxval != 65535)
        throw std::invalid_argument("write_pgm: maxval must be 255 or 65535");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_pgm: cannot open '" + path + "' for writing");
    out << (binary ? "P5" : "P2") << "\n" << u.width << " " << u.height << "\n" << maxval << "\n";
    if (binary) {
        std::vector<unsigned char> raw;
        raw.reserve(u.pixels() * (maxval > 255 ? 2 : 1));
        for (double v : u.v) {
            const int q = quantize_level(v, maxval);
            if (maxval > 255) raw.push_back(static_cast<unsigned char>((q >> 8) & 0xff));
            raw.push_back(static_cast<unsigned char>(q & 0xff));
        }
        out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    } else {
        for (int y = 0; y < u.height; ++y) {
            for (int x = 0; x < u.width; ++x) {
                if (x) out << ' ';
                out << quantize_level(u.at(x, y), maxval);
            }
            out << '\n';
        }
    }
    if (!out) throw std::runtime_error("write_pgm: failed writing '" + path + "'");
}

#ifdef DPIR_WITH_PNG

namespace detail {

struct PngReadGuard {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngReadGuard() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

struct PngWriteGuard {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngWriteGuard() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

}  // namespace detail

/// Read a grayscale PNG (bit depth up to 16; sub-byte depths are expanded to
/// 8).  Color, palette, and alpha images are rejected.
inline ScalarField read_png(const std::string& path, double spacing = 0.0) {
    detail::PngReadGuard g;
    g.fp = std::fopen(path.c_str(), "rb");
    if (!g.fp) throw std::runtime_error("read_png: cannot open '" + path + "'");
    unsigned char sig[8] = {0};
    if (std::fread(sig, 1, 8, g.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw std::runtime_error("read_png: '" + path + "' is not a PNG file");
    g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!g.png) throw std::runtime_error("read_png: libpng init failed");
    g.info = png_create_info_struct(g.png);
    if (!g.info) throw std::runtime_error("read_png: libpng init failed");

    // Locals that must survive the longjmp error path live before setjmp.
    std::vector<unsigned char> raster;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(g.png)))
        throw std::runtime_error("read_png: failed decoding '" + path + "'");

    png_init_io(g.png, g.fp);
    png_set_sig_bytes(g.png, 8);
    png_read_info(g.png, g.info);

    const png_uint_32 w = png_get_image_width(g.png, g.info);
    const png_uint_32 h = png_get_image_height(g.png, g.info);
    const int color = png_get_color_type(g.png, g.info);
    int depth = png_get_bit_depth(g.png, g.info);
    if (color != PNG_COLOR_TYPE_GRAY)
        throw std::runtime_error("read_png: '" + path + "' is not grayscale; only grayscale is supported");
    if (w < 1 || h < 1 || static_cast<std::size_t>(w) * h > detail::kMaxImagePixels)
        throw std::runtime_error("read_png: bad dimensions in '" + path + "'");
    if (depth < 8) {
        png_set_expand_gray_1_2_4_to_8(g.png);
        depth = 8;
    }
    png_read_update_info(g.png, g.info);

    const std::size_t rowbytes = png_get_rowbytes(g.png, g.info);
    raster.assign(rowbytes * h, 0);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = raster.data() + y * rowbytes;
    png_read_image(g.png, rows.data());  // handles interlacing internally
    png_read_end(g.png, nullptr);

    const int maxval = depth == 16 ? 65535 : 255;
    ScalarField u(static_cast<int>(w), static_cast<int>(h),
                  detail::default_image_spacing(static_cast<int>(w), static_cast<int>(h), spacing));
    for (png_uint_32 y = 0; y < h; ++y) {
        const unsigned char* r = rows[y];
        for (png_uint_32 x = 0; x < w; ++x) {
            const long q = depth == 16 ? (long(r[2 * x]) << 8) | long(r[2 * x + 1]) : long(r[x]);
            u.v[static_cast<std::size_t>(y) * w + x] = static_cast<double>(q) / maxval;
        }
    }
    return u;
}

/// Write a grayscale PNG at bit depth 8 or 16.
inline void write_png(const std::string& path, const ScalarField& u, int bit_depth = 8) {
    if (bit_depth != 8 && bit_depth != 16)
        throw std::invalid_argument("write_png: bit depth must be 8 or 16");
    detail::PngWriteGuard g;
    g.fp = std::fopen(path.c_str(), "wb");
    if (!g.fp) throw std::runtime_error("write_png: cannot open '" + path + "' for writing");
    g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!g.png) throw std::runtime_error("write_png: libpng init failed");
    g.info = png_create_info_struct(g.png);
    if (!g.info) throw std::runtime_error("write_png: libpng init failed");

    const int maxval = bit_depth == 16 ? 65535 : 255;
    const std::size_t rowbytes = static_cast<std::size_t>(u.width) * (bit_depth / 8);
    std::vector<unsigned char> raster(rowbytes * u.height);
    std::vector<png_bytep> rows(u.height);
    for (int y = 0; y < u.height; ++y) {
        unsigned char* r = raster.data() + static_cast<std::size_t>(y) * rowbytes;
        rows[y] = r;
        for (int x = 0; x < u.width; ++x) {
            const int q = quantize_level(u.at(x, y), maxval);
            if (bit_depth == 16) {
                r[2 * x] = static_cast<unsigned char>((q >> 8) & 0xff);
                r[2 * x + 1] = static_cast<unsigned char>(q & 0xff);
            } else {
                r[x] = static_cast<unsigned char>(q);
            }
        }
    }
    if (setjmp(png_jmpbuf(g.png)))
        throw std::runtime_error("write_png: failed encoding '" + path + "'");
    png_init_io(g.png, g.fp);
    png_set_IHDR(g.png, g.info, static_cast<png_uint_32>(u.width),
                 static_cast<png_uint_32>(u.height), bit_depth, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(g.png, g.info);
    png_write_image(g.png, rows.data());
    png_write_end(g.png, nullptr);
}

#endif  // DPIR_WITH_PNG

namespace detail {
inline bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}
}  // namespace detail

/// Read a grayscale image, dispatching on the file extension (.png goes to
/// the PNG reader when compiled in, everything else to the PGM reader).
inline ScalarField read_image(const std::string& path, double spacing = 0.0) {
    if (detail::ends_with(path, ".png") || detail::ends_with(path, ".PNG")) {
#ifdef DPIR_WITH_PNG
        return read_png(path, spacing);
#else
        throw std::runtime_error("read_image: PNG support not compiled in; use PGM");
#endif
    }
    return read_pgm(path, spacing);
}

/// Write a grayscale image, dispatching on the file extension; depth is the
/// stored bit depth (8 or 16).
inline void write_image(const std::string& path, const ScalarField& u, int depth = 8) {
    if (depth != 8 && depth != 16) throw std::invalid_argument("write_image: depth must be 8 or 16");
    if (detail::ends_with(path, ".png") || detail::ends_with(path, ".PNG")) {
#ifdef DPIR_WITH_PNG
        write_png(path, u, depth);
        return;
#else
        throw std::runtime_error("write_image: PNG support not compiled in; use PGM");
#endif
    }
    write_pgm(path, u, depth == 16 ? 65535 : 255, /*binary=*/true);
}

}  // namespace dpir
