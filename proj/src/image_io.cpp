#include "uscnn/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace uscnn {

namespace fs = std::filesystem;

namespace {

std::vector<unsigned char> read_all(const fs::path& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw FileNotFoundError("no such file: " + path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFoundError("cannot open: " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---- PGM -----------------------------------------------------------------

class PgmReader {
public:
    PgmReader(const std::vector<unsigned char>& bytes, const fs::path& path)
        : bytes_(bytes), path_(path) {}

    Image decode() {
        const bool binary = bytes_[1] == '5';
        pos_ = 2;
        const long width = next_int();
        const long height = next_int();
        const long maxval = next_int();
        if (width <= 0 || height <= 0) corrupt("non-positive dimensions");
        if (maxval <= 0 || maxval > 255) throw UnsupportedFormatError(path_.string() + ": only 8-bit PGM is supported");

        Image out(height, width);
        if (binary) {
            // exactly one whitespace byte separates the header from the raster
            if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) corrupt("missing raster separator");
            ++pos_;
            const auto need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
            if (bytes_.size() - pos_ < need) corrupt("truncated raster");
            for (long i = 0; i < width * height; ++i) out.data()[i] = bytes_[pos_ + static_cast<std::size_t>(i)];
        } else {
            for (long i = 0; i < width * height; ++i) {
                const long v = next_int();
                if (v > maxval) corrupt("sample exceeds maxval");
                out.data()[i] = static_cast<double>(v);
            }
        }
        if (maxval != 255) out *= 255.0 / static_cast<double>(maxval);
        return out;
    }

private:
    [[noreturn]] void corrupt(const std::string& what) const {
        throw CorruptFileError(path_.string() + ": corrupt PGM (" + what + ")");
    }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    long next_int() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) corrupt("expected integer");
        long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > 1'000'000'000L) corrupt("integer out of range");
            ++pos_;
        }
        return v;
    }

    const std::vector<unsigned char>& bytes_;
    fs::path path_;
    std::size_t pos_ = 0;
};

void write_pgm(const Matrix2<std::uint8_t>& pixels, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw WriteError("cannot open for writing: " + path.string());
    out << "P5\n" << pixels.cols() << ' ' << pixels.rows() << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    out.flush();
    if (!out) throw WriteError("write failed: " + path.string());
}

// ---- PNG -----------------------------------------------------------------

struct PngMemorySource {
    const std::vector<unsigned char>* bytes;
    std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t n) {
    auto* src = static_cast<PngMemorySource*>(png_get_io_ptr(png));
    if (src->bytes->size() - src->pos < n) png_error(png, "unexpected end of file");
    std::copy_n(src->bytes->data() + src->pos, n, out);
    src->pos += n;
}

void png_warning_sink(png_structp, png_const_charp) {}

[[noreturn]] void png_error_longjmp(png_structp png, png_const_charp msg) {
    auto* message = static_cast<std::string*>(png_get_error_ptr(png));
    if (message) *message = msg;
    png_longjmp(png, 1);
}

Image decode_png(const std::vector<unsigned char>& bytes, const fs::path& path, std::vector<std::string>* warnings) {
    std::string message;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_longjmp, png_warning_sink);
    if (!png) throw ImageIoError("libpng initialization failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw ImageIoError("libpng initialization failed");
    }
    PngMemorySource src{&bytes, 0};

    // Everything touched after setjmp must not need destructors.
    std::vector<unsigned char> raster;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0, height = 0;
    int channels = 0;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw CorruptFileError(path.string() + ": corrupt PNG (" + message + ")");
    }
    png_set_read_fn(png, &src, png_read_from_memory);
    png_read_info(png, info);
    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    channels = png_get_channels(png, info);
    const png_size_t rowbytes = png_get_rowbytes(png, info);
    raster.resize(rowbytes * height);
    rows.resize(height);
    for (png_uint_32 r = 0; r < height; ++r) rows[r] = raster.data() + r * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    if (channels != 1 && channels != 3) throw UnsupportedFormatError(path.string() + ": unsupported PNG channel layout");
    if (channels == 3 && warnings)
        warnings->push_back(path.string() + ": color PNG converted to grayscale (0.299R + 0.587G + 0.114B)");

    Image out(static_cast<Eigen::Index>(height), static_cast<Eigen::Index>(width));
    const std::size_t rowbytes_sz = rowbytes;
    for (png_uint_32 r = 0; r < height; ++r) {
        const unsigned char* row = raster.data() + r * rowbytes_sz;
        for (png_uint_32 c = 0; c < width; ++c) {
            if (channels == 1) {
                out(r, c) = row[c];
            } else {
                const unsigned char* px = row + 3 * c;
                out(r, c) = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
            }
        }
    }
    return out;
}

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};

void write_png(const Matrix2<std::uint8_t>& pixels, const fs::path& path) {
    std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "wb"));
    if (!file) throw WriteError("cannot open for writing: " + path.string());

    std::string message;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_longjmp, png_warning_sink);
    if (!png) throw WriteError("libpng initialization failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw WriteError("libpng initialization failed");
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(pixels.rows()));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw WriteError(path.string() + ": PNG encode failed (" + message + ")");
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(pixels.cols()), static_cast<png_uint_32>(pixels.rows()), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (Eigen::Index r = 0; r < pixels.rows(); ++r)
        rows[static_cast<std::size_t>(r)] = const_cast<png_bytep>(pixels.data() + r * pixels.cols());
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(file.get()) != 0) throw WriteError("write failed: " + path.string());
}

constexpr std::array<unsigned char, 8> kPngSignature{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

}  // namespace

ImageFormat format_from_extension(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm") return ImageFormat::pgm;
    if (ext == ".png") return ImageFormat::png;
    throw UnsupportedFormatError("unsupported output extension '" + ext + "' (use .pgm or .png)");
}

Image load_gray(const fs::path& path, std::vector<std::string>* warnings) {
    const std::vector<unsigned char> bytes = read_all(path);
    if (bytes.size() >= kPngSignature.size() && std::equal(kPngSignature.begin(), kPngSignature.end(), bytes.begin()))
        return decode_png(bytes, path, warnings);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '2'))
        return PgmReader(bytes, path).decode();
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '1' && bytes[1] <= '7')
        throw UnsupportedFormatError(path.string() + ": only grayscale PGM (P2/P5) is supported");
    if (bytes.size() < 8) throw CorruptFileError(path.string() + ": file too short to be an image");
    throw UnsupportedFormatError(path.string() + ": unrecognized image format");
}

ChangeMap load_truth(const fs::path& path, std::vector<std::string>* warnings) {
    const Image gray = load_gray(path, warnings);
    ChangeMap out(gray.rows(), gray.cols());
    out.labels = (gray.array() > 127.0).cast<std::uint8_t>().matrix();
    return out;
}

void save_gray8(const Matrix2<std::uint8_t>& pixels, const fs::path& path, ImageFormat format) {
    if (format == ImageFormat::png)
        write_png(pixels, path);
    else
        write_pgm(pixels, path);
}

void save_map(const ChangeMap& map, const fs::path& path) { save_map(map, path, format_from_extension(path)); }

void save_map(const ChangeMap& map, const fs::path& path, ImageFormat format) {
    const Matrix2<std::uint8_t> pixels = map.labels.unaryExpr([](std::uint8_t l) { return std::uint8_t(l ? 255 : 0); });
    save_gray8(pixels, path, format);
}

Matrix2<std::uint8_t> to_gray8(const DifferenceMap& map) {
    const double lo = map.values.minCoeff();
    const double hi = map.values.maxCoeff();
    if (!(hi > lo)) return Matrix2<std::uint8_t>::Zero(map.rows(), map.cols());
    return map.values.unaryExpr([lo, hi](double v) {
        return static_cast<std::uint8_t>(std::floor((v - lo) / (hi - lo) * 255.0 + 0.5));
    });
}

void save_map(const DifferenceMap& map, const fs::path& path) { save_map(map, path, format_from_extension(path)); }

void save_map(const DifferenceMap& map, const fs::path& path, ImageFormat format) {
    save_gray8(to_gray8(map), path, format);
}

}  // namespace uscnn
