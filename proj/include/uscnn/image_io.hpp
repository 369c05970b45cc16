#pragma once

// 8-bit grayscale raster I/O (binary/ASCII PGM and PNG).

#include "uscnn/clustering.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace uscnn {

class ImageIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FileNotFoundError : public ImageIoError {
public:
    using ImageIoError::ImageIoError;
};

class UnsupportedFormatError : public ImageIoError {
public:
    using ImageIoError::ImageIoError;
};

class CorruptFileError : public ImageIoError {
public:
    using ImageIoError::ImageIoError;
};

class WriteError : public ImageIoError {
public:
    using ImageIoError::ImageIoError;
};

enum class ImageFormat { pgm, png };

/// Format implied by a path's extension (.pgm / .png, case-insensitive).
ImageFormat format_from_extension(const std::filesystem::path& path);

/// Decodes an 8-bit grayscale image into values in [0, 255]. The format is
/// detected from the file signature. RGB(A) PNGs are converted with
/// 0.299R + 0.587G + 0.114B and a note is appended to `warnings`.
Image load_gray(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

/// Pixels strictly above 127 are changed.
ChangeMap load_truth(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

/// Writes raw 8-bit pixels.
void save_gray8(const Matrix2<std::uint8_t>& pixels, const std::filesystem::path& path, ImageFormat format);

/// unchanged -> 0, changed -> 255.
void save_map(const ChangeMap& map, const std::filesystem::path& path);
void save_map(const ChangeMap& map, const std::filesystem::path& path, ImageFormat format);

/// Min-max scaled to [0, 255] and rounded half-up; a constant map is all 0.
void save_map(const DifferenceMap& map, const std::filesystem::path& path);
void save_map(const DifferenceMap& map, const std::filesystem::path& path, ImageFormat format);

Matrix2<std::uint8_t> to_gray8(const DifferenceMap& map);

}  // namespace uscnn
