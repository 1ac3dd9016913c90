#pragma once

// Matrix persistence and dataset directories.
//
// Binary layout: "STCTMAT1", u64 LE rows, u64 LE cols, then rows·cols
// IEEE-754 f64 LE values in row-major order. A file ending in ".csv" is
// read and written as text instead: a "rows,cols" header line, a line with
// the two sizes, then one comma-separated line per row.

#include "stct/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace stct::io {

inline constexpr char kMatrixMagic[8] = {'S', 'T', 'C', 'T', 'M', 'A', 'T', '1'};
inline constexpr std::size_t kMatrixHeaderBytes = 24;

std::vector<unsigned char> encode_matrix(const Matrix& m);
/// Throws FormatError with the byte offset of the first bad field.
Matrix decode_matrix(const std::vector<unsigned char>& bytes);

std::string encode_matrix_csv(const Matrix& m);
/// Offsets in CSV errors are byte offsets of the offending line.
Matrix decode_matrix_csv(const std::string& text);

void save_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix(const std::filesystem::path& path);

/// Hard labels persist as an n×1 matrix of integral values.
Matrix labels_to_matrix(const HardLabelVector& labels);
HardLabelVector matrix_to_labels(const Matrix& m);
void save_labels(const std::filesystem::path& path, const HardLabelVector& labels);
HardLabelVector load_labels(const std::filesystem::path& path);

void save_mask(const std::filesystem::path& path, const std::vector<bool>& mask);
std::vector<bool> load_mask(const std::filesystem::path& path);

// Dataset directory file names.
inline constexpr const char* kFeaturesFile = "features.bin";
inline constexpr const char* kCleanLabelsFile = "labels.bin";
inline constexpr const char* kNoisyLabelsFile = "noisy_labels.bin";
inline constexpr const char* kNoiseMaskFile = "noise_mask.bin";
inline constexpr const char* kTestFeaturesFile = "test_features.bin";
inline constexpr const char* kTestLabelsFile = "test_labels.bin";

/// Writes features, clean labels and, when present, noisy labels and mask.
/// `labels` is taken as the clean labels when no clean copy is attached.
void save_dataset(const std::filesystem::path& dir, const Dataset& data);

/// Reads a dataset directory. Training labels are the noisy labels when a
/// noisy label file exists, otherwise the clean labels.
Dataset load_dataset(const std::filesystem::path& dir);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace stct::io
