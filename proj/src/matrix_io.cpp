#include "stct/io.hpp"

#include "stct/errors.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace stct::io {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

bool is_csv(const fs::path& path) {
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".csv";
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, const char* data, std::size_t n) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path.string());
  out.write(data, static_cast<std::streamsize>(n));
  if (!out) throw UsageError("write failed for " + path.string());
}

double parse_double(std::string_view field, long long line_offset) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw FormatError("csv: cannot parse '" + std::string(field) + "' as a number", line_offset);
  }
  return v;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::vector<unsigned char> encode_matrix(const Matrix& m) {
  std::vector<unsigned char> out;
  out.reserve(kMatrixHeaderBytes + 8 * static_cast<std::size_t>(m.size()));
  for (char c : kMatrixMagic) out.push_back(static_cast<unsigned char>(c));
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  put_u64(out, static_cast<std::uint64_t>(m.cols()));
  for (Index i = 0; i < m.size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(m.data()[i]));
  return out;
}

Matrix decode_matrix(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMatrixMagic, 8) != 0) {
    throw FormatError("matrix: bad magic (expected STCTMAT1)", 0);
  }
  if (bytes.size() < kMatrixHeaderBytes) {
    throw FormatError("matrix: truncated header", static_cast<long long>(bytes.size()));
  }
  const std::uint64_t rows = get_u64(bytes.data() + 8);
  const std::uint64_t cols = get_u64(bytes.data() + 16);
  const std::uint64_t payload = bytes.size() - kMatrixHeaderBytes;
  if (cols != 0 && rows > payload / 8 / cols) {
    throw FormatError("matrix: truncated payload for " + std::to_string(rows) + "x" + std::to_string(cols),
                      static_cast<long long>(bytes.size()));
  }
  if (rows * cols * 8 != payload) {
    throw FormatError("matrix: " + std::to_string(payload - rows * cols * 8) + " trailing bytes",
                      static_cast<long long>(kMatrixHeaderBytes + rows * cols * 8));
  }
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::uint64_t i = 0; i < rows * cols; ++i) {
    const std::size_t off = kMatrixHeaderBytes + 8 * i;
    const double v = std::bit_cast<double>(get_u64(bytes.data() + off));
    if (!std::isfinite(v)) throw FormatError("matrix: non-finite value", static_cast<long long>(off));
    m.data()[i] = v;
  }
  return m;
}

std::string encode_matrix_csv(const Matrix& m) {
  std::ostringstream os;
  os.precision(17);
  os << "rows,cols\n" << m.rows() << ',' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << m(i, j);
    }
    os << '\n';
  }
  return os.str();
}

Matrix decode_matrix_csv(const std::string& text) {
  std::vector<std::pair<std::string_view, long long>> lines;
  std::string_view rest(text);
  long long offset = 0;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.emplace_back(line, offset);
    if (nl == std::string_view::npos) break;
    rest.remove_prefix(nl + 1);
    offset += static_cast<long long>(nl + 1);
  }
  if (lines.empty() || lines[0].first != "rows,cols") throw FormatError("csv: missing 'rows,cols' header", 0);
  if (lines.size() < 2) throw FormatError("csv: missing size line", static_cast<long long>(text.size()));
  const auto dims = split_commas(lines[1].first);
  if (dims.size() != 2) throw FormatError("csv: size line must hold two values", lines[1].second);
  const double r = parse_double(dims[0], lines[1].second);
  const double c = parse_double(dims[1], lines[1].second);
  if (r < 0 || c < 0 || r != std::floor(r) || c != std::floor(c)) {
    throw FormatError("csv: sizes must be non-negative integers", lines[1].second);
  }
  const auto rows = static_cast<Index>(r);
  const auto cols = static_cast<Index>(c);
  if (static_cast<Index>(lines.size()) - 2 != rows) {
    throw FormatError("csv: expected " + std::to_string(rows) + " data rows, found " +
                          std::to_string(lines.size() - 2),
                      lines.size() > 2 ? lines.back().second : static_cast<long long>(text.size()));
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& [line, off] = lines[static_cast<std::size_t>(i) + 2];
    const auto fields = split_commas(line);
    if (static_cast<Index>(fields.size()) != cols) {
      throw FormatError("csv: row " + std::to_string(i) + " has " + std::to_string(fields.size()) + " values", off);
    }
    for (Index j = 0; j < cols; ++j) {
      const double v = parse_double(fields[static_cast<std::size_t>(j)], off);
      if (!std::isfinite(v)) throw FormatError("csv: non-finite value", off);
      m(i, j) = v;
    }
  }
  return m;
}

void save_matrix(const fs::path& path, const Matrix& m) {
  if (is_csv(path)) {
    const std::string text = encode_matrix_csv(m);
    write_bytes(path, text.data(), text.size());
  } else {
    const auto bytes = encode_matrix(m);
    write_bytes(path, reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }
}

Matrix load_matrix(const fs::path& path) {
  const auto bytes = read_bytes(path);
  try {
    if (is_csv(path)) return decode_matrix_csv(std::string(bytes.begin(), bytes.end()));
    return decode_matrix(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what() + " (byte offset " + std::to_string(e.offset()) + ")",
                      e.offset());
  }
}

Matrix labels_to_matrix(const HardLabelVector& labels) {
  Matrix m(static_cast<Index>(labels.size()), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) m(static_cast<Index>(i), 0) = labels[i];
  return m;
}

HardLabelVector matrix_to_labels(const Matrix& m) {
  if (m.cols() != 1) throw FormatError("labels: expected a single column", 16);
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) {
    const double v = m(i, 0);
    if (v < 0 || v != std::floor(v) || v > 1e9) {
      throw FormatError("labels: row " + std::to_string(i) + " is not a class index",
                        static_cast<long long>(kMatrixHeaderBytes + 8 * static_cast<std::size_t>(i)));
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(v);
  }
  return HardLabelVector(std::move(out));
}

void save_labels(const fs::path& path, const HardLabelVector& labels) { save_matrix(path, labels_to_matrix(labels)); }

HardLabelVector load_labels(const fs::path& path) { return matrix_to_labels(load_matrix(path)); }

void save_mask(const fs::path& path, const std::vector<bool>& mask) {
  Matrix m(static_cast<Index>(mask.size()), 1);
  for (std::size_t i = 0; i < mask.size(); ++i) m(static_cast<Index>(i), 0) = mask[i] ? 1.0 : 0.0;
  save_matrix(path, m);
}

std::vector<bool> load_mask(const fs::path& path) {
  const Matrix m = load_matrix(path);
  if (m.cols() != 1) throw FormatError("mask: expected a single column", 16);
  std::vector<bool> out(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, 0) != 0.0;
  return out;
}

void save_dataset(const fs::path& dir, const Dataset& data) {
  data.validate();
  fs::create_directories(dir);
  save_matrix(dir / kFeaturesFile, data.features.data());
  const HardLabelVector observed = harden(data.labels);
  if (data.clean_labels) {
    save_labels(dir / kCleanLabelsFile, *data.clean_labels);
    if (!(observed == *data.clean_labels)) save_labels(dir / kNoisyLabelsFile, observed);
  } else {
    save_labels(dir / kCleanLabelsFile, observed);
  }
  if (data.corruption_mask) save_mask(dir / kNoiseMaskFile, *data.corruption_mask);
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("dataset directory not found: " + dir.string());
  if (!fs::exists(dir / kFeaturesFile)) throw UsageError("missing " + (dir / kFeaturesFile).string());
  Dataset d;
  d.features = FeatureMatrix(load_matrix(dir / kFeaturesFile));
  std::optional<HardLabelVector> clean;
  if (fs::exists(dir / kCleanLabelsFile)) clean = load_labels(dir / kCleanLabelsFile);
  HardLabelVector observed;
  if (fs::exists(dir / kNoisyLabelsFile)) {
    observed = load_labels(dir / kNoisyLabelsFile);
  } else if (clean) {
    observed = *clean;
  } else {
    throw UsageError("dataset " + dir.string() + " has no label file");
  }
  int classes = observed.inferred_classes();
  if (clean) classes = std::max(classes, clean->inferred_classes());
  d.labels = one_hot(observed, classes);
  d.clean_labels = std::move(clean);
  if (fs::exists(dir / kNoiseMaskFile)) d.corruption_mask = load_mask(dir / kNoiseMaskFile);
  d.validate();
  return d;
}

void write_text(const fs::path& path, const std::string& text) { write_bytes(path, text.data(), text.size()); }

std::string read_text(const fs::path& path) {
  const auto bytes = read_bytes(path);
  return {bytes.begin(), bytes.end()};
}

}  // namespace stct::io
