#pragma once

// Image files (binary PGM and a lossless raw format), key=value config
// files, and CSV reports.

#include <cstddef>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitgibbs/admm.hpp"
#include "splitgibbs/experiments.hpp"
#include "splitgibbs/image_field.hpp"
#include "splitgibbs/samplers.hpp"

namespace splitgibbs {

/// Malformed or unsupported file contents.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File system failure; the message carries the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 8-byte magic of the raw format, followed by rows and cols as little-endian
/// uint64 and rows*cols little-endian IEEE doubles.
inline constexpr char kRawMagic[8] = {'S', 'G', 'F', 'I', 'E', 'L', 'D', '1'};

ImageField read_pgm(const std::filesystem::path& path);
/// Values are clamped to [0, 255] and rounded half-to-even.
void write_pgm(const std::filesystem::path& path, const ImageField& field);
ImageField read_raw(const std::filesystem::path& path);
void write_raw(const std::filesystem::path& path, const ImageField& field);

/// Format chosen from the file magic (read) or the extension .pgm/.raw (write).
ImageField read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const ImageField& field);

/// Flat key=value text; '#' starts a comment, blank lines are skipped.
/// Duplicate keys and lines without '=' are FormatErrors.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

/// Shortest text that reads back to the same double ("1.0" for integral values).
std::string format_number(double v);

struct ReportOptions {
  std::size_t t_bi = 0;      // trace entries before this index are burn-in
  std::size_t acf_lags = 50;
  bool write_pgm = true;
};

/// metrics.csv, trace.csv, acf.csv, mmse_{x,z,u}.raw (+ .pgm), and
/// ci_low/ci_high when credibility bounds exist.
void write_report(const EstimateBundle& bundle, const ChainRecord& record,
                  const std::filesystem::path& dir, const ReportOptions& options);

/// iteration,primal,dual rows.
void write_residuals(const std::vector<AdmmResiduals>& residuals, const std::filesystem::path& path);

/// name,mean,std rows.
void write_aggregate(const std::vector<MetricSummary>& summary, const std::filesystem::path& path);

}  // namespace splitgibbs
