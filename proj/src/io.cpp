#include "splitgibbs/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "splitgibbs/metrics.hpp"

namespace splitgibbs {

namespace fs = std::filesystem;

namespace {

std::vector<unsigned char> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

// ---------------------------------------------------------------------- PGM

ImageField read_pgm(const fs::path& path) {
  const auto bytes = slurp(path);
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&](const char* what) {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos]))
      throw FormatError(path.string() + ": malformed PGM header (" + what + ")");
    std::uint64_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > (1u << 30)) throw FormatError(path.string() + ": PGM " + what + " too large");
    }
    return static_cast<std::size_t>(v);
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    throw FormatError(path.string() + ": not a binary PGM (P5)");
  pos = 2;
  const std::size_t cols = read_uint("width");
  const std::size_t rows = read_uint("height");
  const std::size_t maxval = read_uint("maxval");
  if (rows == 0 || cols == 0) throw FormatError(path.string() + ": empty PGM");
  if (maxval != 255) throw FormatError(path.string() + ": only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos]))
    throw FormatError(path.string() + ": malformed PGM header");
  ++pos;
  if (bytes.size() - pos < rows * cols) throw FormatError(path.string() + ": truncated PGM data");
  ImageField img(rows, cols);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = bytes[pos + i];
  return img;
}

void write_pgm(const fs::path& path, const ImageField& field) {
  std::string buf = "P5\n" + std::to_string(field.cols()) + " " + std::to_string(field.rows()) +
                    "\n255\n";
  for (double v : field.values()) {
    const double clamped = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 255.0);
    buf.push_back(static_cast<char>(static_cast<unsigned char>(std::nearbyint(clamped))));
  }
  auto out = open_out(path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  finish(out, path);
}

// ---------------------------------------------------------------------- raw

ImageField read_raw(const fs::path& path) {
  const auto bytes = slurp(path);
  if (bytes.size() < 24 || std::memcmp(bytes.data(), kRawMagic, 8) != 0)
    throw FormatError(path.string() + ": not a raw field file");
  const std::uint64_t rows = get_u64(bytes.data() + 8), cols = get_u64(bytes.data() + 16);
  if (rows == 0 || cols == 0 || rows > (1u << 30) || cols > (1u << 30))
    throw FormatError(path.string() + ": invalid raw dimensions");
  if (bytes.size() != 24 + 8 * rows * cols)
    throw FormatError(path.string() + ": raw payload length does not match dimensions");
  ImageField img(rows, cols);
  for (std::size_t i = 0; i < img.size(); ++i)
    img[i] = std::bit_cast<double>(get_u64(bytes.data() + 24 + 8 * i));
  return img;
}

void write_raw(const fs::path& path, const ImageField& field) {
  std::string buf(kRawMagic, 8);
  buf.reserve(24 + 8 * field.size());
  put_u64(buf, field.rows());
  put_u64(buf, field.cols());
  for (double v : field.values()) put_u64(buf, std::bit_cast<std::uint64_t>(v));
  auto out = open_out(path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  finish(out, path);
}

ImageField read_image(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char head[8] = {};
  in.read(head, 8);
  if (in.gcount() >= 2 && head[0] == 'P' && head[1] == '5') return read_pgm(path);
  if (in.gcount() == 8 && std::memcmp(head, kRawMagic, 8) == 0) return read_raw(path);
  throw FormatError(path.string() + ": unrecognized image format");
}

void write_image(const fs::path& path, const ImageField& field) {
  const auto ext = path.extension().string();
  if (ext == ".pgm") return write_pgm(path, field);
  if (ext == ".raw") return write_raw(path, field);
  throw FormatError(path.string() + ": unknown image extension (use .pgm or .raw)");
}

// ------------------------------------------------------------------- config

std::map<std::string, std::string> read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw FormatError(where + ": expected key=value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw FormatError(where + ": empty key");
    if (!out.emplace(key, value).second) throw FormatError(where + ": duplicate key '" + key + "'");
  }
  return out;
}

// ------------------------------------------------------------------ reports

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  if (v == std::trunc(v) && std::fabs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
  }
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  finish(out, path);
}

void write_field(const fs::path& dir, const std::string& stem, const ImageField& f, bool pgm) {
  write_raw(dir / (stem + ".raw"), f);
  if (pgm) write_pgm(dir / (stem + ".pgm"), f);
}

}  // namespace

void write_report(const EstimateBundle& bundle, const ChainRecord& record, const fs::path& dir,
                  const ReportOptions& options) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::string metrics;
  for (const auto& [name, value] : bundle.metrics) metrics += name + "," + format_number(value) + "\n";
  write_text(dir / "metrics.csv", metrics);

  std::string trace;
  for (std::size_t i = 0; i < record.scalar_trace.size(); ++i)
    trace += std::to_string(i + 1) + "," + format_number(record.scalar_trace[i]) + "\n";
  write_text(dir / "trace.csv", trace);

  if (record.scalar_trace.size() > options.t_bi) {
    const std::span<const double> post(record.scalar_trace.data() + options.t_bi,
                                       record.scalar_trace.size() - options.t_bi);
    const auto curve = acf(post, options.acf_lags);
    std::string text;
    for (std::size_t lag = 0; lag < curve.size(); ++lag)
      text += std::to_string(lag) + "," + format_number(curve[lag]) + "\n";
    write_text(dir / "acf.csv", text);
  }

  write_field(dir, "mmse_x", bundle.mmse_x, options.write_pgm);
  write_field(dir, "mmse_z", bundle.mmse_z, options.write_pgm);
  write_field(dir, "mmse_u", bundle.mmse_u, false);
  if (bundle.ci_low && bundle.ci_high) {
    write_field(dir, "ci_low", *bundle.ci_low, options.write_pgm);
    write_field(dir, "ci_high", *bundle.ci_high, options.write_pgm);
  }
}

void write_residuals(const std::vector<AdmmResiduals>& residuals, const fs::path& path) {
  std::string text;
  for (std::size_t i = 0; i < residuals.size(); ++i)
    text += std::to_string(i + 1) + "," + format_number(residuals[i].primal) + "," +
            format_number(residuals[i].dual) + "\n";
  write_text(path, text);
}

void write_aggregate(const std::vector<MetricSummary>& summary, const fs::path& path) {
  std::string text = "name,mean,std\n";
  for (const auto& s : summary)
    text += s.name + "," + format_number(s.mean) + "," + format_number(s.std) + "\n";
  write_text(path, text);
}

}  // namespace splitgibbs
