#include "bvfim/trace.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "bvfim/kernels.hpp"

#ifndef BVFIM_VERSION
#define BVFIM_VERSION "0.0.0"
#endif

namespace bvfim {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw Error(ErrorKind::Io, "not a number: '" + text + "'");
  return v;
}

void write_trace_csv(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << kTraceCsvHeader << '\n';
  for (const TraceRecord& r : trace.records) {
    out << r.k << ',' << r.l << ',' << r.step << ',' << format_double(r.F) << ',' << format_double(r.f)
        << ',' << format_double(r.f_reg) << ',' << format_double(r.grad_norm) << ','
        << format_double(r.dist_x) << ',' << format_double(r.wall_ms) << ',' << r.calls.grad_F_y << ','
        << r.calls.grad_f_y << ',' << r.calls.grad_F_x << ',' << r.calls.grad_f_x << ',' << r.calls.hvp
        << ',' << r.calls.jvp << '\n';
  }
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

Trace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kTraceCsvHeader)
    throw Error(ErrorKind::Io, "'" + path.string() + "' does not start with the trace header");
  Trace trace;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 15)
      throw Error(ErrorKind::Io, path.string() + ":" + std::to_string(lineno) + ": expected 15 columns");
    auto u = [&](std::size_t i) { return static_cast<std::uint64_t>(std::stoull(cells[i])); };
    TraceRecord r;
    r.k = u(0);
    r.l = u(1);
    r.step = u(2);
    r.F = parse_double(cells[3]);
    r.f = parse_double(cells[4]);
    r.f_reg = parse_double(cells[5]);
    r.grad_norm = parse_double(cells[6]);
    r.dist_x = parse_double(cells[7]);
    r.dist_y = std::numeric_limits<double>::quiet_NaN();
    r.wall_ms = parse_double(cells[8]);
    r.calls.grad_F_y = u(9);
    r.calls.grad_f_y = u(10);
    r.calls.grad_F_x = u(11);
    r.calls.grad_f_x = u(12);
    r.calls.hvp = u(13);
    r.calls.jvp = u(14);
    trace.records.push_back(std::move(r));
  }
  return trace;
}

std::string library_version() { return BVFIM_VERSION; }

std::string platform_string() {
  std::string os =
#if defined(__linux__)
      "linux";
#elif defined(__APPLE__)
      "darwin";
#elif defined(_WIN32)
      "windows";
#else
      "unknown";
#endif
  std::string arch =
#if defined(__x86_64__) || defined(_M_X64)
      "x86_64";
#elif defined(__aarch64__)
      "aarch64";
#else
      "unknown";
#endif
  return os + "-" + arch + "-" + std::string(kernels::to_string(kernels::active().isa));
}

void write_report_json(const nlohmann::json& report, const std::filesystem::path& path) {
  nlohmann::json doc = report;
  doc["library_version"] = library_version();
  doc["platform"] = platform_string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << '\n';
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

nlohmann::json read_report_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, "'" + path.string() + "': " + e.what());
  }
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace bvfim
