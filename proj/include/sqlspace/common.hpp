#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqlspace {

/// Base error type for all failures raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {
inline void append_all(std::ostringstream&) {}
template <class T, class... Rest>
void append_all(std::ostringstream& oss, T&& v, Rest&&... rest) {
  oss << std::forward<T>(v);
  append_all(oss, std::forward<Rest>(rest)...);
}
}  // namespace detail

/// Builds a message from the arguments and throws Error.
template <class... Args>
[[noreturn]] void fail(Args&&... args) {
  std::ostringstream oss;
  detail::append_all(oss, std::forward<Args>(args)...);
  throw Error(oss.str());
}

template <class... Args>
std::string concat(Args&&... args) {
  std::ostringstream oss;
  detail::append_all(oss, std::forward<Args>(args)...);
  return oss.str();
}

/// Diagnostics go to stderr so artifact streams stay clean.
void log_warn(const std::string& msg);
void log_info(const std::string& msg);

template <class A, class B, class... Rest>
void log_warn(A&& a, B&& b, Rest&&... rest) {
  log_warn(concat(std::forward<A>(a), std::forward<B>(b), std::forward<Rest>(rest)...));
}

template <class A, class B, class... Rest>
void log_info(A&& a, B&& b, Rest&&... rest) {
  log_info(concat(std::forward<A>(a), std::forward<B>(b), std::forward<Rest>(rest)...));
}

// ── file helpers ────────────────────────────────────────────────────────────

std::string read_file(const std::string& path);

/// Writes to a sibling temp file and renames it into place, so readers never
/// observe a partially written artifact.
void write_file_atomic(const std::string& path, const std::string& content);

void ensure_dir(const std::string& path);
bool file_exists(const std::string& path);

// ── string helpers ──────────────────────────────────────────────────────────

std::string to_lower(std::string s);
std::string trim(const std::string& s);
bool starts_with(const std::string& s, const std::string& prefix);
bool contains(const std::string& s, const std::string& needle);

/// Splits on runs of non-alphanumeric characters; no empty tokens.
std::vector<std::string> split_non_alnum(const std::string& s);

/// Splits on '\n'; a trailing newline does not produce a final empty line.
std::vector<std::string> split_lines(const std::string& s);

std::string join(const std::vector<std::string>& parts, const std::string& sep);

/// Shortest round-trip decimal rendering, identical across platforms.
std::string format_double(double v);

/// FNV-1a 64-bit; used for cheap deterministic string mixing (not for cache keys).
std::uint64_t fnv1a64(const std::string& s);

}  // namespace sqlspace
