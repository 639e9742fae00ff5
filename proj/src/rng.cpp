#include "sqlspace/rng.hpp"

#include <algorithm>

namespace sqlspace {

std::vector<size_t> Rng::sample_indices(size_t n, size_t k) {
  if (k > n) fail("sample_indices: k=", k, " exceeds n=", n);
  std::vector<size_t> pool(n);
  for (size_t i = 0; i < n; ++i) pool[i] = i;
  std::vector<size_t> picked;
  picked.reserve(k);
  for (size_t i = 0; i < k; ++i) {
    size_t j = i + static_cast<size_t>(below(n - i));
    std::swap(pool[i], pool[j]);
    picked.push_back(pool[i]);
  }
  return picked;
}

namespace {
std::uint64_t mix(std::uint64_t s, std::uint64_t label) {
  Rng r(s ^ (label + 0x9E3779B97F4A7C15ull));
  return r.next();
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a) { return mix(base, a); }
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return mix(mix(base, a), b);
}
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix(mix(mix(base, a), b), c);
}

}  // namespace sqlspace
