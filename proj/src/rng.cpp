#include "longeval/rng.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

#include "longeval/digest.hpp"

namespace longeval::rng {

std::mt19937_64 substream(std::uint64_t run_seed, std::string_view name) {
  std::string material = std::to_string(run_seed);
  material.push_back('/');
  material.append(name);
  const std::string hex = digest::sha256_hex(material);
  std::uint64_t seed = 0;
  for (int i = 0; i < 16; ++i) {
    char c = hex[i];
    seed = (seed << 4) |
           static_cast<std::uint64_t>(c <= '9' ? c - '0' : c - 'a' + 10);
  }
  return std::mt19937_64(seed);
}

std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("bounded: n must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = gen();
  } while (r >= limit);
  return r % n;
}

bool coin(std::mt19937_64& gen) { return (gen() >> 63) != 0; }

double unit_real(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

std::vector<std::size_t> sample_without_replacement(std::size_t population,
                                                    std::size_t k,
                                                    std::mt19937_64& gen) {
  if (k > population) {
    throw std::invalid_argument("sample_without_replacement: k > population");
  }
  std::vector<std::size_t> idx(population);
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates: the first k slots are the sample.
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j =
        i + static_cast<std::size_t>(bounded(gen, population - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace longeval::rng
