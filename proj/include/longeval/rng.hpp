#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace longeval::rng {

// Derives an independent generator from the run seed and a stream name, so
// that e.g. question sampling, answer-order swaps, and bootstrap resampling
// draw from unrelated sequences of the same run seed.
std::mt19937_64 substream(std::uint64_t run_seed, std::string_view name);

// Unbiased integer in [0, n). Implemented with rejection sampling rather than
// std::uniform_int_distribution, whose output is implementation-defined;
// artifacts must be byte-identical across platforms.
std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t n);

bool coin(std::mt19937_64& gen);

// Uniform double in [0, 1) with 53 random bits.
double unit_real(std::mt19937_64& gen);

// Fisher-Yates using bounded().
template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& gen) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(bounded(gen, i));
    std::swap(v[i - 1], v[j]);
  }
}

// k distinct indices from [0, population), in draw order.
std::vector<std::size_t> sample_without_replacement(std::size_t population,
                                                    std::size_t k,
                                                    std::mt19937_64& gen);

}  // namespace longeval::rng
