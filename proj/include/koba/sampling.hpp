#ifndef KOBA_SAMPLING_HPP
#define KOBA_SAMPLING_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include <koba/linalg.hpp>

namespace koba
{

// Radical inverse of index in the given prime base (van der Corput).
double radical_inverse(std::uint64_t index, unsigned base);

// Deterministic quasi-uniform unit directions in R^dim. Halton points are
// pushed through Box-Muller and normalised.
std::vector<RVec> quasi_directions(std::size_t dim, std::size_t count, std::uint64_t offset = 1);

// Signed coordinate axes in lexicographic order of the vectors:
// (-1,0,...), (0,-1,...), ..., (0,...,1), (1,0,...).
std::vector<RVec> axis_directions(std::size_t dim);

RVec random_unit(std::mt19937_64 &rng, std::size_t dim);

// Uniform point in the closed Euclidean ball B(center, radius).
RVec random_in_ball(std::mt19937_64 &rng, std::span<const double> center, double radius);

bool lex_less(std::span<const double> a, std::span<const double> b);

} // namespace koba

#endif
