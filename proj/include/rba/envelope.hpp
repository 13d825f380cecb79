#pragma once

#include <cstddef>
#include <vector>

namespace rba {

// Smallest concave function that upper-bounds the points (xs[i], ys[i]).
// `values` holds the majorant at every input x; `vertices` the indices where
// it touches the input (collinear touch points are kept as vertices, so a
// bridge strictly above the input never hides inside a reported segment).
struct ConcaveMajorant {
    std::vector<double> values;
    std::vector<std::size_t> vertices;
};

ConcaveMajorant upper_concave_majorant(const std::vector<double>& xs,
                                       const std::vector<double>& ys);

// Maximal index intervals [lo, hi] between consecutive majorant vertices with
// at least one interior point; these are the ironed (bridged) regions.
std::vector<std::pair<std::size_t, std::size_t>> bridge_intervals(const ConcaveMajorant& m);

// Pool-adjacent-violators. Returns the least-squares monotone fit obtained by
// averaging adjacent violating blocks.
std::vector<double> pav_nonincreasing(const std::vector<double>& ys);
std::vector<double> pav_nondecreasing(const std::vector<double>& ys);

}  // namespace rba
