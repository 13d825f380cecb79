#include "rba/envelope.hpp"

#include <algorithm>
#include <stdexcept>

namespace rba {

ConcaveMajorant upper_concave_majorant(const std::vector<double>& xs,
                                       const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("majorant needs >= 2 points");
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        if (!(xs[i + 1] > xs[i])) throw std::invalid_argument("xs must be increasing");

    // Monotone chain for the upper hull: pop only on a strict slope increase,
    // so collinear input points remain vertices.
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        while (stack.size() >= 2) {
            std::size_t a = stack[stack.size() - 2], b = stack.back();
            double lhs = (ys[b] - ys[a]) * (xs[i] - xs[b]);
            double rhs = (ys[i] - ys[b]) * (xs[b] - xs[a]);
            if (lhs < rhs)
                stack.pop_back();
            else
                break;
        }
        stack.push_back(i);
    }

    ConcaveMajorant out;
    out.vertices = stack;
    out.values.assign(xs.size(), 0.0);
    for (std::size_t s = 0; s + 1 < stack.size(); ++s) {
        std::size_t a = stack[s], b = stack[s + 1];
        out.values[a] = ys[a];
        for (std::size_t i = a + 1; i < b; ++i) {
            double t = (xs[i] - xs[a]) / (xs[b] - xs[a]);
            out.values[i] = ys[a] + t * (ys[b] - ys[a]);
        }
    }
    out.values.back() = ys.back();
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> bridge_intervals(const ConcaveMajorant& m) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t s = 0; s + 1 < m.vertices.size(); ++s)
        if (m.vertices[s + 1] > m.vertices[s] + 1)
            out.emplace_back(m.vertices[s], m.vertices[s + 1]);
    return out;
}

namespace {

std::vector<double> pav(const std::vector<double>& ys, bool nonincreasing) {
    struct Block {
        double sum;
        std::size_t count;
        double mean() const { return sum / count; }
    };
    std::vector<Block> blocks;
    blocks.reserve(ys.size());
    for (double y : ys) {
        blocks.push_back({y, 1});
        while (blocks.size() >= 2) {
            const Block& prev = blocks[blocks.size() - 2];
            const Block& cur = blocks.back();
            bool violates = nonincreasing ? cur.mean() > prev.mean() + 1e-15
                                          : cur.mean() < prev.mean() - 1e-15;
            if (!violates) break;
            Block merged{prev.sum + cur.sum, prev.count + cur.count};
            blocks.pop_back();
            blocks.back() = merged;
        }
    }
    std::vector<double> out;
    out.reserve(ys.size());
    for (const Block& b : blocks)
        out.insert(out.end(), b.count, b.mean());
    return out;
}

}  // namespace

std::vector<double> pav_nonincreasing(const std::vector<double>& ys) { return pav(ys, true); }
std::vector<double> pav_nondecreasing(const std::vector<double>& ys) { return pav(ys, false); }

}  // namespace rba
