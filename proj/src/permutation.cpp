#include "mpsens/permutation.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mpsens {

Permutation::Permutation(std::vector<int> image) : image_(std::move(image)) {
    std::vector<bool> seen(image_.size(), false);
    for(int v : image_) {
        if(v < 0 || v >= size() || seen[static_cast<std::size_t>(v)])
            throw std::invalid_argument("Permutation: image list is not a bijection");
        seen[static_cast<std::size_t>(v)] = true;
    }
}

Permutation Permutation::identity(int k) {
    std::vector<int> im(static_cast<std::size_t>(k));
    std::iota(im.begin(), im.end(), 0);
    return Permutation(std::move(im));
}

Permutation Permutation::cycle(int k) {
    std::vector<int> im(static_cast<std::size_t>(k));
    for(int i = 0; i < k; ++i) im[static_cast<std::size_t>(i)] = (i + 1) % k;
    return Permutation(std::move(im));
}

Permutation Permutation::operator*(const Permutation &b) const {
    if(size() != b.size()) throw std::invalid_argument("Permutation: composing permutations of different sizes");
    std::vector<int> im(image_.size());
    for(int i = 0; i < size(); ++i) im[static_cast<std::size_t>(i)] = (*this)(b(i));
    return Permutation(std::move(im));
}

Permutation Permutation::inverse() const {
    std::vector<int> im(image_.size());
    for(int i = 0; i < size(); ++i) im[static_cast<std::size_t>((*this)(i))] = i;
    return Permutation(std::move(im));
}

std::vector<int> Permutation::cycle_type() const {
    std::vector<bool> seen(image_.size(), false);
    std::vector<int>  out;
    for(int i = 0; i < size(); ++i) {
        if(seen[static_cast<std::size_t>(i)]) continue;
        int len = 0;
        for(int j = i; !seen[static_cast<std::size_t>(j)]; j = (*this)(j)) {
            seen[static_cast<std::size_t>(j)] = true;
            ++len;
        }
        out.push_back(len);
    }
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

int Permutation::cycle_count() const { return static_cast<int>(cycle_type().size()); }

std::string Permutation::to_string() const { return fmt::format("[{}]", fmt::join(image_, " ")); }

std::vector<Permutation> all_permutations(int k) {
    if(k < 1 || k > 8) throw std::invalid_argument(fmt::format("all_permutations: k = {} outside 1..8", k));
    std::vector<int> im(static_cast<std::size_t>(k));
    std::iota(im.begin(), im.end(), 0);
    std::vector<Permutation> out;
    do out.emplace_back(im);
    while(std::next_permutation(im.begin(), im.end()));
    return out;
}

std::size_t permutation_index(const Permutation &p) {
    // Lehmer code gives the lexicographic rank.
    std::size_t idx = 0;
    const int   k   = p.size();
    for(int i = 0; i < k; ++i) {
        int smaller = 0;
        for(int j = i + 1; j < k; ++j)
            if(p(j) < p(i)) ++smaller;
        std::size_t fact = 1;
        for(int f = 2; f <= k - 1 - i; ++f) fact *= static_cast<std::size_t>(f);
        idx += static_cast<std::size_t>(smaller) * fact;
    }
    return idx;
}

} // namespace mpsens
