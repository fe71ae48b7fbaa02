#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mpsens {

/// Permutation of {0, ..., k-1} stored by its image list: p(i) = image[i].
class Permutation {
  public:
    Permutation() = default;
    explicit Permutation(std::vector<int> image); // throws if not a bijection

    [[nodiscard]] static Permutation identity(int k);
    /// k-cycle i -> i + 1 (mod k), i.e. (1 2 ... k) in one-based notation.
    [[nodiscard]] static Permutation cycle(int k);

    [[nodiscard]] int  size() const { return static_cast<int>(image_.size()); }
    [[nodiscard]] int  operator()(int i) const { return image_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] const std::vector<int> &image() const { return image_; }

    /// (a * b)(i) = a(b(i))
    [[nodiscard]] Permutation operator*(const Permutation &b) const;
    [[nodiscard]] Permutation inverse() const;
    [[nodiscard]] int         cycle_count() const;
    /// Cycle lengths in descending order.
    [[nodiscard]] std::vector<int> cycle_type() const;
    [[nodiscard]] std::string      to_string() const;

    bool operator==(const Permutation &o) const = default;

  private:
    std::vector<int> image_;
};

/// All k! permutations in lexicographic order of their image lists.
[[nodiscard]] std::vector<Permutation> all_permutations(int k);

/// Position of p in all_permutations(p.size()).
[[nodiscard]] std::size_t permutation_index(const Permutation &p);

} // namespace mpsens
