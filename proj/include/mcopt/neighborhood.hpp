#pragma once

#include <cstddef>
#include <functional>
#include <iterator>
#include <vector>

namespace mcopt {

/// Encoded solution of one component (permutation, bit vector, grid, ...).
using Part = std::vector<int>;

/// Finite, lazily enumerable set of replacement parts around a source part.
///
/// Candidates are produced on demand by index. When `includes_identity()` is
/// set, index 0 is the source itself.
class Neighborhood {
 public:
  using Generator = std::function<Part(std::size_t)>;

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Part;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    iterator(const Neighborhood* owner, std::size_t index) : owner_(owner), index_(index) {}

    Part operator*() const { return owner_->at(index_); }
    iterator& operator++() {
      ++index_;
      return *this;
    }
    iterator operator++(int) {
      auto copy = *this;
      ++index_;
      return copy;
    }
    friend bool operator==(const iterator& a, const iterator& b) { return a.index_ == b.index_; }

   private:
    const Neighborhood* owner_ = nullptr;
    std::size_t index_ = 0;
  };

  Neighborhood() = default;
  Neighborhood(Part source, std::size_t size, Generator generator, bool includes_identity)
      : source_(std::move(source)),
        size_(size),
        generator_(std::move(generator)),
        includes_identity_(includes_identity) {}

  /// Builds a neighborhood from `move_count` indexed moves, optionally
  /// prefixed by the identity move.
  static Neighborhood from_moves(Part source, std::size_t move_count,
                                 std::function<Part(const Part&, std::size_t)> apply_move,
                                 bool with_identity);

  [[nodiscard]] const Part& source() const { return source_; }
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] bool empty() const { return size_ == 0; }
  [[nodiscard]] bool includes_identity() const { return includes_identity_; }
  [[nodiscard]] Part at(std::size_t index) const { return generator_(index); }

  [[nodiscard]] iterator begin() const { return {this, 0}; }
  [[nodiscard]] iterator end() const { return {this, size_}; }

 private:
  Part source_;
  std::size_t size_ = 0;
  Generator generator_;
  bool includes_identity_ = false;
};

/// Cartesian product of per-component neighborhoods, enumerated lazily in
/// row-major order (the first factor varies slowest).
class JointNeighborhood {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = std::vector<Part>;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    iterator(const JointNeighborhood* owner, std::size_t index) : owner_(owner), index_(index) {}

    std::vector<Part> operator*() const { return owner_->at(index_); }
    iterator& operator++() {
      ++index_;
      return *this;
    }
    iterator operator++(int) {
      auto copy = *this;
      ++index_;
      return copy;
    }
    friend bool operator==(const iterator& a, const iterator& b) { return a.index_ == b.index_; }

   private:
    const JointNeighborhood* owner_ = nullptr;
    std::size_t index_ = 0;
  };

  explicit JointNeighborhood(std::vector<Neighborhood> factors);

  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] const std::vector<Neighborhood>& factors() const { return factors_; }

  /// Per-factor indices of the joint index.
  [[nodiscard]] std::vector<std::size_t> decode(std::size_t index) const;
  [[nodiscard]] std::vector<Part> at(std::size_t index) const;
  /// Candidate tuple for explicit per-factor indices.
  [[nodiscard]] std::vector<Part> at(const std::vector<std::size_t>& digits) const;
  /// True when the joint index selects the identity move in every factor.
  [[nodiscard]] bool is_identity(std::size_t index) const;

  [[nodiscard]] iterator begin() const { return {this, 0}; }
  [[nodiscard]] iterator end() const { return {this, size_}; }

 private:
  std::vector<Neighborhood> factors_;
  std::size_t size_ = 0;
};

/// Throws EmptyFactors when `factors` is empty.
JointNeighborhood joint_neighborhood(std::vector<Neighborhood> factors);

}  // namespace mcopt
