#include "mcopt/neighborhood.hpp"

#include <limits>
#include <stdexcept>

#include "mcopt/errors.hpp"

namespace mcopt {

Neighborhood Neighborhood::from_moves(Part source, std::size_t move_count,
                                      std::function<Part(const Part&, std::size_t)> apply_move,
                                      bool with_identity) {
  const std::size_t offset = with_identity ? 1 : 0;
  auto generator = [source, offset, apply = std::move(apply_move)](std::size_t index) -> Part {
    if (index < offset) return source;
    return apply(source, index - offset);
  };
  return {std::move(source), move_count + offset, std::move(generator), with_identity};
}

JointNeighborhood::JointNeighborhood(std::vector<Neighborhood> factors)
    : factors_(std::move(factors)) {
  if (factors_.empty()) throw EmptyFactors("joint neighborhood needs at least one factor");
  size_ = 1;
  for (const auto& factor : factors_) {
    if (factor.size() == 0) {
      size_ = 0;
      break;
    }
    if (size_ > std::numeric_limits<std::size_t>::max() / factor.size()) {
      throw std::overflow_error("joint neighborhood cardinality overflows size_t");
    }
    size_ *= factor.size();
  }
}

std::vector<std::size_t> JointNeighborhood::decode(std::size_t index) const {
  if (index >= size_) throw std::out_of_range("joint neighborhood index out of range");
  std::vector<std::size_t> digits(factors_.size());
  for (std::size_t f = factors_.size(); f-- > 0;) {
    digits[f] = index % factors_[f].size();
    index /= factors_[f].size();
  }
  return digits;
}

std::vector<Part> JointNeighborhood::at(const std::vector<std::size_t>& digits) const {
  std::vector<Part> tuple;
  tuple.reserve(factors_.size());
  for (std::size_t f = 0; f < factors_.size(); ++f) tuple.push_back(factors_[f].at(digits[f]));
  return tuple;
}

std::vector<Part> JointNeighborhood::at(std::size_t index) const { return at(decode(index)); }

bool JointNeighborhood::is_identity(std::size_t index) const {
  const auto digits = decode(index);
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    if (!factors_[f].includes_identity() || digits[f] != 0) return false;
  }
  return true;
}

JointNeighborhood joint_neighborhood(std::vector<Neighborhood> factors) {
  return JointNeighborhood(std::move(factors));
}

}  // namespace mcopt
