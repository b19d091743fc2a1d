#pragma once

#include <vector>

#include "mtp/shape.hpp"

namespace mtp {

/// weight * (normalised Lebesgue measure on shape).
struct Atom {
  Shape shape;
  double weight = 0.0;
};

/// A finite sum of uniformly spread masses on shapes.
class WeightedShapeMeasure {
 public:
  /// Throws InvalidArgument on an empty list, a non-positive weight or
  /// atoms of different dimension.
  explicit WeightedShapeMeasure(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  int dim() const { return atoms_.front().shape.dim(); }
  double total_mass() const { return total_mass_; }

 private:
  std::vector<Atom> atoms_;
  double total_mass_ = 0.0;
};

}  // namespace mtp
