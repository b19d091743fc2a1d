#include "mtp/weighted_measure.hpp"

#include <cmath>
#include <string>

#include "mtp/errors.hpp"

namespace mtp {

WeightedShapeMeasure::WeightedShapeMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw InvalidArgument("a weighted shape measure needs at least one atom");
  const int d = atoms_.front().shape.dim();
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    const Atom& a = atoms_[j];
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
      throw InvalidArgument("atom " + std::to_string(j) + " has non-positive weight");
    }
    if (a.shape.dim() != d) throw InvalidArgument("atom " + std::to_string(j) + " has a different dimension");
    total_mass_ += a.weight;
  }
}

}  // namespace mtp
