#pragma once

#include "respa/vec.hpp"

namespace respa {

// A differentiable loss surface: scalar loss of an input under a label, and
// the exact gradient of that loss with respect to the input. Implementations
// must be safe for concurrent read-only use.
class LossOracle {
 public:
  virtual ~LossOracle() = default;

  virtual int input_dim() const = 0;
  virtual double loss(const Vec& x, const Vec& y) const = 0;
  virtual Vec input_gradient(const Vec& x, const Vec& y) const = 0;
};

}  // namespace respa
