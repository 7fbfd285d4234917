#pragma once

namespace ksmode {

// W(r) = amp (c0 + r^2)^{-power} + floor, the comparison weight of the l = 2
// Schrödinger bound. Defaults reproduce (0.01 + r^2)^{-1.2} + 0.02.
struct WeightW {
  double amp = 1.0;
  double c0 = 0.01;
  double power = 1.2;
  double floor = 0.02;

  double operator()(double r) const;
  double at_infinity() const { return floor; }
  // Positivity and the decay condition W ≳ <r>^{-min(2l+2α-1, 2)+ε}.
  // Throws PreconditionError when violated.
  void validate(double l, double alpha) const;
};

}  // namespace ksmode
