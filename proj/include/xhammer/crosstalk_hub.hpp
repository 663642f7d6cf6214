// Thermal crosstalk between crossbar cells through a translation-invariant
// coupling kernel.
//
// A cell at (p, q) whose filament sits theta = T - T0 above ambient raises the
// cell at (p, q) + d by alpha(d) * theta. Each cell's increment is the sum over
// every other cell; its own temperature never feeds back on itself. Offsets
// that leave the array or are absent from the kernel contribute nothing.
#pragma once

#include <vector>

#include "xhammer/alpha_kernel.hpp"
#include "xhammer/common.hpp"

namespace xhammer {

struct CrosstalkField {
  CellGrid<double> t_in;  // K above ambient
};

class CrosstalkHub {
 public:
  CrosstalkHub(const AlphaKernel& kernel, double ambient);

  // Writes the increments into t_in, which must have the shape of t_fil.
  void apply(const CellGrid<double>& t_fil, CellGrid<double>& t_in) const;

  double ambient() const { return ambient_; }

 private:
  struct Term {
    int di, dj;
    double alpha;
  };
  std::vector<Term> terms_;  // self term excluded
  double ambient_;
};

CrosstalkField crosstalk_temperatures(const CellGrid<double>& t_fil, const AlphaKernel& kernel,
                                      double ambient);

}  // namespace xhammer
