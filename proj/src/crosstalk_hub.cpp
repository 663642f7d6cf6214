#include "xhammer/crosstalk_hub.hpp"

#include <cmath>

#include "xhammer/error.hpp"

namespace xhammer {

CrosstalkHub::CrosstalkHub(const AlphaKernel& kernel, double ambient) : ambient_(ambient) {
  if (std::abs(kernel.ambient - ambient) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "kernel ambient " + std::to_string(kernel.ambient) +
                                                " K differs from " + std::to_string(ambient) + " K");
  }
  for (const auto& [d, e] : kernel.alpha) {
    if (d != Offset{0, 0} && e.value != 0.0) terms_.push_back({d.di, d.dj, e.value});
  }
}

void CrosstalkHub::apply(const CellGrid<double>& t_fil, CellGrid<double>& t_in) const {
  if (!t_in.same_shape(t_fil)) throw Error(ErrorCode::ShapeMismatch, "t_in shape differs from t_fil");
  t_in.fill(0.0);
  const auto rows = static_cast<int>(t_fil.rows());
  const auto cols = static_cast<int>(t_fil.cols());
  for (int p = 0; p < rows; ++p) {
    for (int q = 0; q < cols; ++q) {
      const double theta = t_fil(p, q) - ambient_;
      if (theta == 0.0) continue;
      for (const auto& t : terms_) {
        const int i = p + t.di, j = q + t.dj;
        if (i < 0 || j < 0 || i >= rows || j >= cols) continue;
        t_in(i, j) += t.alpha * theta;
      }
    }
  }
}

CrosstalkField crosstalk_temperatures(const CellGrid<double>& t_fil, const AlphaKernel& kernel,
                                      double ambient) {
  const CrosstalkHub hub(kernel, ambient);
  CrosstalkField field{CellGrid<double>(t_fil.rows(), t_fil.cols())};
  hub.apply(t_fil, field.t_in);
  return field;
}

}  // namespace xhammer
