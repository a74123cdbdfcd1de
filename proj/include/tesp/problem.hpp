#pragma once

#include "tesp/tubal.hpp"

#include <optional>

namespace tesp {

// Consistent equation A * X * B = C with A m x r x l, B s x n x l, C m x n x l.
struct Problem {
  TubalMatrix a, b, c;
  std::optional<TubalMatrix> x_star;

  Index m() const { return a.rows(); }
  Index r() const { return a.cols(); }
  Index s() const { return b.rows(); }
  Index n() const { return b.cols(); }
  Index tubes() const { return a.tubes(); }

  // Shape and finiteness checks; throws shape_error or domain_error.
  void validate() const;
};

Problem make_problem(TubalMatrix a, TubalMatrix b, TubalMatrix c,
                     std::optional<TubalMatrix> x_star = std::nullopt);

}  // namespace tesp
