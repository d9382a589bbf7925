#pragma once

#include <stdexcept>
#include <string>

namespace kernrec {

/// A numerical stage failed (quadrature non-convergence, unbracketed root,
/// symmetry violation). Parameter problems use std::invalid_argument and
/// std::domain_error instead.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kernrec
