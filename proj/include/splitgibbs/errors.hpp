#pragma once

#include <stdexcept>

#include "splitgibbs/image_field.hpp"  // DimensionError

namespace splitgibbs {

/// A precision term that the requested sampler cannot handle.
class StructureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numeric parameter outside its admissible range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense factorization failed (matrix not SPD).
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model that is internally inconsistent (missing prox, singular precision...).
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace splitgibbs
