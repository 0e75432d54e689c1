#pragma once

#include "odr/gaussian.hpp"

namespace odr {

/// One observed (s, a, s') triple. Discrete states and actions are stored as
/// one-element vectors holding the index.
struct Transition {
  Vector s;
  Vector a;
  Vector s_next;

  friend bool operator==(const Transition&, const Transition&) = default;
};

}  // namespace odr
