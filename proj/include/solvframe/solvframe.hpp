#ifndef SOLVFRAME_SOLVFRAME_HPP
#define SOLVFRAME_SOLVFRAME_HPP

// Umbrella header: frames generated by irreducible induced
// representations of completely solvable Lie groups, constructed and
// verified numerically from structure constants.

#include "algebra.hpp"
#include "dual.hpp"
#include "examplegroups.hpp"
#include "frames.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "linalg.hpp"
#include "measure.hpp"
#include "orbit.hpp"
#include "pipeline.hpp"
#include "quadrature.hpp"

#endif
