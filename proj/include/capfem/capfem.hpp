#pragma once

/// @file capfem.hpp
/// @brief Umbrella header for the capfem library: finite element simulation
///        of capacitive interface problems (conductivity + permittivity
///        jumps across an internal circular interface) with backward-Euler
///        time stepping and convergence certification.

#include "capfem/assembly.hpp"
#include "capfem/config.hpp"
#include "capfem/error.hpp"
#include "capfem/expression.hpp"
#include "capfem/geometry.hpp"
#include "capfem/io.hpp"
#include "capfem/mesh.hpp"
#include "capfem/projection.hpp"
#include "capfem/pulses.hpp"
#include "capfem/quadrature.hpp"
#include "capfem/solver.hpp"
#include "capfem/sparse.hpp"
#include "capfem/timegrid.hpp"
#include "capfem/timestepping.hpp"
#include "capfem/verification.hpp"
