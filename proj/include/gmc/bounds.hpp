#pragma once

#include <cstdint>

namespace gmc {

// ceil(2 K_L B (c_u - c_l) / alpha^2): updates needed before the potential
// can no longer drop by alpha^2 / (2 K_L B) per step.
std::int64_t iteration_bound(double k_L, double B, double c_u, double c_l, double alpha);

// ceil(2 (A C2)^2 / alpha^2 * ln(2 |G| / delta)): per-fold sample size for
// uniform convergence of every violation over a finite class.
std::int64_t sample_complexity(std::int64_t class_size, double A, double C2, double alpha, double delta);

// Ceiling that ignores round-off just above an exact integer.
std::int64_t stable_ceil(double x);

}  // namespace gmc
