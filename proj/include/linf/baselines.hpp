#pragma once
#include <functional>
#include <vector>

#include "linf/cd_solver.hpp"
#include "linf/rng.hpp"
#include "linf/smoothing.hpp"

namespace linf {

// Black-box access shared by the reference methods.
struct ObjectiveHandle {
  std::function<double(const std::vector<double>&)> value;
  std::function<std::vector<double>(const std::vector<double>&)> gradient;
  // Optional single partial derivative; falls back to the full gradient.
  std::function<double(const std::vector<double>&, int)> partial;
};

ObjectiveHandle make_handle(const SmaxObjective& f);

enum class StepNorm { linf, l2 };

struct BaselineResult {
  std::vector<double> x;
  std::vector<double> values;  // f after each step, values[0] at the start
  long coordinate_evals = 0;
  std::vector<TranscriptRow> transcript;
};

// x+ = argmin_y f(x) + <g, y - x> + (L/2)||y - x||^2 in the chosen norm, optionally restricted to [-1,1]^m.
BaselineResult gd_general_norm(const ObjectiveHandle& f, double smoothness, int steps, std::vector<double> x0,
                               StepNorm norm = StepNorm::linf, bool box = true);

// Coordinate descent with fixed global constants: j ~ L_j / sum L, x_j -= g_j / L_j.
BaselineResult plain_cd(const ObjectiveHandle& f, const std::vector<double>& coord_smoothness, long steps, Rng& rng,
                        std::vector<double> x0, bool box = true, long record_every = 1);

}  // namespace linf
