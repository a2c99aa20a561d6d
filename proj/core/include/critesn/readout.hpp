#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "critesn/reservoir.hpp"

namespace critesn {

struct ReadoutModel {
  Matrix w_out;  // m x k
  double ridge = 0.0;
  double training_error = 0.0;  // RMS over all training outputs
};

// Least squares readout from states (T x k) to targets (T x m):
// w_out^T = (X^T X + ridge I)^-1 X^T Y. With ridge == 0 a singular normal
// matrix raises std::runtime_error.
ReadoutModel fit_readout(const Matrix& states, const Matrix& targets, double ridge);

// T x m outputs, states * w_out^T.
Matrix predict(const ReadoutModel& model, const Matrix& states);

struct MemoryCapacity {
  double total = 0.0;
  std::vector<double> per_delay;  // index d-1 holds delay d
};

struct MemoryCapacityOptions {
  double input_amplitude = 1.0;
  int max_delay = 40;
  int T = 6000;
  int washout = 200;
  double ridge = 1e-8;
  std::uint64_t seed = 1;
};

// Drives a single-input reservoir from the zero state with i.i.d. uniform
// input on [-a, a]. After the washout the run is split in halves; for every
// delay d = 1..max_delay a readout trained on the first half reconstructs
// u_{t-d} on the second, scored by the squared correlation.
MemoryCapacity memory_capacity(const Reservoir& res, const MemoryCapacityOptions& options);

// "delay,score" rows followed by a "total,<sum>" row.
void write_memory_capacity_csv(std::ostream& out, const MemoryCapacity& mc);

}  // namespace critesn
