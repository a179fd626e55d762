#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "facetmpc/numeric.hpp"

namespace facetmpc {

/// One subsystem i: x_i(k+1) = A_i x_i(k) + sum_j B_{i,j} u_j(k).
struct Subsystem {
  Mat a;
  std::vector<Mat> b;  ///< b[j] couples input j into this subsystem
  Vec x_lb, x_ub;
  Vec u_lb, u_ub;

  Eigen::Index nx() const { return a.rows(); }
  Eigen::Index nu() const { return u_lb.size(); }
};

struct Plant {
  std::vector<Subsystem> subsystems;
  int horizon = 3;
  double sample_period = 1.0;
  std::uint64_t seed = 0;

  int num_subsystems() const { return static_cast<int>(subsystems.size()); }
  Eigen::Index nx() const;
  Eigen::Index nu() const;
  /// Offset of subsystem i inside the stacked state / input vectors.
  Eigen::Index state_offset(int i) const;
  Eigen::Index input_offset(int i) const;
  Vec x_lb() const;
  Vec x_ub() const;
};

/// Stacked global model: A = blockdiag(A_i), B_j = [B_{1,j}; ...; B_{M,j}].
struct GlobalModel {
  Mat a;
  std::vector<Mat> b;
  Mat b_stacked() const;  ///< [B_1, ..., B_M]
};

struct GenerationConfig {
  int nx = 2;
  int nu = 1;
  int horizon = 3;
  double entry_range = 1.0;
  double x_lb_lo = -100.0, x_lb_hi = -10.0;
  double x_ub_lo = 10.0, x_ub_hi = 100.0;
  double u_lb_lo = -5.0, u_lb_hi = -1.0;
  double u_ub_lo = 1.0, u_ub_hi = 5.0;
  int max_rejections = 10000;
};

/// Portable uniform stream: std::mt19937_64 (output fixed by the C++
/// standard) seeded with the 64-bit seed, mapped to [0, 1) through the top
/// 53 bits. std::uniform_real_distribution is avoided because its output is
/// implementation-defined.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }

 private:
  std::mt19937_64 engine_;
};

/// Random stable and controllable coupled plant. Throws GenerationExhausted.
Plant generate_plant(int num_subsystems, std::uint64_t seed, const GenerationConfig& config = {});

/// The two-subsystem example plant with its published matrices and bounds.
Plant sample_plant();

/// Throws InvalidArgument / DimensionMismatch when the plant invariants fail.
void validate_plant(const Plant& p);

GlobalModel assemble_global(const Plant& p);

/// x(k+1) for the stacked state and stacked input (no clipping).
Vec step(const Plant& p, const Vec& x, const Vec& u);

/// Initial state uniform in [frac*x_lb, frac*x_ub].
Vec random_initial_state(const Plant& p, std::uint64_t seed, double frac = 0.4);

/// FNV-1a over the canonical JSON encoding, as 16 hex digits.
std::string plant_hash(const Plant& p);

}  // namespace facetmpc
