#include "facetmpc/plants.hpp"

#include <cstdio>

#include "facetmpc/io.hpp"

namespace facetmpc {

Eigen::Index Plant::nx() const {
  Eigen::Index n = 0;
  for (const auto& s : subsystems) n += s.nx();
  return n;
}

Eigen::Index Plant::nu() const {
  Eigen::Index n = 0;
  for (const auto& s : subsystems) n += s.nu();
  return n;
}

Eigen::Index Plant::state_offset(int i) const {
  Eigen::Index off = 0;
  for (int k = 0; k < i; ++k) off += subsystems[k].nx();
  return off;
}

Eigen::Index Plant::input_offset(int i) const {
  Eigen::Index off = 0;
  for (int k = 0; k < i; ++k) off += subsystems[k].nu();
  return off;
}

Vec Plant::x_lb() const {
  Vec v(nx());
  for (int i = 0; i < num_subsystems(); ++i) v.segment(state_offset(i), subsystems[i].nx()) = subsystems[i].x_lb;
  return v;
}

Vec Plant::x_ub() const {
  Vec v(nx());
  for (int i = 0; i < num_subsystems(); ++i) v.segment(state_offset(i), subsystems[i].nx()) = subsystems[i].x_ub;
  return v;
}

Mat GlobalModel::b_stacked() const {
  Eigen::Index cols = 0;
  for (const auto& bj : b) cols += bj.cols();
  Mat out(a.rows(), cols);
  Eigen::Index c = 0;
  for (const auto& bj : b) {
    out.middleCols(c, bj.cols()) = bj;
    c += bj.cols();
  }
  return out;
}

GlobalModel assemble_global(const Plant& p) {
  const int m = p.num_subsystems();
  GlobalModel g;
  g.a = Mat::Zero(p.nx(), p.nx());
  for (int i = 0; i < m; ++i) {
    const auto& s = p.subsystems[i];
    g.a.block(p.state_offset(i), p.state_offset(i), s.nx(), s.nx()) = s.a;
  }
  g.b.reserve(m);
  for (int j = 0; j < m; ++j) {
    Mat bj(p.nx(), p.subsystems[j].nu());
    for (int i = 0; i < m; ++i) bj.middleRows(p.state_offset(i), p.subsystems[i].nx()) = p.subsystems[i].b[j];
    g.b.push_back(std::move(bj));
  }
  return g;
}

void validate_plant(const Plant& p) {
  const int m = p.num_subsystems();
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "plant has no subsystems");
  if (p.horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 1");
  if (!(p.sample_period > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample period must be positive");
  for (int i = 0; i < m; ++i) {
    const auto& s = p.subsystems[i];
    const std::string tag = "subsystem " + std::to_string(i) + ": ";
    if (s.a.rows() != s.a.cols()) throw Error(ErrorCode::DimensionMismatch, tag + "A is not square");
    if (static_cast<int>(s.b.size()) != m) throw Error(ErrorCode::DimensionMismatch, tag + "needs one B per input");
    for (int j = 0; j < m; ++j) {
      if (s.b[j].rows() != s.nx() || s.b[j].cols() != p.subsystems[j].nu()) {
        throw Error(ErrorCode::DimensionMismatch, tag + "B_{i,j} has wrong shape");
      }
      require_finite(s.b[j], "B");
    }
    require_finite(s.a, "A");
    if (s.x_lb.size() != s.nx() || s.x_ub.size() != s.nx()) throw Error(ErrorCode::DimensionMismatch, tag + "state bounds");
    if (s.u_ub.size() != s.u_lb.size() || s.nu() < 1) throw Error(ErrorCode::DimensionMismatch, tag + "input bounds");
    if (!((s.x_lb.array() < 0.0).all() && (s.x_ub.array() > 0.0).all())) {
      throw Error(ErrorCode::InvalidArgument, tag + "state bounds must satisfy lb < 0 < ub");
    }
    if (!((s.u_lb.array() < 0.0).all() && (s.u_ub.array() > 0.0).all())) {
      throw Error(ErrorCode::InvalidArgument, tag + "input bounds must satisfy lb < 0 < ub");
    }
  }
  const GlobalModel g = assemble_global(p);
  if (!(spectral_radius(g.a) < 1.0)) throw Error(ErrorCode::InvalidArgument, "plant is not Schur stable");
  if (controllability_rank(g.a, g.b_stacked()) != p.nx()) {
    throw Error(ErrorCode::InvalidArgument, "plant is not controllable");
  }
}

Plant generate_plant(int num_subsystems, std::uint64_t seed, const GenerationConfig& config) {
  if (num_subsystems < 2) throw Error(ErrorCode::InvalidArgument, "generation needs at least two subsystems");
  if (config.nx < 1 || config.nu < 1 || config.horizon < 1) throw Error(ErrorCode::InvalidArgument, "bad dims");
  UniformStream rng(seed);
  const int m = num_subsystems;
  const double r = config.entry_range;

  Plant p;
  p.horizon = config.horizon;
  p.sample_period = 1.0;
  p.seed = seed;
  p.subsystems.resize(m);
  // nu() reads the input-bound length, so size the bounds before the draws.
  for (auto& s : p.subsystems) {
    s.u_lb.resize(config.nu);
    s.u_ub.resize(config.nu);
  }

  // Draw order: all A_i (row-major), then B_{i,j} for i, then j (row-major).
  // Rejected draws are discarded whole.
  bool accepted = false;
  for (int attempt = 0; attempt < config.max_rejections && !accepted; ++attempt) {
    for (auto& s : p.subsystems) {
      s.a.resize(config.nx, config.nx);
      for (int row = 0; row < config.nx; ++row)
        for (int col = 0; col < config.nx; ++col) s.a(row, col) = rng.uniform(-r, r);
    }
    for (auto& s : p.subsystems) {
      s.b.assign(m, Mat(config.nx, config.nu));
      for (int j = 0; j < m; ++j)
        for (int row = 0; row < config.nx; ++row)
          for (int col = 0; col < config.nu; ++col) s.b[j](row, col) = rng.uniform(-r, r);
    }
    bool stable = true;
    for (const auto& s : p.subsystems) stable = stable && spectral_radius(s.a) < 1.0;
    if (!stable) continue;
    const GlobalModel g = assemble_global(p);
    accepted = controllability_rank(g.a, g.b_stacked()) == p.nx();
  }
  if (!accepted) throw Error(ErrorCode::GenerationExhausted, "no stable controllable plant within the rejection budget");

  for (auto& s : p.subsystems) {
    s.x_lb.resize(config.nx);
    s.x_ub.resize(config.nx);
    s.u_lb.resize(config.nu);
    s.u_ub.resize(config.nu);
    for (int k = 0; k < config.nx; ++k) s.x_lb(k) = rng.uniform(config.x_lb_lo, config.x_lb_hi);
    for (int k = 0; k < config.nx; ++k) s.x_ub(k) = rng.uniform(config.x_ub_lo, config.x_ub_hi);
    for (int k = 0; k < config.nu; ++k) s.u_lb(k) = rng.uniform(config.u_lb_lo, config.u_lb_hi);
    for (int k = 0; k < config.nu; ++k) s.u_ub(k) = rng.uniform(config.u_ub_lo, config.u_ub_hi);
  }
  return p;
}

Plant sample_plant() {
  Plant p;
  p.horizon = 3;
  p.sample_period = 1.0;
  p.seed = 0;
  p.subsystems.resize(2);
  auto& s1 = p.subsystems[0];
  auto& s2 = p.subsystems[1];
  s1.a = (Mat(2, 2) << 0.1645, 0.7399, 0.0815, -0.4704).finished();
  s1.b = {(Mat(2, 1) << -0.3639, -0.7616).finished(), (Mat(2, 1) << 0.8797, 0.2911).finished()};
  s2.a = (Mat(2, 2) << -0.0411, 0.0894, 0.2786, 0.2946).finished();
  s2.b = {(Mat(2, 1) << 0.0878, 0.4421).finished(), (Mat(2, 1) << 0.0450, 0.9874).finished()};
  s1.x_lb = (Vec(2) << -63.5878, -59.6464).finished();
  s1.x_ub = (Vec(2) << 29.6809, 19.5218).finished();
  s1.u_lb = (Vec(1) << -1.2686).finished();
  s1.u_ub = (Vec(1) << 3.5116).finished();
  s2.x_lb = (Vec(2) << -67.0765, -31.2846).finished();
  s2.x_ub = (Vec(2) << 19.8728, 15.7232).finished();
  s2.u_lb = (Vec(1) << -1.1090).finished();
  s2.u_ub = (Vec(1) << 4.0879).finished();
  return p;
}

Vec step(const Plant& p, const Vec& x, const Vec& u) {
  if (x.size() != p.nx() || u.size() != p.nu()) throw Error(ErrorCode::DimensionMismatch, "step: state/input length");
  Vec next(p.nx());
  for (int i = 0; i < p.num_subsystems(); ++i) {
    const auto& s = p.subsystems[i];
    Vec xi = s.a * x.segment(p.state_offset(i), s.nx());
    for (int j = 0; j < p.num_subsystems(); ++j) xi += s.b[j] * u.segment(p.input_offset(j), p.subsystems[j].nu());
    next.segment(p.state_offset(i), s.nx()) = xi;
  }
  return next;
}

Vec random_initial_state(const Plant& p, std::uint64_t seed, double frac) {
  UniformStream rng(seed);
  const Vec lb = p.x_lb();
  const Vec ub = p.x_ub();
  Vec x(p.nx());
  for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = rng.uniform(frac * lb(k), frac * ub(k));
  return x;
}

std::string plant_hash(const Plant& p) {
  const std::string text = plant_to_json(p).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace facetmpc
