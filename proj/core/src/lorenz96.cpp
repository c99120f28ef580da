#include "splitflow/lorenz96.hpp"

#include <cmath>
#include <numbers>

namespace splitflow::lorenz96 {

System::System(int dim, std::vector<double> forcing)
    : d(dim), beta(std::move(forcing)) {
  if (d < 4) throw std::invalid_argument("lorenz96: d must be >= 4");
  if (beta.size() != static_cast<std::size_t>(d)) {
    throw std::invalid_argument("lorenz96: beta must have d entries");
  }
  for (double b : beta) {
    if (b == 0.0 || !std::isfinite(b)) {
      throw std::invalid_argument("lorenz96: every beta_i must be nonzero and finite");
    }
  }
}

System::System(int dim, double b) : System(dim, std::vector<double>(dim, b)) {}

double System::beta_norm() const {
  double s = 0;
  for (double b : beta) s += b * b;
  return std::sqrt(s);
}

namespace {
inline int wrap(int i, int d) {
  i %= d;
  return i < 0 ? i + d : i;
}
}  // namespace

void rotation_flow_inplace(const System& sys, std::span<double> x, int mode,
                           double t) {
  const int d = sys.d;
  if (mode < 0 || mode >= d) throw std::invalid_argument("rotation_flow: bad mode");
  if (!(t >= 0)) throw std::invalid_argument("rotation_flow: t must be >= 0");
  const int i = mode;
  const int ip = wrap(mode + 1, d);
  const int im = wrap(mode - 1, d);
  const double rate = x[im];
  const double c = std::cos(rate * t);
  const double s = std::sin(rate * t);
  const double xi = x[i], xp = x[ip];
  x[i] = xi * c + xp * s;
  x[ip] = -xi * s + xp * c;
}

StateVector rotation_flow(const System& sys, const StateVector& x, int mode,
                          double t) {
  StateVector y = x;
  rotation_flow_inplace(sys, y, mode, t);
  return y;
}

void star_flow_inplace(const System& sys, std::span<double> x, double t) {
  if (!(t >= 0)) throw std::invalid_argument("star_flow: t must be >= 0");
  const double decay = std::exp(-t);
  x[0] = sys.beta[0] + (x[0] - sys.beta[0]) * decay;
  for (int i = 1; i < sys.d; ++i) x[i] += sys.beta[i] * t;
}

StateVector star_flow(const System& sys, const StateVector& x, double t) {
  StateVector y = x;
  star_flow_inplace(sys, y, t);
  return y;
}

StateVector full_drift(const System& sys, std::span<const double> x) {
  const int d = sys.d;
  StateVector v(d);
  for (int c = 0; c < d; ++c) {
    const double nonlinear =
        (x[wrap(c + 1, d)] - x[wrap(c - 2, d)]) * x[wrap(c - 1, d)];
    v[c] = nonlinear + sys.beta[c] - (c == 0 ? x[0] : 0.0);
  }
  return v;
}

double lyapunov_H(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v * v;
  return std::sqrt(s) + 1.0;
}

bool in_dissipative_region(std::span<const double> x, double eta) {
  if (!(eta > 0 && eta < 1)) {
    throw std::invalid_argument("in_dissipative_region: eta must be in (0,1)");
  }
  double s = 0;
  for (double v : x) s += v * v;
  return x[0] * x[0] >= eta * s;
}

RegionSpec dissipative_region(double eta) {
  if (!(eta > 0 && eta < 1)) {
    throw std::invalid_argument("dissipative_region: eta must be in (0,1)");
  }
  return RegionSpec{
      [eta](std::span<const double> x) { return in_dissipative_region(x, eta); },
      "lorenz96 D_eta"};
}

LadderConfig make_ladder(const System& sys, double h) {
  if (!(h > 0)) throw std::invalid_argument("make_ladder: h must be > 0");
  LadderConfig cfg;
  cfg.d = sys.d;
  cfg.h = h;
  cfg.beta_norm = sys.beta_norm();
  // log2 bounds first: R_{d-1} = R_0 (h/16)^{d-1} shrinks geometrically and
  // R grows like 2^d / R_{d-1}.
  const double log2_Rlast = -0.5 * std::log2(static_cast<double>(sys.d)) +
                            (sys.d - 1) * std::log2(h / 16.0);
  const double log2_outer = (sys.d + 5) +
                            std::log2(std::max(cfg.beta_norm, 1.0)) - log2_Rlast;
  if (log2_Rlast < -1000.0 || log2_outer > 995.0) {
    throw std::invalid_argument("make_ladder: radii leave double range for this (d,h)");
  }
  cfg.R.resize(sys.d);
  cfg.R[0] = 1.0 / std::sqrt(static_cast<double>(sys.d));
  for (int j = 1; j < sys.d; ++j) cfg.R[j] = cfg.R[j - 1] * h / 16.0;
  cfg.outer_R = std::exp2(sys.d + 5) * std::max(cfg.beta_norm, 1.0) /
                cfg.R[sys.d - 1];
  cfg.R_star = std::exp2(sys.d - 1) * cfg.outer_R + 1.0;
  return cfg;
}

std::optional<int> ladder_region_index(const System& sys,
                                       const LadderConfig& ladder,
                                       std::span<const double> x) {
  const int d = sys.d;
  double norm2 = 0;
  for (double v : x) norm2 += v * v;
  const double norm = std::sqrt(norm2);
  if (norm + 1.0 <= ladder.R_star) return std::nullopt;
  if (norm >= ladder.outer_R && std::fabs(x[0]) >= ladder.R[d - 1] * norm) {
    return 1;
  }
  for (int j = 2; j <= d; ++j) {
    if (norm >= std::exp2(j - 1) * ladder.outer_R &&
        std::fabs(x[j - 1]) >= ladder.R[d - j] * norm &&
        std::fabs(x[j - 2]) < ladder.R[d - j + 1] * norm) {
      return j;
    }
  }
  return std::nullopt;
}

bool h_star_valid(double h) {
  if (!(h > 0)) return false;
  if (!(h < std::numbers::pi / 12.0)) return false;
  if (!(std::exp(-6.0 * h) >= 0.75)) return false;
  if (!(1.0 - std::exp(-5.0 * h) - 3.0 * h * std::exp(-5.0 * h) >= h)) return false;
  // Sine-window implication, checked on a grid over |y| in [0, 4 pi].
  const double pi = std::numbers::pi;
  const int n = 200'000;
  for (int i = 0; i <= n; ++i) {
    const double y = 4.0 * pi * i / n;
    if (std::fabs(std::sin(y)) <= h) {
      const double dist = std::fabs(y - pi * std::round(y / pi));
      if (!(dist < 3.0 * h)) return false;
    }
  }
  return true;
}

namespace {

class RotationField final : public VectorField {
 public:
  RotationField(const System& sys, int mode)
      : sys_(sys), mode_(mode), name_("V_" + std::to_string(mode + 1)) {
    touched_[0] = static_cast<std::uint32_t>(mode);
    touched_[1] = static_cast<std::uint32_t>(wrap(mode + 1, sys.d));
  }
  void flow(std::span<double> x, double t) const override {
    rotation_flow_inplace(sys_, x, mode_, t);
  }
  void eval(std::span<const double> x, std::span<double> out) const override {
    const int d = sys_.d;
    const int i = mode_, ip = wrap(mode_ + 1, d), im = wrap(mode_ - 1, d);
    out[i] += x[ip] * x[im];
    out[ip] += -x[i] * x[im];
  }
  std::string_view name() const override { return name_; }
  std::span<const std::uint32_t> touched() const override { return touched_; }

 private:
  System sys_;
  int mode_;
  std::string name_;
  std::uint32_t touched_[2];
};

class StarField final : public VectorField {
 public:
  explicit StarField(const System& sys) : sys_(sys) {}
  void flow(std::span<double> x, double t) const override {
    star_flow_inplace(sys_, x, t);
  }
  void eval(std::span<const double> x, std::span<double> out) const override {
    out[0] += -x[0] + sys_.beta[0];
    for (int i = 1; i < sys_.d; ++i) out[i] += sys_.beta[i];
  }
  std::string_view name() const override { return "V_star"; }

 private:
  System sys_;
};

}  // namespace

Splitting make_splitting(const System& sys) {
  std::vector<std::unique_ptr<const VectorField>> fields;
  fields.reserve(sys.d + 1);
  for (int i = 0; i < sys.d; ++i) {
    fields.push_back(std::make_unique<RotationField>(sys, i));
  }
  fields.push_back(std::make_unique<StarField>(sys));
  return Splitting(static_cast<std::size_t>(sys.d), std::move(fields));
}

}  // namespace splitflow::lorenz96
