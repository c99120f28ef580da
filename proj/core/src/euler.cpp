#include "splitflow/euler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "splitflow/elliptic.hpp"
#include "splitflow/ode.hpp"

namespace splitflow::euler {

double theta(LatticeIndex k, LatticeIndex l) {
  if ((k.j1 == 0 && k.j2 == 0) || (l.j1 == 0 && l.j2 == 0)) {
    throw std::invalid_argument("theta: k and l must be nonzero");
  }
  const int cr = cross(k, l);
  if (cr == 0) return 0.0;
  const int nk = norm2(k), nl = norm2(l);
  if (nk == nl) return 0.0;
  return cr / (4.0 * std::numbers::pi) * (1.0 / nk - 1.0 / nl);
}

Lattice::Lattice(int N) : N_(N) {
  if (N < 4) throw std::invalid_argument("Lattice: N must be >= 4");
  indices_.reserve(static_cast<std::size_t>(N) * (N + 2));
  for (int j1 = 0; j1 <= N; ++j1) {
    for (int j2 = 0; j2 <= N; ++j2) {
      if (j1 == 0 && j2 == 0) continue;
      indices_.push_back({j1, j2});
    }
  }
}

bool Lattice::contains(LatticeIndex j) const {
  return !(j.j1 == 0 && j.j2 == 0) && j.j1 >= 0 && j.j1 <= N_ && j.j2 >= 0 &&
         j.j2 <= N_;
}

std::size_t Lattice::position(LatticeIndex j) const {
  if (!contains(j)) throw std::invalid_argument("Lattice: mode outside lattice");
  return static_cast<std::size_t>(j.j1) * (N_ + 1) + j.j2 - 1;
}

std::vector<LatticeIndex> build_index_set(int N) {
  const Lattice lat(N);
  return std::vector<LatticeIndex>(lat.indices().begin(), lat.indices().end());
}

std::vector<TriadKey> enumerate_triads(const Lattice& lattice) {
  std::vector<TriadKey> keys;
  const auto idx = lattice.indices();
  for (std::size_t p = 0; p < idx.size(); ++p) {
    for (std::size_t q = p + 1; q < idx.size(); ++q) {
      const LatticeIndex j = idx[p], k = idx[q];
      if (cross(j, k) == 0) continue;
      const LatticeIndex l = j + k;
      if (!lattice.contains(l)) continue;
      for (TriadFamily fam : {TriadFamily::aaa, TriadFamily::abb,
                              TriadFamily::bab, TriadFamily::bba}) {
        keys.push_back({j, k, l, fam});
      }
    }
  }
  return keys;
}

TriadCoeffs triad_coeffs(LatticeIndex j, LatticeIndex k, LatticeIndex l) {
  TriadCoeffs c;
  c.th_kl = theta(k, l);
  c.th_jl = theta(j, l);
  c.th_jk = theta(j, k);
  c.nj2 = norm2(j);
  c.nk2 = norm2(k);
  c.nl2 = norm2(l);
  return c;
}

ConservedPair conserved_pair(const TriadCoeffs& c, Triple p) {
  return {p.x * p.x / c.nj2 + p.y * p.y / c.nk2 + p.z * p.z / c.nl2,
          p.x * p.x + p.y * p.y + p.z * p.z};
}

namespace {

inline double sign_or(double v, double fallback) {
  if (v > 0) return 1.0;
  if (v < 0) return -1.0;
  return fallback;
}

struct CanonicalFrame {
  double x, y, z;
  double th_kl, th_jl, th_jk;
  double nj2, nk2, nl2;
  bool swapped;
};

/// Normalizes roles so that |j| < |k|; the canonical ODE is invariant under
/// the simultaneous swap (x,j) <-> (y,k).
CanonicalFrame normalize_roles(const TriadCoeffs& c, Triple p) {
  CanonicalFrame f{p.x, p.y, p.z, c.th_kl, c.th_jl, c.th_jk,
                   c.nj2, c.nk2, c.nl2, false};
  if (c.nj2 > c.nk2) {
    std::swap(f.x, f.y);
    std::swap(f.nj2, f.nk2);
    std::swap(f.th_kl, f.th_jl);
    f.swapped = true;
  }
  return f;
}

struct EllipticData {
  TriadParams params;
  double amp_x, amp_y, amp_z;  // |x| = amp_x |cn or dn|, etc.
  double sign_carrier;         // sign of z (A1) or x (A2)
};

/// Elliptic parameters in a |j| < |k| frame.  Assumes the triple is not a
/// fixed point and not on the interface.
EllipticData elliptic_data(const CanonicalFrame& f) {
  const double invj = 1.0 / f.nj2, invk = 1.0 / f.nk2, invl = 1.0 / f.nl2;
  const double x2 = f.x * f.x, y2 = f.y * f.y, z2 = f.z * f.z;
  const double eml = x2 * (invj - invl) + y2 * (invk - invl);  // E - ENS/|l|^2
  const double eje = y2 * (invj - invk) + z2 * (invj - invl);  // ENS/|j|^2 - E
  const double s = x2 * (invj - invk) - z2 * (invk - invl);    // E - ENS/|k|^2
  const double enstrophy = x2 + y2 + z2;

  EllipticData d;
  TriadParams& tp = d.params;
  tp.enstrophy = enstrophy;
  tp.energy = x2 * invj + y2 * invk + z2 * invl;
  tp.roles_swapped = f.swapped;
  tp.kappa1 = eml / (invj - invl);
  tp.gamma1 = (invk - invl) / eml;
  tp.kappa2 = eje / (invj - invl);
  tp.gamma2 = (invj - invk) / eje;

  if (s < 0) {
    // A1: ENS/|l|^2 < E < ENS/|k|^2; z never vanishes.
    tp.rho = (invj - invk) * eml / ((invk - invl) * eje);
    tp.rate = std::sqrt((invk - invl) / (invj - invl) * tp.kappa2) * f.th_jl;
    d.amp_x = std::sqrt(tp.kappa1);
    d.amp_y = std::sqrt(eml / (invk - invl));  // 1/sqrt(gamma1)
    d.amp_z = std::sqrt(tp.kappa2);
    d.sign_carrier = sign_or(f.z, 1.0);
    const double sn0 =
        std::clamp(f.y / d.amp_y * d.sign_carrier, -1.0, 1.0);
    const int cn_sign = f.x >= 0 ? 1 : -1;
    tp.theta0 = elliptic::phase_from_pair(tp.rho, sn0, cn_sign);
    tp.branch = d.sign_carrier > 0 ? TriadParams::Branch::a1_pos
                                   : TriadParams::Branch::a1_neg;
  } else {
    // A2: ENS/|k|^2 < E < ENS/|j|^2; x never vanishes.
    tp.rho = (invk - invl) * eje / ((invj - invk) * eml);
    tp.rate = std::sqrt((invj - invk) / (invj - invl) * tp.kappa1) * f.th_jl;
    d.amp_x = std::sqrt(tp.kappa1);
    d.amp_y = std::sqrt(eje / (invj - invk));  // 1/sqrt(gamma2)
    d.amp_z = std::sqrt(tp.kappa2);
    d.sign_carrier = sign_or(f.x, 1.0);
    const double sn0 =
        std::clamp(f.y / d.amp_y * d.sign_carrier, -1.0, 1.0);
    const int cn_sign = f.z >= 0 ? 1 : -1;
    tp.theta0 = elliptic::phase_from_pair(tp.rho, sn0, cn_sign);
    tp.branch = d.sign_carrier > 0 ? TriadParams::Branch::a2_pos
                                   : TriadParams::Branch::a2_neg;
  }
  return d;
}

inline bool is_fixed_point(Triple p) {
  return (p.x * p.y == 0.0) && (p.y * p.z == 0.0) && (p.x * p.z == 0.0);
}

inline bool on_interface(const CanonicalFrame& f, double tol) {
  const double invj = 1.0 / f.nj2, invk = 1.0 / f.nk2, invl = 1.0 / f.nl2;
  const double s = f.x * f.x * (invj - invk) - f.z * f.z * (invk - invl);
  const double enstrophy = f.x * f.x + f.y * f.y + f.z * f.z;
  return std::fabs(s) <= tol * enstrophy;
}

Triple integrate_canonical(const TriadCoeffs& c, Triple p, double t) {
  auto rhs = [&c](const std::vector<double>& v, std::vector<double>& dv) {
    dv[0] = c.th_kl * v[1] * v[2];
    dv[1] = c.th_jl * v[0] * v[2];
    dv[2] = -c.th_jk * v[0] * v[1];
  };
  const double scale = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
  std::vector<double> y =
      ode::dopri5(rhs, {p.x, p.y, p.z}, t, 1e-12, 1e-14 * std::max(scale, 1.0));
  return {y[0], y[1], y[2]};
}

}  // namespace

TriadParams triad_params(const TriadCoeffs& c, Triple p) {
  if (c.nj2 == c.nk2) {
    throw std::invalid_argument("triad_params: |j| = |k| is the trig case");
  }
  if (is_fixed_point(p)) {
    throw std::invalid_argument("triad_params: equilibrium triple");
  }
  const CanonicalFrame f = normalize_roles(c, p);
  if (on_interface(f, kInterfaceTol)) {
    throw interface_degenerate_error(
        "triad_params: relative energy on the interface E = ENS/|k|^2");
  }
  return elliptic_data(f).params;
}

TripleFlowResult triad_canonical_flow(const TriadCoeffs& c, Triple p, double t,
                                      double interface_tol) {
  if (t == 0 || is_fixed_point(p)) return {p, true};
  if (c.nj2 == c.nk2) {
    // theta_jk = 0: z is constant and (x,y) rotate at rate th_jl * z.
    const double w = c.th_jl * p.z;
    const double cs = std::cos(w * t), sn = std::sin(w * t);
    return {{p.x * cs - p.y * sn, p.x * sn + p.y * cs, p.z}, true};
  }
  const CanonicalFrame f = normalize_roles(c, p);
  if (on_interface(f, interface_tol)) {
    return {integrate_canonical(c, p, t), false};
  }
  const EllipticData d = elliptic_data(f);
  if (!(d.params.rho >= 0.0) || d.params.rho > elliptic::kRhoMax) {
    return {integrate_canonical(c, p, t), false};
  }
  const double u = d.params.rate * t + d.params.theta0;
  const auto [sn, cn, dn] = elliptic::jacobi(d.params.rho, u);
  double xo, yo, zo;
  const double sgn = d.sign_carrier;
  if (d.params.branch == TriadParams::Branch::a1_pos ||
      d.params.branch == TriadParams::Branch::a1_neg) {
    xo = d.amp_x * cn;
    yo = sgn * d.amp_y * sn;
    zo = sgn * d.amp_z * dn;
  } else {
    xo = sgn * d.amp_x * dn;
    yo = sgn * d.amp_y * sn;
    zo = d.amp_z * cn;
  }
  if (f.swapped) std::swap(xo, yo);
  return {{xo, yo, zo}, true};
}

System::System(int N, std::vector<std::pair<LatticeIndex, double>> damping,
               std::size_t forcing_count,
               const std::vector<ForcingEntry>& forcing)
    : lattice_(N) {
  lambda_.assign(lattice_.size(), 0.0);
  for (const auto& [mode, rate] : damping) {
    if (!lattice_.contains(mode)) {
      throw std::invalid_argument("euler::System: damped mode outside lattice");
    }
    if (!(rate > 0)) {
      throw std::invalid_argument("euler::System: damping rates must be > 0");
    }
    const std::size_t pos = lattice_.position(mode);
    if (lambda_[pos] != 0.0) {
      throw std::invalid_argument("euler::System: duplicate damped mode");
    }
    lambda_[pos] = rate;
  }
  for (std::size_t pos = 0; pos < lambda_.size(); ++pos) {
    if (lambda_[pos] > 0) damped_slots_.push_back({pos, lambda_[pos]});
  }
  beta_.assign(forcing_count, StateVector(lattice_.dim(), 0.0));
  for (const ForcingEntry& e : forcing) {
    if (e.ell < 1 || e.ell > forcing_count) {
      throw std::invalid_argument("euler::System: forcing index ell out of range");
    }
    if (!lattice_.contains(e.mode)) {
      throw std::invalid_argument("euler::System: forced mode outside lattice");
    }
    if (e.component != 'a' && e.component != 'b') {
      throw std::invalid_argument("euler::System: forcing component must be 'a' or 'b'");
    }
    const std::size_t slot = e.component == 'a' ? lattice_.a_slot(e.mode)
                                                : lattice_.b_slot(e.mode);
    beta_[e.ell - 1][slot] += e.value;
  }
  triads_ = enumerate_triads(lattice_);
}

bool System::is_damped(LatticeIndex j) const {
  return lattice_.contains(j) && lambda_[lattice_.position(j)] > 0;
}

double System::min_damping_rate() const {
  double m = 0;
  for (const auto& [pos, rate] : damped_slots_) {
    m = m == 0 ? rate : std::min(m, rate);
  }
  return m;
}

namespace {

struct TripleSlots {
  std::size_t sx, sy, sz;
  double zsign;
};

TripleSlots slots_for(const Lattice& lat, const TriadKey& key) {
  switch (key.family) {
    case TriadFamily::aaa:
      return {lat.a_slot(key.j), lat.a_slot(key.k), lat.a_slot(key.l), 1.0};
    case TriadFamily::abb:
      return {lat.a_slot(key.j), lat.b_slot(key.k), lat.b_slot(key.l), 1.0};
    case TriadFamily::bab:
      return {lat.b_slot(key.j), lat.a_slot(key.k), lat.b_slot(key.l), 1.0};
    case TriadFamily::bba:
      // X = b_j, Y = b_k, Z = -a_l.
      return {lat.b_slot(key.j), lat.b_slot(key.k), lat.a_slot(key.l), -1.0};
  }
  throw std::logic_error("slots_for: bad family");
}

}  // namespace

GalerkinFlowResult triad_flow(const System& sys, const StateVector& q,
                              const TriadKey& key, double t) {
  if (q.size() != sys.dim()) throw std::invalid_argument("triad_flow: bad state size");
  if (!(t >= 0)) throw std::invalid_argument("triad_flow: t must be >= 0");
  const TripleSlots sl = slots_for(sys.lattice(), key);
  for (std::size_t s : {sl.sx, sl.sy, sl.sz}) {
    if (!std::isfinite(q[s])) {
      throw std::invalid_argument("triad_flow: non-finite input coordinate");
    }
  }
  const TriadCoeffs c = triad_coeffs(key.j, key.k, key.l);
  const Triple p{q[sl.sx], q[sl.sy], sl.zsign * q[sl.sz]};
  const TripleFlowResult r = triad_canonical_flow(c, p, t);
  GalerkinFlowResult out{q, r.exact};
  out.q[sl.sx] = r.value.x;
  out.q[sl.sy] = r.value.y;
  out.q[sl.sz] = sl.zsign * r.value.z;
  return out;
}

StateVector damp_flow(const System& sys, const StateVector& q, double t) {
  if (!(t >= 0)) throw std::invalid_argument("damp_flow: t must be >= 0");
  StateVector out = q;
  const std::size_t half = sys.lattice().size();
  for (const auto& [pos, rate] : sys.damped_slots()) {
    const double decay = std::exp(-rate * t);
    out[pos] *= decay;
    out[half + pos] *= decay;
  }
  return out;
}

StateVector force_flow(const System& sys, const StateVector& q, double t,
                       std::size_t ell) {
  if (!(t >= 0)) throw std::invalid_argument("force_flow: t must be >= 0");
  if (ell >= sys.forcing_count()) {
    throw std::invalid_argument("force_flow: ell out of range");
  }
  StateVector out = q;
  const auto beta = sys.beta(ell);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += t * beta[i];
  return out;
}

NonresonanceDeltas nonresonance_deltas(const Lattice& lattice, LatticeIndex j,
                                       LatticeIndex k, LatticeIndex l,
                                       std::span<const double> beta) {
  for (LatticeIndex m : {j, k, l}) {
    if (!lattice.contains(m)) {
      throw std::invalid_argument("nonresonance_deltas: mode outside lattice");
    }
  }
  const double invj = 1.0 / norm2(j), invk = 1.0 / norm2(k),
               invl = 1.0 / norm2(l);
  const double baj = beta[lattice.a_slot(j)];
  const double bal = beta[lattice.a_slot(l)];
  const double bbl = beta[lattice.b_slot(l)];
  return {baj * baj * (invj - invk) - bal * bal * (invk - invl),
          baj * baj * (invj - invk) - bbl * bbl * (invk - invl)};
}

namespace {

/// Exact zero on exact-zero inputs; relative 1e-14 test otherwise.
bool delta_nonzero(double t1, double t2) {
  const double delta = t1 - t2;
  const double scale = std::fabs(t1) + std::fabs(t2);
  if (scale == 0.0) return false;
  return std::fabs(delta) > 1e-14 * scale;
}

}  // namespace

bool is_nonresonant(const System& sys, LatticeIndex j) {
  const Lattice& lat = sys.lattice();
  if (!lat.contains(j)) return false;
  const double invj = 1.0 / norm2(j);
  for (std::size_t ell = 0; ell < sys.forcing_count(); ++ell) {
    const auto beta = sys.beta(ell);
    const double baj = beta[lat.a_slot(j)];
    if (baj == 0.0) continue;
    bool ok = true;
    for (LatticeIndex k : lat.indices()) {
      if (norm2(k) == norm2(j)) continue;
      const LatticeIndex l = j + k;
      if (!lat.contains(l)) continue;
      const double invk = 1.0 / norm2(k), invl = 1.0 / norm2(l);
      const double t1 = baj * baj * (invj - invk);
      const double bal = beta[lat.a_slot(l)];
      const double bbl = beta[lat.b_slot(l)];
      if (!delta_nonzero(t1, bal * bal * (invk - invl)) ||
          !delta_nonzero(t1, bbl * bbl * (invk - invl))) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

Assumption check_assumption(const System& sys) {
  const int N = sys.lattice().N();
  const LatticeIndex e1{1, 0}, e2{0, 1}, diag{1, 1}, top{N, N};
  const bool f_e1 = is_nonresonant(sys, e1);
  const bool f_e2 = is_nonresonant(sys, e2);
  if (f_e1 && f_e2 && sys.is_damped(e1) && sys.is_damped(e2) &&
      sys.is_damped(top)) {
    return Assumption::df1;
  }
  if (f_e1 && f_e2 && is_nonresonant(sys, diag) && sys.is_damped(top) &&
      (sys.is_damped(e1) || sys.is_damped(e2))) {
    return Assumption::df2;
  }
  return Assumption::neither;
}

bool in_dissipative_region(const System& sys, std::span<const double> q,
                           double eta) {
  if (!(eta > 0 && eta < 1)) {
    throw std::invalid_argument("in_dissipative_region: eta must be in (0,1)");
  }
  double total = 0;
  for (double v : q) total += v * v;
  double damped = 0;
  const std::size_t half = sys.lattice().size();
  for (const auto& [pos, rate] : sys.damped_slots()) {
    damped += q[pos] * q[pos] + q[half + pos] * q[half + pos];
  }
  return damped >= eta * total;
}

RegionSpec dissipative_region(const System& sys, double eta) {
  if (!(eta > 0 && eta < 1)) {
    throw std::invalid_argument("dissipative_region: eta must be in (0,1)");
  }
  const std::size_t half = sys.lattice().size();
  std::vector<std::pair<std::size_t, double>> slots(
      sys.damped_slots().begin(), sys.damped_slots().end());
  return RegionSpec{
      [slots, half, eta](std::span<const double> q) {
        double total = 0;
        for (double v : q) total += v * v;
        double damped = 0;
        for (const auto& [pos, rate] : slots) {
          damped += q[pos] * q[pos] + q[half + pos] * q[half + pos];
        }
        return damped >= eta * total;
      },
      "euler D_eta"};
}

StateVector full_rhs(const System& sys, std::span<const double> q) {
  const Lattice& lat = sys.lattice();
  const std::size_t half = lat.size();
  StateVector out(lat.dim(), 0.0);
  const auto idx = lat.indices();
  for (std::size_t pj = 0; pj < half; ++pj) {
    const LatticeIndex j = idx[pj];
    double a_dot = 0, b_dot = 0;
    for (std::size_t ell = 0; ell < sys.forcing_count(); ++ell) {
      a_dot += sys.beta(ell)[pj];
      b_dot += sys.beta(ell)[half + pj];
    }
    const double rate = sys.damping_rate(pj);
    if (rate > 0) {
      a_dot -= rate * q[pj];
      b_dot -= rate * q[half + pj];
    }
    // sum over k with l = j + k in the lattice
    for (const LatticeIndex k : idx) {
      const LatticeIndex l = j + k;
      if (!lat.contains(l)) continue;
      const double th = theta(k, l);
      if (th == 0.0) continue;
      const std::size_t pk = lat.position(k), pl = lat.position(l);
      const double ak = q[pk], bk = q[half + pk];
      const double al = q[pl], bl = q[half + pl];
      a_dot += th * (ak * al + bk * bl);
      b_dot += th * (ak * bl - bk * al);
    }
    // sum over unordered pairs {k,l} with k + l = j
    for (const LatticeIndex k : idx) {
      const LatticeIndex l{j.j1 - k.j1, j.j2 - k.j2};
      if (!lat.contains(l)) continue;
      const std::size_t pk = lat.position(k), pl = lat.position(l);
      if (pk >= pl) continue;
      const double th = theta(k, l);
      if (th == 0.0) continue;
      const double ak = q[pk], bk = q[half + pk];
      const double al = q[pl], bl = q[half + pl];
      a_dot += th * (bk * bl - ak * al);
      b_dot -= th * (ak * bl + bk * al);
    }
    out[pj] = a_dot;
    out[half + pj] = b_dot;
  }
  return out;
}

double zeta0(LatticeIndex j, LatticeIndex k, LatticeIndex l, std::size_t d) {
  const double invj = 1.0 / norm2(j), invk = 1.0 / norm2(k),
               invl = 1.0 / norm2(l);
  if (!(invj > invk && invk > invl)) {
    throw std::invalid_argument("zeta0: need 1/|j|^2 > 1/|k|^2 > 1/|l|^2");
  }
  return std::min((invj - invk) / (2.0 * d), (invk - invl) / (2.0 * d));
}

double lyapunov_H(std::span<const double> q) {
  double s = 0;
  for (double v : q) s += v * v;
  return std::sqrt(s) + 1.0;
}

namespace {

class DampField final : public VectorField {
 public:
  DampField(const System& sys) {
    const std::size_t half = sys.lattice().size();
    for (const auto& [pos, rate] : sys.damped_slots()) {
      entries_.push_back({pos, rate});
      entries_.push_back({half + pos, rate});
      touched_.push_back(static_cast<std::uint32_t>(pos));
      touched_.push_back(static_cast<std::uint32_t>(half + pos));
    }
  }
  void flow(std::span<double> x, double t) const override {
    for (const auto& [slot, rate] : entries_) x[slot] *= std::exp(-rate * t);
  }
  void eval(std::span<const double> x, std::span<double> out) const override {
    for (const auto& [slot, rate] : entries_) out[slot] += -rate * x[slot];
  }
  std::string_view name() const override { return "V_damp"; }
  std::span<const std::uint32_t> touched() const override { return touched_; }

 private:
  std::vector<std::pair<std::size_t, double>> entries_;
  std::vector<std::uint32_t> touched_;
};

class ForceField final : public VectorField {
 public:
  ForceField(StateVector beta, std::size_t ell) : beta_(std::move(beta)) {
    name_ = "V_" + std::to_string(ell + 1);
    for (std::size_t i = 0; i < beta_.size(); ++i) {
      if (beta_[i] != 0.0) touched_.push_back(static_cast<std::uint32_t>(i));
    }
  }
  void flow(std::span<double> x, double t) const override {
    for (std::uint32_t i : touched_) x[i] += t * beta_[i];
  }
  void eval(std::span<const double> /*x*/, std::span<double> out) const override {
    for (std::uint32_t i : touched_) out[i] += beta_[i];
  }
  std::string_view name() const override { return name_; }
  std::span<const std::uint32_t> touched() const override { return touched_; }

 private:
  StateVector beta_;
  std::string name_;
  std::vector<std::uint32_t> touched_;
};

class TriadField final : public VectorField {
 public:
  TriadField(const System& sys, const TriadKey& key)
      : coeffs_(triad_coeffs(key.j, key.k, key.l)),
        slots_(slots_for(sys.lattice(), key)) {
    static constexpr const char* fam[] = {"aaa", "abb", "bab", "bba"};
    name_ = std::string("V_") + fam[static_cast<int>(key.family)] + "(" +
            std::to_string(key.j.j1) + "," + std::to_string(key.j.j2) + ";" +
            std::to_string(key.k.j1) + "," + std::to_string(key.k.j2) + ")";
    touched_ = {static_cast<std::uint32_t>(slots_.sx),
                static_cast<std::uint32_t>(slots_.sy),
                static_cast<std::uint32_t>(slots_.sz)};
  }
  void flow(std::span<double> x, double t) const override {
    const Triple p{x[slots_.sx], x[slots_.sy], slots_.zsign * x[slots_.sz]};
    const TripleFlowResult r = triad_canonical_flow(coeffs_, p, t);
    x[slots_.sx] = r.value.x;
    x[slots_.sy] = r.value.y;
    x[slots_.sz] = slots_.zsign * r.value.z;
  }
  void eval(std::span<const double> x, std::span<double> out) const override {
    const double X = x[slots_.sx], Y = x[slots_.sy],
                 Z = slots_.zsign * x[slots_.sz];
    out[slots_.sx] += coeffs_.th_kl * Y * Z;
    out[slots_.sy] += coeffs_.th_jl * X * Z;
    out[slots_.sz] += slots_.zsign * (-coeffs_.th_jk * X * Y);
  }
  std::string_view name() const override { return name_; }
  std::span<const std::uint32_t> touched() const override { return touched_; }

 private:
  TriadCoeffs coeffs_;
  TripleSlots slots_;
  std::string name_;
  std::vector<std::uint32_t> touched_;
};

}  // namespace

Splitting make_splitting(const System& sys) {
  std::vector<std::unique_ptr<const VectorField>> fields;
  fields.reserve(1 + sys.forcing_count() + sys.triads().size());
  fields.push_back(std::make_unique<DampField>(sys));
  for (std::size_t ell = 0; ell < sys.forcing_count(); ++ell) {
    fields.push_back(std::make_unique<ForceField>(
        StateVector(sys.beta(ell).begin(), sys.beta(ell).end()), ell));
  }
  for (const TriadKey& key : sys.triads()) {
    fields.push_back(std::make_unique<TriadField>(sys, key));
  }
  return Splitting(sys.dim(), std::move(fields));
}

}  // namespace splitflow::euler
