#include "splitflow/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

namespace splitflow {

Splitting::Splitting(std::size_t dim,
                     std::vector<std::unique_ptr<const VectorField>> fields)
    : dim_(dim), fields_(std::move(fields)) {
  if (dim_ == 0 || fields_.empty()) {
    throw std::invalid_argument("Splitting: need dim > 0 and at least one field");
  }
}

namespace {

void check_finite(std::span<const double> x, std::span<const std::uint32_t> touched,
                  std::size_t field_id, std::string_view name) {
  auto bad = [](double v) { return !std::isfinite(v) || std::fabs(v) > kOverflowLimit; };
  if (touched.empty()) {
    for (double v : x) {
      if (bad(v)) {
        throw overflow_error(field_id, "numeric overflow after flow of field '" +
                                           std::string(name) + "'");
      }
    }
  } else {
    for (std::uint32_t i : touched) {
      if (bad(x[i])) {
        throw overflow_error(field_id, "numeric overflow after flow of field '" +
                                           std::string(name) + "'");
      }
    }
  }
}

void validate_program(const Splitting& s, const CycleProgram& p) {
  const std::size_t m = s.size();
  if (p.order.size() != m || p.durations.size() != m) {
    throw std::invalid_argument("CycleProgram: size mismatch with splitting");
  }
  std::vector<bool> seen(m, false);
  for (std::uint32_t i : p.order) {
    if (i >= m || seen[i]) {
      throw std::invalid_argument("CycleProgram: order is not a permutation");
    }
    seen[i] = true;
  }
  for (double t : p.durations) {
    if (!(t >= 0) || !std::isfinite(t)) {
      throw std::invalid_argument("CycleProgram: durations must be finite and >= 0");
    }
  }
}

}  // namespace

void Splitting::apply_flow(std::size_t i, std::span<double> x, double t) const {
  const VectorField& f = *fields_[i];
  f.flow(x, t);
  check_finite(x, f.touched(), i, f.name());
}

StateVector Splitting::drift(std::span<const double> x) const {
  StateVector sum(dim_, 0.0);
  for (const auto& f : fields_) f->eval(x, sum);
  return sum;
}

CycleProgram sample_cycle(RngStream& rng, std::size_t m, double h) {
  if (m == 0) throw std::invalid_argument("sample_cycle: m must be >= 1");
  if (!(h > 0)) throw std::invalid_argument("sample_cycle: h must be > 0");
  CycleProgram p;
  p.order.resize(m);
  rng.fill_permutation(p.order);
  p.durations.resize(m);
  for (std::size_t i = 0; i < m; ++i) p.durations[i] = rng.exponential(h);
  return p;
}

StepTrace compose_cycle(const Splitting& s, std::span<const double> x,
                        const CycleProgram& program) {
  validate_program(s, program);
  StepTrace trace;
  trace.program = program;
  trace.intermediates.reserve(s.size() + 1);
  trace.intermediates.emplace_back(x.begin(), x.end());
  StateVector cur(x.begin(), x.end());
  for (std::size_t k = 0; k < s.size(); ++k) {
    s.apply_flow(program.order[k], cur, program.durations[k]);
    trace.intermediates.push_back(cur);
  }
  return trace;
}

StateVector compose_cycle_state(const Splitting& s, std::span<const double> x,
                                const CycleProgram& program) {
  validate_program(s, program);
  StateVector cur(x.begin(), x.end());
  for (std::size_t k = 0; k < s.size(); ++k) {
    s.apply_flow(program.order[k], cur, program.durations[k]);
  }
  return cur;
}

StepTrace step(const Splitting& s, std::span<const double> x, RngStream& rng,
               double h) {
  return compose_cycle(s, x, sample_cycle(rng, s.size(), h));
}

Trajectory run_chain(const Splitting& s, const StateVector& x0, std::uint64_t n,
                     RngStream& rng, double h, bool keep_traces) {
  Trajectory out;
  out.states.reserve(static_cast<std::size_t>(n) + 1);
  out.states.push_back(x0);
  StateVector cur = x0;
  for (std::uint64_t k = 0; k < n; ++k) {
    const CycleProgram p = sample_cycle(rng, s.size(), h);
    if (keep_traces) {
      StepTrace t = compose_cycle(s, cur, p);
      cur = t.intermediates.back();
      out.traces.push_back(std::move(t));
    } else {
      cur = compose_cycle_state(s, cur, p);
    }
    out.states.push_back(cur);
  }
  return out;
}

void ChainWalker::advance(RngStream& rng) {
  rng.fill_permutation(scratch_);
  for (std::size_t k = 0; k < scratch_.size(); ++k) {
    s_->apply_flow(scratch_[k], x_, rng.exponential(h_));
  }
}

bool entrance_event(const StepTrace& trace, const RegionSpec& region,
                    std::uint32_t ell) {
  const std::size_t m = trace.program.order.size();
  for (std::size_t k = 0; k < m; ++k) {
    if (region.contains(trace.intermediates[k])) {
      return trace.program.order[k] == ell;
    }
  }
  return false;
}

bool entrance_event_streaming(const Splitting& s, std::span<const double> x,
                              const CycleProgram& program,
                              const RegionSpec& region, std::uint32_t ell) {
  validate_program(s, program);
  StateVector cur(x.begin(), x.end());
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (region.contains(cur)) {
      return program.order[k] == ell;
    }
    s.apply_flow(program.order[k], cur, program.durations[k]);
  }
  return false;
}

EntranceEstimate estimate_entrance_probability(
    const Splitting& s, const StateVector& x, const RegionSpec& region,
    std::uint32_t ell, std::uint64_t trials, double h, std::uint64_t seed,
    std::uint64_t stream_base, unsigned workers) {
  if (trials == 0) throw std::invalid_argument("estimate_entrance_probability: trials >= 1");
  std::vector<std::uint8_t> hits(trials, 0);
  parallel_for(trials, workers, [&](std::uint64_t i) {
    RngStream rng(seed, stream_base + i);
    const CycleProgram p = sample_cycle(rng, s.size(), h);
    try {
      hits[i] = entrance_event_streaming(s, x, p, region, ell) ? 1 : 0;
    } catch (overflow_error& e) {
      e.trajectory = i;
      throw;
    }
  });
  std::uint64_t successes = 0;
  for (std::uint8_t b : hits) successes += b;
  EntranceEstimate e;
  e.trials = trials;
  e.successes = successes;
  e.estimate = static_cast<double>(successes) / static_cast<double>(trials);
  e.ci_halfwidth =
      1.959963984540054 *
      std::sqrt(e.estimate * (1.0 - e.estimate) / static_cast<double>(trials));
  return e;
}

void parallel_for(std::uint64_t n, unsigned workers,
                  const std::function<void(std::uint64_t)>& fn) {
  if (n == 0) return;
  if (workers <= 1 || n == 1) {
    for (std::uint64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned w = static_cast<unsigned>(std::min<std::uint64_t>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(w);
  std::exception_ptr error;
  std::mutex error_mutex;
  for (unsigned t = 0; t < w; ++t) {
    pool.emplace_back([&, t]() {
      const std::uint64_t lo = n * t / w;
      const std::uint64_t hi = n * (t + 1) / w;
      try {
        for (std::uint64_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace splitflow
