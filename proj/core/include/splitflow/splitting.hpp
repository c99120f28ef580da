#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "splitflow/rng.hpp"

namespace splitflow {

using StateVector = std::vector<double>;

/// Raised when a flow produces a non-finite or astronomically large state.
/// Exact flows have no step-size control, so blow-ups must fail loudly.
struct overflow_error : std::runtime_error {
  overflow_error(std::size_t field, std::string what_arg)
      : std::runtime_error(std::move(what_arg)), field_id(field) {}
  std::size_t field_id;
  std::optional<std::uint64_t> trajectory;
};

inline constexpr double kOverflowLimit = 1e300;

/// One exactly integrable member of a splitting.  `flow` advances the state
/// in place along this field for time t >= 0; `eval` accumulates (+=) the
/// vector field value into `out`, so callers must zero the buffer first.
class VectorField {
 public:
  virtual ~VectorField() = default;
  virtual void flow(std::span<double> x, double t) const = 0;
  virtual void eval(std::span<const double> x, std::span<double> out) const = 0;
  virtual std::string_view name() const = 0;
  /// Coordinates this field can modify; empty means "potentially all".
  virtual std::span<const std::uint32_t> touched() const { return {}; }
};

/// An ordered family of exactly integrable vector fields summing to the full
/// drift.  Immutable after construction; safe to share across threads.
class Splitting {
 public:
  Splitting(std::size_t dim,
            std::vector<std::unique_ptr<const VectorField>> fields);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return fields_.size(); }
  const VectorField& field(std::size_t i) const { return *fields_[i]; }

  /// Applies field i for time t and checks the touched coordinates for
  /// overflow.  Throws overflow_error carrying the field id.
  void apply_flow(std::size_t i, std::span<double> x, double t) const;

  /// Sum of all field evaluations at x.
  StateVector drift(std::span<const double> x) const;

 private:
  std::size_t dim_;
  std::vector<std::unique_ptr<const VectorField>> fields_;
};

/// One chain step's randomness: a permutation of the field indices and one
/// positive duration per position.
struct CycleProgram {
  std::vector<std::uint32_t> order;
  std::vector<double> durations;
};

/// The m+1 states visited inside one step; intermediates.front() is the
/// step's input and intermediates.back() its output.
struct StepTrace {
  std::vector<StateVector> intermediates;
  CycleProgram program;
};

/// Deterministic total predicate describing a dissipative region D.
struct RegionSpec {
  std::function<bool(std::span<const double>)> contains;
  std::string label;
};

/// Samples sigma uniformly over all m! permutations and m i.i.d.
/// exponential(mean h) durations.  Consumes exactly 2m-1 draws.
CycleProgram sample_cycle(RngStream& rng, std::size_t m, double h);

StepTrace compose_cycle(const Splitting& s, std::span<const double> x,
                        const CycleProgram& program);

/// Composition without materializing intermediates.
StateVector compose_cycle_state(const Splitting& s, std::span<const double> x,
                                const CycleProgram& program);

StepTrace step(const Splitting& s, std::span<const double> x, RngStream& rng,
               double h);

struct Trajectory {
  std::vector<StateVector> states;
  std::vector<StepTrace> traces;  // empty unless requested
};

Trajectory run_chain(const Splitting& s, const StateVector& x0, std::uint64_t n,
                     RngStream& rng, double h, bool keep_traces = false);

/// O(dim)-memory walker for long chains.
class ChainWalker {
 public:
  ChainWalker(const Splitting& s, StateVector x0, double h)
      : s_(&s), x_(std::move(x0)), h_(h), scratch_(s.size()) {}
  void advance(RngStream& rng);
  const StateVector& state() const { return x_; }

 private:
  const Splitting* s_;
  StateVector x_;
  double h_;
  std::vector<std::uint32_t> scratch_;
};

/// True iff the intermediate sequence first enters D after the k-th flow for
/// some k in 0..m-1 and the (k+1)-st flow is field ell.
bool entrance_event(const StepTrace& trace, const RegionSpec& region,
                    std::uint32_t ell);

/// Streaming variant: evaluates the same event while composing the cycle,
/// storing only the current state.
bool entrance_event_streaming(const Splitting& s, std::span<const double> x,
                              const CycleProgram& program,
                              const RegionSpec& region, std::uint32_t ell);

struct EntranceEstimate {
  double estimate = 0;
  double ci_halfwidth = 0;  // 95%, normal approximation
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
};

/// Monte Carlo frequency of the entrance event over independent cycles.
/// Trial i uses stream (seed, stream_base + i).
EntranceEstimate estimate_entrance_probability(
    const Splitting& s, const StateVector& x, const RegionSpec& region,
    std::uint32_t ell, std::uint64_t trials, double h, std::uint64_t seed,
    std::uint64_t stream_base = 0, unsigned workers = 1);

/// Runs fn(i) for i in [0,n) across `workers` threads.  Results must be
/// written to per-index slots; reductions happen after the join, so the
/// outcome does not depend on the worker count.
void parallel_for(std::uint64_t n, unsigned workers,
                  const std::function<void(std::uint64_t)>& fn);

}  // namespace splitflow
