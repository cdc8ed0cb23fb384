#ifndef SLICESIM_ORCHESTRATOR_HPP_
#define SLICESIM_ORCHESTRATOR_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "slicesim/baselines.hpp"
#include "slicesim/checkpoint.hpp"
#include "slicesim/drl/agent.hpp"
#include "slicesim/env.hpp"
#include "slicesim/metrics.hpp"

namespace slicesim {

class OrchestrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SliceRecord {
  double satisfaction = 0.0;
  bool needs_resources = false;
  bool has_spare = false;

  bool operator==(const SliceRecord&) const = default;
};

/// Append-only store of what each slice published at the end of each slot.
/// Slot -1 holds the initial records that start the first allocation.
class SharedDb {
 public:
  explicit SharedDb(int num_slices = 0) : num_slices_(num_slices) {}

  int num_slices() const { return num_slices_; }
  std::size_t size() const { return records_.size(); }

  /// Throws OrchestrationError when (slice, slot) already exists.
  void publish(int slice, std::int64_t slot, const SliceRecord& r);
  /// Initial records: unsatisfied, needs resources, no spare.
  void publish_initial();

  const SliceRecord& at(int slice, std::int64_t slot) const;
  bool complete(std::int64_t slot) const;

  /// OR of needs_resources over every slice at `slot`; throws if any
  /// record of that slot is missing.
  bool trigger(std::int64_t slot) const;

  nlohmann::json export_json() const;

 private:
  int num_slices_;
  std::map<std::pair<std::int64_t, int>, SliceRecord> records_;
};

/// Decides the actions of one slot and learns from its outcome.
class Controller {
 public:
  virtual ~Controller() = default;

  /// Allocate inter-slice bandwidth on every slot, ignoring the trigger.
  virtual bool allocates_every_slot() const { return false; }
  virtual bool cost_in_objective() const { return true; }

  virtual Eigen::VectorXd global_action(const SlicingEnv& env, bool explore) = 0;
  virtual Eigen::VectorXd slice_action(const SlicingEnv& env, int s, bool explore) = 0;

  /// Called after complete_slot and advance; `learn` routes transitions.
  virtual void end_slot(const SlicingEnv& env, const SlotOutcome& outcome, bool learn) {
    (void)env;
    (void)outcome;
    (void)learn;
  }
  virtual void end_episode() {}
};

/// Learned agents: one inter-slice agent and one agent per slice, each with
/// its own observation encoder.
class DrlController final : public Controller {
 public:
  /// A slice agent may be wider than its slice: missing users are padded
  /// with the standardised mean and the extra outputs dropped.
  DrlController(std::unique_ptr<drl::Agent> global,
                std::vector<std::unique_ptr<drl::Agent>> slices);

  Eigen::VectorXd global_action(const SlicingEnv& env, bool explore) override;
  Eigen::VectorXd slice_action(const SlicingEnv& env, int s, bool explore) override;
  void end_slot(const SlicingEnv& env, const SlotOutcome& outcome, bool learn) override;
  void end_episode() override;

  drl::Agent& global_agent() { return *global_; }
  drl::Agent& slice_agent(int s) { return *slices_[std::size_t(s)]; }
  int num_slices() const { return int(slices_.size()); }
  std::vector<GainNormalizer>& normalizers() { return normalizers_; }

  /// Whether normalisers absorb fresh gains (training only).
  void set_update_normalizers(bool on) { update_normalizers_ = on; }
  /// When off, the inter-slice agent acts greedily and stores nothing.
  void set_global_learning(bool on) { global_learning_ = on; }

  void save(Checkpoint& ckpt) const;
  void load(const Checkpoint& ckpt);

  Eigen::VectorXf encode_global(const SlicingEnv& env) const;
  Eigen::VectorXf encode_slice(const SlicingEnv& env, int s) const;

 private:
  struct Pending {
    bool active = false;
    Eigen::VectorXf observation;
    Eigen::VectorXf raw;
    float log_prob = 0.0f;
  };

  std::unique_ptr<drl::Agent> global_;
  std::vector<std::unique_ptr<drl::Agent>> slices_;
  std::vector<GainNormalizer> normalizers_;
  bool update_normalizers_ = false;
  bool global_learning_ = true;
  Pending pending_global_;
  std::vector<Pending> pending_slices_;
};

/// Demand-driven baseline; allocates every slot.
class RssiIpController final : public Controller {
 public:
  explicit RssiIpController(std::vector<int> contracted_users)
      : contracted_(std::move(contracted_users)) {}

  bool allocates_every_slot() const override { return true; }
  bool cost_in_objective() const override { return false; }

  Eigen::VectorXd global_action(const SlicingEnv& env, bool explore) override;
  Eigen::VectorXd slice_action(const SlicingEnv& env, int s, bool explore) override;

  const std::optional<RssiIpAllocation>& last() const { return current_; }

 private:
  std::vector<int> contracted_;
  std::optional<RssiIpAllocation> current_;
};

struct SlotOptions {
  bool explore = false;
  bool learn = false;
  bool force_trigger = false;
};

/// Plays slot t: trigger, inter-slice stage (or carry-over), one intra-slice
/// stage per slice, publication, metrics, advance.
MetricsRecord run_slot(SlicingEnv& env, Controller& controller, SharedDb& db,
                       const SlotOptions& options);

enum class RunMode { kTrain, kEval };

struct EpisodeOptions {
  RunMode mode = RunMode::kEval;
  bool force_trigger = false;
  /// Keep only per-slot aggregates (per-user fields left empty).
  bool keep_user_metrics = true;
};

/// Resets `env` with `seed` and plays one episode from a fresh database.
EpisodeMetrics run_episode(SlicingEnv& env, Controller& controller, std::uint64_t seed,
                           const EpisodeOptions& options, SharedDb* db_out = nullptr);

}  // namespace slicesim

#endif  // SLICESIM_ORCHESTRATOR_HPP_
