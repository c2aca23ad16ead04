#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fcmon/stats.hpp"

namespace fcmon {

enum class PolicyKind { MeanTest, Pelt, EveryKBatches, Never };

const char* to_string(PolicyKind kind);
PolicyKind parse_policy_kind(const std::string& name);

/// What a rejected mean test does to the reference sample.
enum class ResetMode {
    RejectingBatch,  // the rejected batch becomes the new reference; testing continues next batch
    NextBatch,       // the reference is emptied; the next batch re-seeds it without a test
};

/// Which loss history Pelt segments.
enum class PeltHistory {
    SinceChangepoint,  // history restarts at the last detected changepoint
    Full,              // whole history; retrain when the latest changepoint moves forward
};

struct MonitorPolicy {
    PolicyKind kind = PolicyKind::MeanTest;
    double alpha = 0.05;
    double penalty = 0.0;  // Pelt; <= 0 selects 3*log(n)
    std::size_t min_seg_len = 5;  // Pelt; in batches
    long k = 1;  // EveryKBatches
    std::size_t reference_max_len = 0;  // 0: unbounded
    ResetMode reset = ResetMode::RejectingBatch;
    PeltHistory pelt_history = PeltHistory::SinceChangepoint;

    static MonitorPolicy mean_test(double alpha);
    static MonitorPolicy pelt(double penalty = 0.0, std::size_t min_seg_len = 5);
    static MonitorPolicy every(long k);
    static MonitorPolicy never();

    std::string label() const;
};

/// Losses of the most recent stable regime; the null sample of the test.
class ReferenceBatch {
public:
    explicit ReferenceBatch(std::size_t max_len = 0) : max_len_(max_len) {}

    void reset(std::span<const double> losses, long batch_index);
    void append(std::span<const double> losses);
    void clear();

    bool empty() const noexcept { return losses_.empty(); }
    const std::vector<double>& losses() const noexcept { return losses_; }
    const SampleSummary& summary() const noexcept { return summary_; }
    long established_at() const noexcept { return established_at_; }

private:
    void truncate();

    std::vector<double> losses_;
    SampleSummary summary_;
    long established_at_ = -1;
    std::size_t max_len_;
};

struct MonitorDecision {
    bool retrain = false;
    bool warmup = false;
    std::optional<TestResult> test;
    std::vector<long> changepoints;  // batch indices where detected segments start (Pelt)
    std::optional<long> detection_delay;  // batches between the changepoint and this decision
};

/// Per-stream updating policy as a sequential state machine. Each call
/// handles one completed batch and appends one entry to r_history.
class MonitorState {
public:
    explicit MonitorState(MonitorPolicy policy, long initial_fit_batch = 0);

    /// First loss batch after a (re)fit: seeds the reference (mean test) or the
    /// loss history (Pelt). No test runs; r = 0. Throws AlreadyWarm when the
    /// state is already warm and InvalidArgument on an empty batch.
    MonitorDecision warmup(std::span<const double> first_losses, long batch_index);

    /// Welch test of the new batch against the reference at the policy's
    /// alpha. Accept: the batch joins the reference. Reject: retrain and reset
    /// the reference per the policy's ResetMode. Throws NotWarmedUp when the
    /// reference is empty.
    MonitorDecision mean_test_step(std::span<const double> new_losses, long batch_index);

    /// Appends the batch's mean loss to the history and re-runs Pelt on it.
    /// SinceChangepoint: retrains when any changepoint is found and drops the
    /// history before it. Full: retrains when the latest changepoint is later
    /// than any seen before.
    MonitorDecision pelt_step(std::span<const double> new_losses, long batch_index);

    /// Fixed cadence: retrain once k batches have passed since the last retrain.
    MonitorDecision scheduled_step(long batch_index);

    /// Dispatches to warmup or the policy's step.
    MonitorDecision step(std::span<const double> losses, long batch_index);

    bool warm() const noexcept;
    const MonitorPolicy& policy() const noexcept { return policy_; }
    const ReferenceBatch& reference() const noexcept { return reference_; }
    const std::vector<double>& loss_history() const noexcept { return history_; }
    const std::vector<int>& r_history() const noexcept { return r_history_; }
    long last_retrain() const noexcept { return last_retrain_; }

private:
    MonitorDecision record(MonitorDecision d, long batch_index);
    void require(PolicyKind kind, const char* op) const;

    MonitorPolicy policy_;
    ReferenceBatch reference_;
    std::vector<double> history_;
    std::vector<long> history_batches_;
    long latest_changepoint_ = 0;  // batch index, PeltHistory::Full
    bool warm_ = false;
    long last_retrain_;
    std::vector<int> r_history_;
};

}  // namespace fcmon
