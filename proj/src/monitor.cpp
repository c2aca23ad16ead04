#include "fcmon/monitor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "fcmon/errors.hpp"
#include "fcmon/pelt.hpp"

namespace fcmon {

const char* to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::MeanTest: return "mean_test";
        case PolicyKind::Pelt: return "pelt";
        case PolicyKind::EveryKBatches: return "every_k";
        case PolicyKind::Never: return "never";
    }
    return "unknown";
}

PolicyKind parse_policy_kind(const std::string& name) {
    if (name == "mean_test") return PolicyKind::MeanTest;
    if (name == "pelt") return PolicyKind::Pelt;
    if (name == "every_k") return PolicyKind::EveryKBatches;
    if (name == "never") return PolicyKind::Never;
    throw ConfigError("policy", "unknown policy '" + name + "'");
}

MonitorPolicy MonitorPolicy::mean_test(double alpha) {
    MonitorPolicy p;
    p.kind = PolicyKind::MeanTest;
    p.alpha = alpha;
    return p;
}

MonitorPolicy MonitorPolicy::pelt(double penalty, std::size_t min_seg_len) {
    MonitorPolicy p;
    p.kind = PolicyKind::Pelt;
    p.penalty = penalty;
    p.min_seg_len = min_seg_len;
    return p;
}

MonitorPolicy MonitorPolicy::every(long k) {
    MonitorPolicy p;
    p.kind = PolicyKind::EveryKBatches;
    p.k = k;
    return p;
}

MonitorPolicy MonitorPolicy::never() {
    MonitorPolicy p;
    p.kind = PolicyKind::Never;
    return p;
}

std::string MonitorPolicy::label() const {
    std::ostringstream os;
    os << to_string(kind);
    switch (kind) {
        case PolicyKind::MeanTest: os << "(alpha=" << alpha << ")"; break;
        case PolicyKind::Pelt: os << "(penalty=" << (penalty > 0 ? std::to_string(penalty) : "3log(n)") << ")"; break;
        case PolicyKind::EveryKBatches: os << "(k=" << k << ")"; break;
        case PolicyKind::Never: break;
    }
    return os.str();
}

void ReferenceBatch::reset(std::span<const double> losses, long batch_index) {
    losses_.assign(losses.begin(), losses.end());
    established_at_ = batch_index;
    truncate();
    summary_ = SampleSummary::of(losses_);
}

void ReferenceBatch::append(std::span<const double> losses) {
    losses_.insert(losses_.end(), losses.begin(), losses.end());
    if (max_len_ > 0 && losses_.size() > max_len_) {
        truncate();
        summary_ = SampleSummary::of(losses_);
    } else {
        summary_.merge(SampleSummary::of(losses));
    }
}

void ReferenceBatch::clear() {
    losses_.clear();
    summary_ = {};
    established_at_ = -1;
}

void ReferenceBatch::truncate() {
    if (max_len_ > 0 && losses_.size() > max_len_)
        losses_.erase(losses_.begin(), losses_.end() - static_cast<std::ptrdiff_t>(max_len_));
}

MonitorState::MonitorState(MonitorPolicy policy, long initial_fit_batch)
    : policy_(policy), reference_(policy.reference_max_len), last_retrain_(initial_fit_batch) {
    if (policy_.kind == PolicyKind::MeanTest && !(policy_.alpha >= 0.0 && policy_.alpha <= 1.0))
        throw ConfigError("policy.alpha", "alpha must be in [0, 1]");
    if (policy_.kind == PolicyKind::Pelt && policy_.min_seg_len < 2)
        throw ConfigError("policy.min_seg_len", "must be >= 2");
    if (policy_.kind == PolicyKind::EveryKBatches && policy_.k < 1) throw ConfigError("policy.k", "must be >= 1");
}

bool MonitorState::warm() const noexcept {
    return policy_.kind == PolicyKind::MeanTest ? !reference_.empty() : warm_;
}

void MonitorState::require(PolicyKind kind, const char* op) const {
    if (policy_.kind != kind)
        throw InvalidArgument(std::string(op) + " called on a " + to_string(policy_.kind) + " monitor");
}

MonitorDecision MonitorState::record(MonitorDecision d, long batch_index) {
    r_history_.push_back(d.retrain ? 1 : 0);
    if (d.retrain) last_retrain_ = batch_index;
    return d;
}

MonitorDecision MonitorState::warmup(std::span<const double> first_losses, long batch_index) {
    if (warm()) throw AlreadyWarm("monitor is already warm");
    if (first_losses.empty()) throw InvalidArgument("warm-up batch is empty");
    switch (policy_.kind) {
        case PolicyKind::MeanTest: reference_.reset(first_losses, batch_index); break;
        case PolicyKind::Pelt: {
            const double sum = std::accumulate(first_losses.begin(), first_losses.end(), 0.0);
            history_.push_back(sum / static_cast<double>(first_losses.size()));
            history_batches_.push_back(batch_index);
            break;
        }
        default: break;
    }
    warm_ = true;
    MonitorDecision d;
    d.warmup = true;
    return record(std::move(d), batch_index);
}

MonitorDecision MonitorState::mean_test_step(std::span<const double> new_losses, long batch_index) {
    require(PolicyKind::MeanTest, "mean_test_step");
    if (reference_.empty()) throw NotWarmedUp("reference batch is empty; run warmup first");
    if (new_losses.size() < 2) throw InsufficientSample("loss batch needs at least 2 values");

    MonitorDecision d;
    d.test = mean_equality_test(reference_.summary(), SampleSummary::of(new_losses), policy_.alpha);
    if (d.test->reject) {
        d.retrain = true;
        if (policy_.reset == ResetMode::RejectingBatch)
            reference_.reset(new_losses, batch_index);
        else
            reference_.clear();
    } else {
        reference_.append(new_losses);
    }
    return record(std::move(d), batch_index);
}

MonitorDecision MonitorState::pelt_step(std::span<const double> new_losses, long batch_index) {
    require(PolicyKind::Pelt, "pelt_step");
    if (new_losses.empty()) throw InvalidArgument("loss batch is empty");
    const double sum = std::accumulate(new_losses.begin(), new_losses.end(), 0.0);
    history_.push_back(sum / static_cast<double>(new_losses.size()));
    history_batches_.push_back(batch_index);
    warm_ = true;

    MonitorDecision d;
    if (history_.size() >= 2 * policy_.min_seg_len) {
        const double n = static_cast<double>(history_.size());
        const double penalty = policy_.penalty > 0.0 ? policy_.penalty : 3.0 * std::log(n);
        const auto seg = pelt(history_, penalty, policy_.min_seg_len);
        for (auto cp : seg.changepoints) d.changepoints.push_back(history_batches_[cp]);
        if (policy_.pelt_history == PeltHistory::Full) {
            if (!d.changepoints.empty() && d.changepoints.back() > latest_changepoint_) {
                latest_changepoint_ = d.changepoints.back();
                d.retrain = true;
                d.detection_delay = batch_index - latest_changepoint_;
            }
        } else if (!seg.changepoints.empty()) {
            const auto cut = static_cast<std::ptrdiff_t>(seg.changepoints.back());
            d.retrain = true;
            d.detection_delay = batch_index - history_batches_[static_cast<std::size_t>(cut)];
            history_.erase(history_.begin(), history_.begin() + cut);
            history_batches_.erase(history_batches_.begin(), history_batches_.begin() + cut);
        }
    }
    return record(std::move(d), batch_index);
}

MonitorDecision MonitorState::scheduled_step(long batch_index) {
    if (policy_.kind != PolicyKind::EveryKBatches && policy_.kind != PolicyKind::Never)
        throw InvalidArgument("scheduled_step needs an every_k or never policy");
    warm_ = true;
    MonitorDecision d;
    d.retrain = policy_.kind == PolicyKind::EveryKBatches && batch_index - last_retrain_ >= policy_.k;
    return record(std::move(d), batch_index);
}

MonitorDecision MonitorState::step(std::span<const double> losses, long batch_index) {
    if (!warm()) return warmup(losses, batch_index);
    switch (policy_.kind) {
        case PolicyKind::MeanTest: return mean_test_step(losses, batch_index);
        case PolicyKind::Pelt: return pelt_step(losses, batch_index);
        default: return scheduled_step(batch_index);
    }
}

}  // namespace fcmon
